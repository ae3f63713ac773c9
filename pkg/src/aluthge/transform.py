"""
The lambda-Aluthge transform and its iteration.

For a square matrix ``T`` with left polar decomposition ``T = U |T|`` and
``0 < lam < 1``::

    aluthge(T, lam) = |T|**lam @ U @ |T|**(1 - lam)

Normal matrices are exactly the fixed points, and for diagonalizable ``T`` the
iterates converge to a normal matrix with the same spectrum.
"""
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from ._parallel import ordered_map
from .exceptions import (
    DidNotConverge,
    LambdaOutOfRange,
    LimitCheckWarning,
    NoConvergence,
    NotDiagonalizable,
    NotDiagonalizableWarning,
)
from .linalg import (
    as_cmatrix,
    eigenvalue_distance,
    frobenius_norm,
    is_diagonalizable,
    normality_defect,
    polar_decompose,
    spectrum,
)

__all__ = [
    "StopReason",
    "StopPolicy",
    "IterationTrace",
    "LambdaScan",
    "SingularSplit",
    "aluthge",
    "duggal",
    "iterate",
    "limit",
    "split_singular",
    "r_map",
    "dispersion",
    "DEFAULT_GRID",
]

DEFAULT_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


def check_lambda(lam):
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {lam}")
    return lam


def _core(u_in_v, s, lam):
    # |T|^lam U |T|^(1-lam) in the right-singular basis V is
    # diag(s^lam) (V* U V) diag(s^(1-lam)); zero singular values give exact zeros
    pos = s > 0
    a = np.where(pos, s, 1.0) ** lam * pos
    b = np.where(pos, s, 1.0) ** (1.0 - lam) * pos
    return (a[:, None] * u_in_v) * b[None, :]


def _svd(t):
    try:
        return np.linalg.svd(t)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def aluthge(t, lam):
    """
    lambda-Aluthge transform ``|T|**lam @ U @ |T|**(1 - lam)``.

    Singular values below the numerical rank threshold are treated as zero,
    matching :func:`aluthge.linalg.polar_decompose`. The result does not
    depend on how the polar isometry is extended to ker|T|.
    """
    lam = check_lambda(lam)
    f = polar_decompose(t)
    v = f.right_vectors
    vh = v.conj().T
    core = _core(vh @ f.u @ v, f.singular_values, lam)
    return v @ core @ vh


def duggal(t):
    """Duggal transform ``|T| @ U``; equals ``U* T U`` when T is invertible."""
    f = polar_decompose(t)
    return f.p @ f.u


class StopReason(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    NON_FINITE = "NonFinite"


@dataclass(frozen=True)
class StopPolicy:
    """Absolute stopping tolerances for :func:`iterate`."""

    step_tol: float
    normality_tol: float
    max_iters: int = 20000

    def __post_init__(self):
        if not (self.step_tol > 0 and self.normality_tol > 0):
            raise ValueError("tolerances must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")

    @classmethod
    def for_matrix(cls, t, step_rel=1e-11, normality_rel=1e-9, max_iters=20000):
        """Tolerances scaled by ``||t||_2`` (floored at the smallest normal double)."""
        scale = max(frobenius_norm(t), np.finfo(float).tiny)
        return cls(step_rel * scale, normality_rel * scale, max_iters)


@dataclass
class IterationTrace:
    lam: float
    iterates: list
    step_norms: list = field(default_factory=list)
    normality_defects: list = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_ITERS

    @property
    def n_steps(self):
        return len(self.step_norms)

    @property
    def final(self):
        return self.iterates[-1]

    @property
    def converged(self):
        return self.stop_reason is StopReason.CONVERGED


def iterate(t, lam, policy=None):
    """
    Iterate the lambda-Aluthge transform until it settles on a normal matrix.

    Stops when the Frobenius step is at most ``policy.step_tol`` and the
    normality defect at most ``policy.normality_tol``, or after
    ``policy.max_iters`` steps. A start that is already a fixed point
    returns with zero recorded steps.

    Returns
    -------
    IterationTrace
    """
    t = as_cmatrix(t)
    lam = check_lambda(lam)
    if policy is None:
        policy = StopPolicy.for_matrix(t)
    trace = IterationTrace(lam=lam, iterates=[t])

    if normality_defect(t) <= policy.normality_tol:
        probe = aluthge(t, lam)
        if frobenius_norm(probe - t) <= policy.step_tol:
            trace.stop_reason = StopReason.CONVERGED
            return trace

    cur = t
    for _ in range(int(policy.max_iters)):
        try:
            nxt = aluthge(cur, lam)
        except (NoConvergence, ValueError):
            trace.stop_reason = StopReason.NON_FINITE
            return trace
        if not np.all(np.isfinite(nxt)):
            trace.stop_reason = StopReason.NON_FINITE
            return trace
        step = frobenius_norm(nxt - cur)
        defect = normality_defect(nxt)
        trace.iterates.append(nxt)
        trace.step_norms.append(step)
        trace.normality_defects.append(defect)
        cur = nxt
        if step <= policy.step_tol and defect <= policy.normality_tol:
            trace.stop_reason = StopReason.CONVERGED
            return trace
    trace.stop_reason = StopReason.MAX_ITERS
    return trace


def limit(t, lam, policy=None, spectrum_tol=1e-6):
    """
    Limit of the iterated lambda-Aluthge transform.

    Emits :class:`NotDiagonalizableWarning` for non-diagonalizable input and
    :class:`LimitCheckWarning` when the limit's eigenvalues drift from those
    of `t` by more than `spectrum_tol`.

    Raises
    ------
    DidNotConverge
        With the full trace attached as ``exc.trace``.
    """
    t = as_cmatrix(t)
    if not is_diagonalizable(t):
        warnings.warn("input is not diagonalizable", NotDiagonalizableWarning, stacklevel=2)
    trace = iterate(t, lam, policy)
    if not trace.converged:
        raise DidNotConverge(
            f"no convergence at lambda={trace.lam} ({trace.stop_reason.value} "
            f"after {trace.n_steps} steps)",
            trace,
        )
    out = trace.final
    drift = eigenvalue_distance(np.linalg.eigvals(t), np.linalg.eigvals(out))
    if drift > spectrum_tol:
        warnings.warn(f"limit spectrum drifted by {drift:.3e}", LimitCheckWarning, stacklevel=2)
    return out


class SingularSplit(NamedTuple):
    t1: np.ndarray
    kernel_dim: int
    basis: np.ndarray


def split_singular(t, lam, tol=1e-8):
    """
    Reduce a singular diagonalizable matrix to its invertible part.

    After one transform step the kernel of ``aluthge(t, lam)`` is ker|t|, and
    it is orthogonal to the range. In the returned unitary ``basis`` (range
    columns first, kernel columns last)::

        basis.conj().T @ aluthge(t, lam) @ basis == [[t1, 0], [0, 0]]

    The kernel dimension is the size of the zero eigenvalue cluster of `t`,
    and the corresponding smallest singular values are zeroed before the
    step so the zero blocks are exact.
    """
    t = as_cmatrix(t)
    lam = check_lambda(lam)
    if not is_diagonalizable(t, tol):
        raise NotDiagonalizable("split_singular requires a diagonalizable matrix")
    spec = spectrum(t, tol)
    zero = spec.moduli <= tol * frobenius_norm(t)
    kernel_dim = int(spec.multiplicities[zero].sum())
    w, s, vh = _svd(t)
    r = t.shape[0]
    s = s.copy()
    s[r - kernel_dim:] = 0.0
    core = _core(vh @ w, s, lam)
    rank = r - kernel_dim
    return SingularSplit(t1=core[:rank, :rank], kernel_dim=kernel_dim, basis=vh.conj().T)


def dispersion(matrices):
    """Largest pairwise Frobenius distance; 0 for fewer than two matrices."""
    worst = 0.0
    for i in range(len(matrices)):
        for j in range(i + 1, len(matrices)):
            worst = max(worst, frobenius_norm(matrices[i] - matrices[j]))
    return worst


@dataclass
class LambdaScan:
    """The limit map sampled on a lambda grid."""

    lambdas: list
    limits: list
    dispersion: float
    per_lambda_status: list
    traces: list = field(default_factory=list, repr=False)

    @property
    def all_converged(self):
        return all(s is StopReason.CONVERGED for s in self.per_lambda_status)


def r_map(t, lambdas=DEFAULT_GRID, policy=None, max_workers=None):
    """
    Sample ``lam -> limit(t, lam)`` on a grid.

    Failed lambdas keep their last iterate in ``limits`` and their stop reason
    in ``per_lambda_status``; the dispersion is taken over converged points
    only. Output order follows `lambdas` whatever the worker count.
    """
    t = as_cmatrix(t)
    lambdas = [check_lambda(x) for x in lambdas]
    if not is_diagonalizable(t):
        warnings.warn("input is not diagonalizable", NotDiagonalizableWarning, stacklevel=2)
    if policy is None:
        policy = StopPolicy.for_matrix(t)
    traces = ordered_map(lambda lam: iterate(t, lam, policy), lambdas, max_workers)
    limits = [tr.final for tr in traces]
    status = [tr.stop_reason for tr in traces]
    good = [m for m, s in zip(limits, status) if s is StopReason.CONVERGED]
    return LambdaScan(
        lambdas=lambdas,
        limits=limits,
        dispersion=dispersion(good),
        per_lambda_status=status,
        traces=traces,
    )
