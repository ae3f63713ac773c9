"""
Numerical experiments on the lambda-dependence of the limit map.

Every function returns a plain ``dict`` report. Matrices stay as numpy
arrays; :mod:`aluthge.io` turns reports into deterministic JSON. Random
draws go through ``numpy.random.default_rng(seed)`` in a fixed order, so a
seed pins the whole report.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, expm, null_space

from .exceptions import ConstructionFailed, InsufficientData
from .linalg import (
    as_cmatrix,
    eigenvalue_distance,
    frobenius_norm,
    normality_defect,
    polar_decompose,
    psd_power,
)
from .tangent import DiagonalPoint, k_constant
from .transform import (
    DEFAULT_GRID,
    LambdaScan,
    aluthge,
    check_lambda,
    iterate,
    limit,
    r_map,
)

__all__ = [
    "LambdaScan",
    "OrbitSample",
    "random_unitary",
    "random_similarity",
    "sample_orbit",
    "reproduce_section44",
    "reflection_oracle",
    "permutation_example",
    "two_eigenvalue_constancy",
    "nonconstancy_witness",
    "conjecture_probe",
    "rate_fit",
    "rate_suite",
    "reference_limit",
    "block_reduction",
    "limit_contract",
    "CUBE_ROOTS",
    "SECTION44_MATRIX",
    "SECTION44_TARGETS",
]

EPS = np.finfo(float).eps

SECTION44_MATRIX = np.array([[3.0, 0.0], [-2.0, 1.0]], dtype=np.complex128)
SECTION44_TARGETS = {
    0.3: np.array([[2.2273, 0.97380], [0.97380, 1.7726]]),
    0.7: np.array([[1.37162, -0.77790], [-0.77790, 2.62838]]),
}
CUBE_ROOTS = np.exp(2j * np.pi * np.arange(3) / 3)
CYCLIC = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=np.complex128)


def _gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, r):
    """Haar unitary from the QR of a complex Gaussian matrix."""
    q, rr = np.linalg.qr(_gaussian(rng, (r, r)))
    ph = np.diag(rr) / np.abs(np.diag(rr))
    return q * ph[None, :]


def random_similarity(rng, r, cond_bound=20.0, eps=1.0):
    """``S = I + eps Z`` with ``eps`` halved until ``cond(S) <= cond_bound``."""
    if cond_bound <= 1:
        raise ValueError("cond_bound must exceed 1")
    z = _gaussian(rng, (r, r))
    eye = np.eye(r)
    s = eye + eps * z
    while np.linalg.cond(s) > cond_bound:
        eps /= 2
        s = eye + eps * z
    return s


@dataclass
class OrbitSample:
    """Seeded points ``S diag(d) S^-1`` of a similarity orbit."""

    seed: int
    d: np.ndarray
    conditioning_bound: float
    matrices: list = field(default_factory=list)
    similarities: list = field(default_factory=list, repr=False)


def sample_orbit(d, n, seed, cond_bound=20.0, eps=1.0):
    d = np.asarray(d, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    out = OrbitSample(seed=int(seed), d=d, conditioning_bound=float(cond_bound))
    dm = np.diag(d)
    for _ in range(int(n)):
        s = random_similarity(rng, d.size, cond_bound, eps)
        out.similarities.append(s)
        out.matrices.append(s @ dm @ np.linalg.inv(s))
    return out


def reproduce_section44(policy=None, atol=1e-3):
    """
    Limits of ``[[3, 0], [-2, 1]]`` at lambda 0.3 and 0.7 against five-digit targets.
    """
    t = SECTION44_MATRIX
    rows = []
    for lam, target in SECTION44_TARGETS.items():
        trace = iterate(t, lam, policy)
        lim = trace.final
        dev = float(np.abs(lim - target).max())
        herm = frobenius_norm(lim - lim.conj().T)
        spec = eigenvalue_distance(np.linalg.eigvals(lim), [3.0, 1.0])
        rows.append({
            "lambda": lam,
            "limit": lim,
            "target": target,
            "max_abs_deviation": dev,
            "hermitian_residual": herm,
            "spectrum_error": spec,
            "n_steps": trace.n_steps,
            "stop_reason": trace.stop_reason.value,
            "passed": bool(trace.converged and dev <= atol and herm <= 1e-8 and spec <= 1e-6),
        })
    return {
        "experiment": "section44",
        "matrix": t,
        "atol": atol,
        "results": rows,
        "passed": all(r["passed"] for r in rows),
    }


def _reflection(rng, r, p, cond_bound):
    signs = np.array([1.0] * p + [-1.0] * (r - p))
    s = random_similarity(rng, r, cond_bound)
    return s @ np.diag(signs) @ np.linalg.inv(s)


def reflection_oracle(seed, r=3, lam=0.25, n_max=50, p=None, cond_bound=20.0, rtol=1e-9):
    """
    Check the iterates of an oblique reflection against ``R L**((1-2 lam)**n)``.

    ``E = S diag(+-1) S^-1`` squares to the identity; with ``E = R L`` its polar
    decomposition, ``R`` is a unitary reflection and is the limit for every
    lambda.
    """
    lam = check_lambda(lam)
    if r < 2:
        raise ValueError("need r >= 2")
    p = r // 2 if p is None else int(p)
    if not 0 < p < r:
        raise ValueError("need 0 < p < r")
    rng = np.random.default_rng(seed)
    e = _reflection(rng, r, p, cond_bound)
    scale = frobenius_norm(e)
    if normality_defect(e) <= 1e-8 * scale ** 2:
        raise ConstructionFailed("sampled reflection is normal")
    f = polar_decompose(e)
    refl, lpos = f.u, f.p

    errors = []
    cur = e
    for n in range(1, int(n_max) + 1):
        cur = aluthge(cur, lam)
        closed = refl @ psd_power(lpos, (1 - 2 * lam) ** n)
        errors.append(frobenius_norm(cur - closed))
    one_step = frobenius_norm(aluthge(e, lam) - refl)

    trace = iterate(e, lam)
    limit_error = frobenius_norm(trace.final - refl)
    max_err = max(errors) if errors else 0.0
    return {
        "experiment": "reflection",
        "seed": int(seed),
        "lambda": lam,
        "r": r,
        "E": e,
        "R": refl,
        "reflection_residual": frobenius_norm(refl @ refl - np.eye(r)),
        "closed_form_errors": errors,
        "max_closed_form_error": max_err,
        "tolerance": rtol * scale,
        "one_step_error": one_step,
        "limit_error": limit_error,
        "n_steps": trace.n_steps,
        "stop_reason": trace.stop_reason.value,
        "passed": bool(max_err <= rtol * scale and trace.converged and limit_error <= 1e-8 * scale),
    }


def permutation_example(a=2.0, b=3.0, c=1 / 6, lambdas=(0.1, 0.3, 0.5, 0.7, 0.9), policy=None):
    """
    ``T = P diag(a, b, c)`` with ``P`` the cyclic shift and ``abc = 1``.

    Every iterate is ``P D_n`` with ``D_n`` positive diagonal of determinant 1,
    and the limit is ``P`` for every lambda.
    """
    a, b, c = float(a), float(b), float(c)
    if min(a, b, c) <= 0 or abs(a * b * c - 1) > 1e-12:
        raise ValueError("need positive a, b, c with abc = 1")
    t = CYCLIC @ np.diag([a, b, c])
    scan = r_map(t, lambdas, policy)
    form_err = 0.0
    det_err = 0.0
    for tr in scan.traces:
        for it in tr.iterates:
            dn = CYCLIC.T @ it
            off = dn - np.diag(np.diag(dn))
            diag = np.diag(dn)
            form_err = max(form_err, float(np.abs(off).max()), float(np.abs(diag.imag).max()))
            if np.any(diag.real <= 0):
                form_err = max(form_err, float(np.inf))
            det_err = max(det_err, abs(float(np.prod(diag.real)) - 1.0))
    lim_err = [frobenius_norm(m - CYCLIC) for m in scan.limits]
    return {
        "experiment": "permutation",
        "abc": [a, b, c],
        "lambdas": scan.lambdas,
        "limit_errors": lim_err,
        "form_error": form_err,
        "det_error": det_err,
        "dispersion": scan.dispersion,
        "status": [s.value for s in scan.per_lambda_status],
        "passed": bool(scan.all_converged and max(lim_err) <= 1e-8
                       and scan.dispersion <= 1e-7 and det_err <= 1e-10 and form_err <= 1e-10),
    }


def _two_point_sample(rng, d1, d2, n, k, scale):
    # T = W [[d1 I, (d1 - d2) A], [0, d2 I]] W*
    r = n + k
    a = scale * _gaussian(rng, (n, k))
    upper = np.block([[d1 * np.eye(n), (d1 - d2) * a],
                      [np.zeros((k, n)), d2 * np.eye(k)]])
    w = random_unitary(rng, r)
    return w @ upper @ w.conj().T


def block_reduction(t, d1, d2):
    """
    Unitary reduction of a two-eigenvalue matrix to 2x2 upper-triangular blocks.

    Returns ``(V, blocks, tail, residual)`` where ``V* T V`` equals
    ``blocks[0] (+) ... (+) d2 I_tail`` up to ``residual``.
    """
    t = as_cmatrix(t)
    r = t.shape[0]
    s1 = null_space(t - d1 * np.eye(r), rcond=1e-8)
    n = s1.shape[1]
    comp = null_space(s1.conj().T)
    basis = np.hstack([s1, comp])
    tb = basis.conj().T @ t @ basis
    b = tb[:n, n:]
    u, sv, vh = np.linalg.svd(b)
    w = block_diag(u, vh.conj().T)
    v = basis @ w
    # interleave (range_i, comp_i) pairs, then the tail of comp
    order = []
    for i in range(n):
        order += [i, n + i]
    order += list(range(2 * n, r))
    v = v[:, order]
    blocks = [np.array([[d1, s], [0, d2]], dtype=np.complex128) for s in sv]
    tail = r - 2 * n
    model = block_diag(*blocks, d2 * np.eye(tail)) if tail else block_diag(*blocks)
    residual = frobenius_norm(v.conj().T @ t @ v - model)
    return v, blocks, tail, residual


def two_eigenvalue_constancy(d1, d2, n=1, k=None, seed=0, samples=1, lambdas=DEFAULT_GRID,
                             scale=1.0, policy=None):
    """
    Scan the limit map on orbit points with spectrum ``{d1, d2}``, ``|d1| == |d2|``.

    Each sample is also reduced to 2x2 blocks through the singular values of
    its off-diagonal block, and the blockwise limit is compared with the full
    one at the first lambda.
    """
    d1, d2 = complex(d1), complex(d2)
    if abs(abs(d1) - abs(d2)) > 1e-12 * max(abs(d1), 1.0) or d1 == d2:
        raise ValueError("need |d1| == |d2| and d1 != d2")
    k = n if k is None else int(k)
    if k < n:
        raise ValueError("need k >= n")
    rng = np.random.default_rng(seed)
    rows = []
    for idx in range(int(samples)):
        t = _two_point_sample(rng, d1, d2, n, k, scale)
        scan = r_map(t, lambdas, policy)
        v, blocks, tail, residual = block_reduction(t, d1, d2)
        lam0 = scan.lambdas[0]
        parts = [iterate(bk, lam0).final for bk in blocks]
        if tail:
            parts.append(d2 * np.eye(tail))
        blockwise = v @ block_diag(*parts) @ v.conj().T
        rows.append({
            "index": idx,
            "T": t,
            "dispersion": scan.dispersion,
            "all_converged": scan.all_converged,
            "block_residual": residual,
            "blockwise_limit_error": frobenius_norm(blockwise - scan.limits[0]),
        })
    worst = max(r["dispersion"] for r in rows) if rows else 0.0
    return {
        "experiment": "con-dos",
        "d1": d1,
        "d2": d2,
        "n": n,
        "k": k,
        "seed": int(seed),
        "lambdas": [float(x) for x in lambdas],
        "samples": rows,
        "max_dispersion": worst,
        "passed": bool(rows and worst <= 1e-6
                       and all(r["all_converged"] for r in rows)
                       and all(r["block_residual"] <= 1e-8 for r in rows)),
    }


def nonconstancy_witness(d, seed=0, threshold=0.1, samples=10, lambdas=(0.3, 0.7),
                         cond_bound=20.0, policy=None):
    """
    Search seeded orbit samples for ``T`` whose limit changes with lambda.

    Not finding one is reported as ``status == "NoWitnessFound"``; a finite
    search proves nothing either way.
    """
    orbit = sample_orbit(d, samples, seed, cond_bound)
    tried = []
    for idx, t in enumerate(orbit.matrices):
        scan = r_map(t, lambdas, policy)
        tried.append(scan.dispersion)
        if scan.all_converged and scan.dispersion > threshold:
            return {
                "experiment": "witness",
                "d": orbit.d,
                "seed": int(seed),
                "threshold": threshold,
                "status": "WitnessFound",
                "index": idx,
                "T": t,
                "lambdas": scan.lambdas,
                "limits": scan.limits,
                "dispersion": scan.dispersion,
                "dispersions_tried": tried,
            }
    return {
        "experiment": "witness",
        "d": orbit.d,
        "seed": int(seed),
        "threshold": threshold,
        "status": "NoWitnessFound",
        "dispersions_tried": tried,
    }


def conjecture_probe(d=CUBE_ROOTS, samples=50, seed=0, lambdas=(0.3, 0.7), cond_bound=20.0,
                     policy=None):
    """
    Largest lambda-dispersion found on seeded samples of an equal-moduli orbit.

    A dispersion far above round-off is a sample where the limit map is not
    constant. The report is evidence only.
    """
    d = np.asarray(d, dtype=np.complex128)
    mod = np.abs(d)
    if np.ptp(mod) > 1e-12 * mod.max():
        raise ValueError("all moduli must be equal")
    orbit = sample_orbit(d, samples, seed, cond_bound)
    disp = []
    for t in orbit.matrices:
        disp.append(r_map(t, lambdas, policy).dispersion)
    best = int(np.argmax(disp)) if disp else -1
    return {
        "experiment": "conjecture",
        "d": d,
        "n_distinct": int(len(np.unique(np.round(d, 12)))),
        "seed": int(seed),
        "lambdas": [float(x) for x in lambdas],
        "dispersions": disp,
        "max_dispersion": max(disp) if disp else 0.0,
        "argmax": best,
        "T_argmax": orbit.matrices[best] if disp else None,
    }


def reference_limit(trace, extra=5000):
    """Push a converged trace further until steps hit round-off; returns the last iterate."""
    cur = trace.final
    scale = max(frobenius_norm(cur), np.finfo(float).tiny)
    for _ in range(int(extra)):
        nxt = aluthge(cur, trace.lam)
        step = frobenius_norm(nxt - cur)
        cur = nxt
        if step <= 4 * EPS * scale:
            break
    return cur


def rate_fit(trace, n_limit):
    """
    Geometric rate of ``||Delta^n(T) - N||`` from a log-linear fit.

    Errors within ``100 eps ||N||`` of ``N`` are dropped and the slope is fitted
    on the last half of what remains.

    Returns
    -------
    rho_hat : float
        ``exp(slope)``.
    r_squared : float
    """
    n_limit = np.asarray(n_limit)
    if trace.n_steps == 0:
        raise InsufficientData("trace has no steps")
    floor = 100 * EPS * frobenius_norm(n_limit)
    err = np.array([frobenius_norm(m - n_limit) for m in trace.iterates])
    idx = np.nonzero(err > floor)[0]
    if idx.size:
        # keep the leading run above the floor only
        stop = idx[-1] + 1
        idx = np.arange(stop)
        idx = idx[err[idx] > floor]
    tail = idx[idx.size // 2:]
    if tail.size < 5:
        raise InsufficientData(f"only {tail.size} usable points")
    y = np.log(err[tail])
    slope, icept = np.polyfit(tail.astype(float), y, 1)
    fit = slope * tail + icept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(np.exp(slope)), r2


def rate_suite(seed=0, cases=30, eps=1e-3, dims=(2, 3), slack=0.05):
    """
    Fitted rates near diagonal fixed points against the contraction constant.

    Each case draws ``d`` (moduli in [0.5, 2], uniform phases), ``lambda`` in
    [0.1, 0.9] and a unit direction ``A``; the start is
    ``exp(eps A) D exp(-eps A)``.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for idx in range(int(cases)):
        r = int(dims[idx % len(dims)])
        d = rng.uniform(0.5, 2.0, r) * np.exp(2j * np.pi * rng.uniform(size=r))
        lam = float(rng.uniform(0.1, 0.9))
        a = _gaussian(rng, (r, r))
        a /= frobenius_norm(a)
        t = expm(eps * a) @ np.diag(d) @ expm(-eps * a)
        trace = iterate(t, lam)
        k = k_constant(DiagonalPoint(d), lam)
        row = {"index": idx, "d": d, "lambda": lam, "k": k,
               "n_steps": trace.n_steps, "stop_reason": trace.stop_reason.value}
        try:
            ref = reference_limit(trace)
            rho, r2 = rate_fit(trace, ref)
            row.update(rho_hat=rho, r_squared=r2, passed=bool(rho <= k + slack))
        except InsufficientData as exc:
            row.update(rho_hat=None, r_squared=None, passed=False, note=str(exc))
        rows.append(row)
    return {
        "experiment": "rates",
        "seed": int(seed),
        "eps": eps,
        "slack": slack,
        "cases": rows,
        "max_excess": max((r["rho_hat"] - r["k"]) for r in rows if r["rho_hat"] is not None),
        "passed": all(r["passed"] for r in rows),
    }


def limit_contract(t, lam, policy=None):
    """Normality defect and spectrum drift of a converged limit."""
    t = as_cmatrix(t)
    lim = limit(t, lam, policy)
    return {
        "normality_defect": normality_defect(lim),
        "spectrum_error": eigenvalue_distance(np.linalg.eigvals(t), np.linalg.eigvals(lim)),
    }
