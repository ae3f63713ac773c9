"""
Derivative of the lambda-Aluthge transform at a diagonal fixed point.

Fix an invertible ``D = diag(d)``. Tangent vectors to the similarity orbit
of ``D`` are the matrices ``X = AD - DA``; they vanish wherever
``d_i == d_j``. On that space the derivative of the transform at ``D`` is a
combination of entrywise (Hadamard) multiplications::

    dDelta(X) = H o Q(X) + (X - Q(X))

where ``Q`` is the orthogonal projection onto the complement of the
unitary-orbit tangent space and ``H`` is an explicit matrix built from
divided differences of ``t -> t**(lam/2)``. Every entrywise matrix lives in
:class:`DerivativeModel`.

Matrices at a general normal point ``N = U D U*`` are handled by
conjugation, see :func:`derivative_apply_at`.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .exceptions import LambdaOutOfRange, NotTangent, SingularD
from .linalg import frobenius_norm
from .transform import aluthge

__all__ = [
    "DiagonalPoint",
    "DerivativeModel",
    "herm_part",
    "antiherm_part",
    "divided_difference",
    "gamma_prime",
    "orbit_curve",
    "build_model",
    "k_constant",
    "h1_closed_form",
    "h2_closed_form",
    "jk_matrices",
    "tangent_from_direction",
    "direction_from_tangent",
    "check_tangent",
    "q_projection",
    "q_complement",
    "derivative_apply",
    "derivative_apply_at",
    "derivative_fd",
    "stable_projection_block",
    "stable_projection_apply",
    "tangent_basis",
    "operator_matrix",
    "operator_norm",
    "hadamard_operator_norm",
    "compressed_derivative_norm",
]

RTOL = 1e-10


def herm_part(b):
    """``(B + B*) / 2``."""
    b = np.asarray(b)
    return (b + b.conj().T) / 2


def antiherm_part(b):
    """``(B - B*) / 2``."""
    b = np.asarray(b)
    return (b - b.conj().T) / 2


@dataclass(frozen=True, eq=False)
class DiagonalPoint:
    """
    Diagonal entries ``d_1..d_r`` of an invertible diagonal matrix.

    Equalities ``d_i == d_j`` and ``|d_i| == |d_j|`` are decided with relative
    tolerance ``rtol`` against ``max |d|``.
    """

    d: np.ndarray
    rtol: float = RTOL

    def __post_init__(self):
        d = np.atleast_1d(np.array(self.d, dtype=np.complex128))
        if d.ndim != 1 or d.size < 1:
            raise ValueError("d must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(d)):
            raise ValueError("d has non-finite entries")
        if np.any(np.abs(d) <= self.rtol * np.abs(d).max()) or np.abs(d).max() == 0:
            raise SingularD("diagonal point must be invertible")
        object.__setattr__(self, "d", d)

    @property
    def r(self):
        return self.d.size

    @property
    def moduli(self):
        return np.abs(self.d)

    @property
    def phases(self):
        """Arguments in [0, 2pi)."""
        return np.mod(np.angle(self.d), 2 * np.pi)

    @property
    def unit(self):
        return self.d / np.abs(self.d)

    @property
    def scale(self):
        return float(np.abs(self.d).max())

    def matrix(self):
        return np.diag(self.d)

    def same_mask(self):
        """``mask[i, j]`` is True where ``d_i == d_j``."""
        return np.abs(self.d[:, None] - self.d[None, :]) <= self.rtol * self.scale

    def support(self):
        """Entries allowed to be nonzero in a tangent vector."""
        return ~self.same_mask()

    def equal_moduli_mask(self):
        m = self.moduli
        return np.abs(m[:, None] - m[None, :]) <= self.rtol * self.scale

    def equal_phase_mask(self):
        u = self.unit
        return np.abs(u[:, None] - u[None, :]) <= self.rtol


def _as_point(d):
    return d if isinstance(d, DiagonalPoint) else DiagonalPoint(d)


def _check_lambda(lam):
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {lam}")
    return lam


def divided_difference(f, fprime, a, rtol=RTOL):
    """
    First divided-difference matrix of `f` at the real points `a`.

    ``M[i, j] = (f(a_j) - f(a_i)) / (a_j - a_i)``, or ``fprime(a_i)`` when the
    points coincide. By the Daleckii-Krein theorem, for a Hermitian curve
    through ``diag(a)``, ``(f o gamma)'(0) = M o gamma'(0)``.
    """
    a = np.asarray(a, dtype=float)
    ai, aj = a[:, None], a[None, :]
    eq = np.abs(aj - ai) <= rtol * max(np.abs(a).max(), 1e-300)
    diff = np.where(eq, 1.0, aj - ai)
    fa = f(a)
    quot = (fa[None, :] - fa[:, None]) / diff
    return np.where(eq, np.broadcast_to(fprime(a)[:, None], eq.shape), quot)


def orbit_curve(d, a, t):
    """``exp(tA) D exp(-tA)``."""
    d = _as_point(d)
    return expm(t * a) @ d.matrix() @ expm(-t * a)


def gamma_prime(d, a):
    """
    Derivative at 0 of ``gamma(t) = C(t)* C(t)`` with ``C(t) = exp(tA) D exp(-tA)``.

    Equals ``(R - T+) o Re(A) + T- o Im(A)`` with ``R_ij = 2 conj(d_i) d_j``,
    ``T+_ij = |d_i|^2 + |d_j|^2`` and ``T-_ij = |d_j|^2 - |d_i|^2``.
    """
    d = _as_point(d)
    a = np.asarray(a, dtype=np.complex128)
    x = d.d
    m2 = np.abs(x) ** 2
    rmat = 2 * x.conj()[:, None] * x[None, :]
    tplus = m2[:, None] + m2[None, :]
    tminus = m2[None, :] - m2[:, None]
    return (rmat - tplus) * herm_part(a) + tminus * antiherm_part(a)


@dataclass(frozen=True, eq=False)
class DerivativeModel:
    """
    Entrywise matrices describing the derivative at ``D = diag(d)``.

    ``H = M o Nmat o (Rmat - Tplus) + Lmat``; ``H1``/``H2`` are its Hermitian
    and anti-Hermitian parts; ``G = -H2 / (1 - H1)`` on the tangent support
    gives the stable projection block; ``k`` bounds the contraction.
    """

    point: DiagonalPoint
    lam: float
    J: np.ndarray
    K: np.ndarray
    M_half_lambda: np.ndarray
    Rmat: np.ndarray
    Tplus: np.ndarray
    Tminus: np.ndarray
    Nmat: np.ndarray
    Lmat: np.ndarray
    H: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    G: np.ndarray
    k: float

    MATRIX_FIELDS = ("J", "K", "M_half_lambda", "Rmat", "Tplus", "Tminus",
                     "Nmat", "Lmat", "H", "H1", "H2", "G")

    @property
    def support(self):
        return self.point.support()


def build_model(d, lam):
    d = _as_point(d)
    lam = _check_lambda(lam)
    x = d.d
    r = d.r
    mod = d.moduli
    mi, mj = mod[:, None], mod[None, :]
    same = d.same_mask()
    eqmod = d.equal_moduli_mask()

    jmat, kmat = jk_matrices(d)

    with np.errstate(divide="ignore", invalid="ignore"):
        quot = (mj ** lam - mi ** lam) / (mj ** 2 - mi ** 2)
    mhalf = np.where(eqmod, np.broadcast_to(lam / 2 * mi ** (lam - 2), eqmod.shape), quot)

    rmat = 2 * x.conj()[:, None] * x[None, :]
    tplus = mi ** 2 + mj ** 2
    tminus = mj ** 2 - mi ** 2
    nmat = np.broadcast_to(mj ** (-lam), (r, r)).copy()
    lmat = mi ** lam * mj ** (-lam)

    h = mhalf * nmat * (rmat - tplus) + lmat
    h1 = herm_part(h)
    h2 = h - h1
    # H is Hermitian on equal-moduli pairs; drop the round-off so H2 is exactly 0 there
    h2[eqmod] = 0.0
    h1[eqmod] = h[eqmod]
    support = ~same
    g = np.zeros((r, r), dtype=np.complex128)
    g[support] = -h2[support] / (1.0 - h1[support])

    return DerivativeModel(
        point=d, lam=lam, J=jmat, K=kmat, M_half_lambda=mhalf, Rmat=rmat,
        Tplus=tplus, Tminus=tminus, Nmat=nmat, Lmat=lmat, H=h, H1=h1, H2=h2,
        G=g, k=k_constant(d, lam),
    )


def k_constant(d, lam):
    """
    Contraction constant of the derivative on the stable directions.

    The larger of ``(|d_j|^(1-lam) |d_i|^lam + |d_i|^(1-lam) |d_j|^lam) / (|d_i| + |d_j|)``
    over pairs with different moduli and ``|lam exp(i(theta_j - theta_i)) + 1 - lam|``
    over pairs with different phases. Zero when both families are empty.
    """
    d = _as_point(d)
    lam = _check_lambda(lam)
    mod = d.moduli
    mi, mj = mod[:, None], mod[None, :]
    best = 0.0
    diffmod = ~d.equal_moduli_mask()
    if diffmod.any():
        fam = (mj ** (1 - lam) * mi ** lam + mi ** (1 - lam) * mj ** lam) / (mi + mj)
        best = max(best, float(fam[diffmod].max()))
    diffphase = ~d.equal_phase_mask()
    if diffphase.any():
        u = d.unit
        alpha = u[None, :] / u[:, None]
        fam = np.abs(lam * alpha + 1 - lam)
        best = max(best, float(fam[diffphase].max()))
    return best


def h1_closed_form(d, lam):
    """Hermitian part of ``H`` from its moduli/phase formula (off the diagonal only)."""
    d = _as_point(d)
    lam = _check_lambda(lam)
    mod = d.moduli
    mi, mj = mod[:, None], mod[None, :]
    u = d.unit
    alpha = u[None, :] / u[:, None]
    eqmod = d.equal_moduli_mask()
    a = mj ** (2 - lam) * mi ** lam - mi ** (2 - lam) * mj ** lam
    b = mj ** (1 + lam) * mi ** (1 - lam) - mi ** (1 + lam) * mj ** (1 - lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = (a + alpha * b) / (mj ** 2 - mi ** 2)
    return np.where(eqmod, lam * (alpha - 1) + 1, quot)


def h2_closed_form(d, lam):
    """Anti-Hermitian part of ``H`` in terms of ``a = |d_j| / |d_i|``; zero for equal moduli."""
    d = _as_point(d)
    lam = _check_lambda(lam)
    mod = d.moduli
    a = mod[None, :] / mod[:, None]
    u = d.unit
    alpha = u[None, :] / u[:, None]
    eqmod = d.equal_moduli_mask()
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (
            a ** (1 - lam) + a ** (lam - 1)
            + alpha * (2 - a ** lam - a ** (-lam))
            - a - 1 / a
        ) / (a - 1 / a)
    return np.where(eqmod, 0.0, val)


def tangent_from_direction(d, a):
    """``X = A D - D A``; entries with ``d_i == d_j`` are exactly zero."""
    d = _as_point(d)
    a = np.asarray(a, dtype=np.complex128)
    x = a * d.d[None, :] - d.d[:, None] * a
    x[d.same_mask()] = 0.0
    return x


def direction_from_tangent(d, x):
    """A direction ``A`` with ``A D - D A == X``: ``A_ij = X_ij / (d_j - d_i)`` on the support."""
    d = _as_point(d)
    x = check_tangent(d, x)
    support = d.support()
    diff = d.d[None, :] - d.d[:, None]
    a = np.zeros_like(x)
    a[support] = x[support] / diff[support]
    return a


def check_tangent(d, x, atol=1e-10):
    """
    Validate the tangent sparsity pattern and return a cleaned copy.

    Raises
    ------
    NotTangent
        If an entry with ``d_i == d_j`` exceeds ``atol * max(1, ||x||)``.
    """
    d = _as_point(d)
    x = np.array(x, dtype=np.complex128, copy=True)
    if x.shape != (d.r, d.r):
        raise NotTangent(f"expected shape {(d.r, d.r)}, got {x.shape}")
    same = d.same_mask()
    if np.abs(x[same]).max(initial=0.0) > atol * max(1.0, frobenius_norm(x)):
        raise NotTangent("nonzero entry where d_i == d_j")
    x[same] = 0.0
    return x


def jk_matrices(d):
    """
    The pair ``(J, K)`` with ``A D - D A == J o K o A`` for every ``A``.

    ``K_ij = |d_j - d_i| sgn(j - i)`` (real, antisymmetric) and
    ``J_ij = (d_j - d_i) / K_ij`` (unimodular, symmetric), with ``K = 0`` and
    ``J = 1`` where ``d_i == d_j``.
    """
    d = _as_point(d)
    x = d.d
    same = d.same_mask()
    i, j = np.indices((d.r, d.r))
    diff = x[None, :] - x[:, None]
    kmat = np.where(same, 0.0, np.abs(diff) * np.sign(j - i))
    jmat = np.where(same, 1.0 + 0j, diff / np.where(same, 1.0, kmat))
    return jmat, kmat


def q_projection(d, x):
    """
    Orthogonal projection onto the complement of the unitary-orbit tangent space.

    ``Q(X) = J o Im(X / J)``, with ``/`` entrywise and ``Im(B) = (B - B*) / 2``.
    """
    d = _as_point(d)
    x = check_tangent(d, x)
    jmat, _ = jk_matrices(d)
    return jmat * antiherm_part(x / jmat)


def q_complement(d, x):
    """``X - Q(X)``: projection onto the unitary-orbit tangent space."""
    x = check_tangent(d, x)
    return x - q_projection(d, x)


def derivative_apply(d, lam, x, model=None):
    """
    Derivative of the transform at ``diag(d)`` applied to a tangent vector.

    Identity on the unitary-orbit tangent space; entrywise multiplication by
    ``H`` on the range of ``Q``.
    """
    d = _as_point(d)
    if model is None:
        model = build_model(d, lam)
    x = check_tangent(d, x)
    y = q_projection(d, x)
    return model.H * y + (x - y)


def derivative_apply_at(u, d, lam, y, model=None):
    """Derivative at the normal point ``N = U diag(d) U*`` applied to ``Y``."""
    u = np.asarray(u, dtype=np.complex128)
    uh = u.conj().T
    return u @ derivative_apply(d, lam, uh @ np.asarray(y) @ u, model) @ uh


def derivative_fd(d, lam, x, h=1e-5):
    """
    Central finite difference of the transform along ``t -> exp(tA) D exp(-tA)``.

    ``A`` is recovered from ``X`` by :func:`direction_from_tangent`. Independent
    of the closed-form model; the error is O(h^2).
    """
    d = _as_point(d)
    if h <= 0:
        raise ValueError("h must be positive")
    a = direction_from_tangent(d, x)
    if not np.any(a):
        return np.zeros((d.r, d.r), dtype=np.complex128)
    plus = aluthge(orbit_curve(d, a, h), lam)
    minus = aluthge(orbit_curve(d, a, -h), lam)
    return (plus - minus) / (2 * h)


def stable_projection_block(d, lam):
    """The anti-Hermitian matrix ``G`` with ``(I - Q) P Q = (I - Q) (G o .) Q``."""
    return build_model(d, lam).G


def stable_projection_apply(d, lam, x, model=None):
    """
    Projection onto the stable subspace along the unitary-orbit tangent space.

    In the ``(Q, I - Q)`` block form it is ``[[I, 0], [G o ., 0]]``.
    """
    d = _as_point(d)
    if model is None:
        model = build_model(d, lam)
    y = q_projection(d, x)
    return y + q_complement(d, model.G * y)


def tangent_basis(d):
    """
    Orthonormal real basis ``{E_ij, i E_ij}`` of the tangent space, row-major
    over the support, for the inner product ``Re tr(B* A)``.
    """
    d = _as_point(d)
    basis = []
    for i, j in zip(*np.nonzero(d.support())):
        for c in (1.0, 1j):
            e = np.zeros((d.r, d.r), dtype=np.complex128)
            e[i, j] = c
            basis.append(e)
    return basis


def operator_matrix(fn, d):
    """Real matrix of a real-linear map on the tangent space in :func:`tangent_basis`."""
    d = _as_point(d)
    support = d.support()
    cols = []
    for e in tangent_basis(d):
        out = np.asarray(fn(e))[support]
        cols.append(np.concatenate([[z.real, z.imag] for z in out]) if out.size else [])
    return np.array(cols, dtype=float).T


def operator_norm(fn, d):
    m = operator_matrix(fn, d)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def hadamard_operator_norm(a, d):
    """Norm of ``X -> A o X`` on the tangent space: ``max |A_ij|`` over the support."""
    d = _as_point(d)
    support = d.support()
    if not support.any():
        return 0.0
    return float(np.abs(np.asarray(a)[support]).max())


def compressed_derivative_norm(d, lam):
    """
    Operator norm of ``Q dDelta Q`` restricted to the range of ``Q``.

    Formed explicitly: an orthonormal basis of range(Q) is read off the
    eigenvectors of the (symmetric) matrix of ``Q`` and the compressed
    derivative's matrix is taken in that basis.
    """
    d = _as_point(d)
    model = build_model(d, lam)
    qm = operator_matrix(lambda x: q_projection(d, x), d)
    if qm.size == 0:
        return 0.0
    dm = operator_matrix(lambda x: derivative_apply(d, lam, x, model), d)
    w, v = np.linalg.eigh((qm + qm.T) / 2)
    b = v[:, w > 0.5]
    if b.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(b.T @ qm @ dm @ qm @ b, 2))
