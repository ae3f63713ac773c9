"""
Dense complex matrix kernel.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` and shape
``(r, r)``. Every function here is pure: inputs are never modified and the
same input bits give the same output bits.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import (
    DimensionMismatch,
    NoConvergence,
    NonFiniteInput,
    NotHermitian,
    SingularNegativePower,
)

__all__ = [
    "PolarFactors",
    "Spectrum",
    "as_cmatrix",
    "hermitian_eig",
    "polar_decompose",
    "psd_power",
    "frobenius_norm",
    "frobenius_inner",
    "normality_defect",
    "char_poly",
    "spectrum",
    "is_diagonalizable",
    "eigenvalue_distance",
    "rank_tolerance",
]

EPS = np.finfo(float).eps


def as_cmatrix(a):
    """Return `a` as a fresh square complex128 array, rejecting NaN/Inf."""
    m = np.array(a, dtype=np.complex128, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput("matrix has non-finite entries")
    return m


def rank_tolerance(dim, s_max):
    """Numerical rank threshold ``dim * eps * s_max``."""
    return dim * EPS * s_max


def _herm(a):
    return a.conj().T


def frobenius_inner(a, b):
    """Real inner product ``Re tr(b* a)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.real(np.vdot(b, a)))


def frobenius_norm(a):
    return float(np.linalg.norm(np.asarray(a)))


def normality_defect(t):
    """Frobenius norm of the self-commutator ``t* t - t t*``."""
    t = np.asarray(t)
    return frobenius_norm(_herm(t) @ t - t @ _herm(t))


def hermitian_eig(a):
    """
    Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : array_like, shape (r, r)
        Hermitian up to ``1e-10 * ||a||``. The exactly Hermitian part is used.

    Returns
    -------
    values : ndarray of float, ascending
    vectors : ndarray, unitary; column ``k`` belongs to ``values[k]``
    """
    a = as_cmatrix(a)
    scale = frobenius_norm(a)
    if frobenius_norm(a - _herm(a)) > 1e-10 * scale:
        raise NotHermitian("matrix is not Hermitian to 1e-10 relative")
    try:
        values, vectors = np.linalg.eigh((a + _herm(a)) / 2)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return values, vectors


@dataclass(frozen=True, eq=False)
class PolarFactors:
    """
    Left polar decomposition ``T = u @ p`` with ``p = |T|``.

    ``u`` is the canonical partial isometry: it maps range(p) isometrically
    onto range(T) and annihilates ker(p). The SVD data that produced the
    factors is kept so powers of ``p`` can be formed without another solve.
    """

    u: np.ndarray
    p: np.ndarray
    rank: int
    singular_values: np.ndarray
    right_vectors: np.ndarray

    def p_power(self, alpha):
        """``|T|**alpha`` with ``0**alpha := 0`` (requires alpha >= 0 if singular)."""
        s = self.singular_values
        pos = s > 0
        if alpha < 0 and not np.all(pos):
            raise SingularNegativePower("negative power of a singular |T|")
        mapped = np.zeros_like(s)
        mapped[pos] = s[pos] ** alpha
        v = self.right_vectors
        out = (v * mapped) @ _herm(v)
        return (out + _herm(out)) / 2


def polar_decompose(t):
    """
    Left polar decomposition of a square complex matrix.

    Singular values at or below ``dim * eps * s_max`` are treated as exact
    zeros, which fixes the rank and the kernel of ``|T|``.

    Returns
    -------
    PolarFactors
    """
    t = as_cmatrix(t)
    r = t.shape[0]
    try:
        w, s, vh = np.linalg.svd(t)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    tol = rank_tolerance(r, s[0])
    rank = int(np.count_nonzero(s > tol))
    s = np.where(s > tol, s, 0.0)
    v = _herm(vh)
    p = (v * s) @ vh
    p = (p + _herm(p)) / 2
    u = w[:, :rank] @ vh[:rank]
    return PolarFactors(u=u, p=p, rank=rank, singular_values=s, right_vectors=v)


def psd_power(p, alpha):
    """
    Real power of a positive semidefinite matrix.

    Eigenvalues below the rank threshold are the kernel and map to 0 for
    every ``alpha >= 0``; so ``psd_power(p, 0)`` is the orthogonal projection
    onto range(p).
    """
    values, vectors = hermitian_eig(p)
    r = values.shape[0]
    top = max(abs(values[0]), abs(values[-1]))
    tol = rank_tolerance(r, top)
    if values[0] < -max(1e-12 * top, tol):
        raise ValueError("matrix is not positive semidefinite")
    kernel = values <= tol
    if alpha < 0 and np.any(kernel):
        raise SingularNegativePower("negative power of a singular matrix")
    mapped = np.zeros_like(values)
    mapped[~kernel] = values[~kernel] ** alpha
    out = (vectors * mapped) @ _herm(vectors)
    return (out + _herm(out)) / 2


def char_poly(t):
    """
    Characteristic polynomial ``det(xI - T)`` by the Faddeev-LeVerrier recursion.

    Returns the monic coefficient array ``[1, c_1, ..., c_r]`` (highest degree
    first, the ``numpy.polyval`` convention).
    """
    t = as_cmatrix(t)
    r = t.shape[0]
    coeffs = np.zeros(r + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    eye = np.eye(r, dtype=np.complex128)
    m = np.zeros_like(t)
    for k in range(1, r + 1):
        m = t @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(t @ m) / k
    return coeffs


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Clustered eigenvalues with algebraic multiplicities; phases in [0, 2pi)."""

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    moduli: np.ndarray
    phases: np.ndarray

    def expanded(self):
        """Eigenvalues repeated by multiplicity."""
        return np.repeat(self.eigenvalues, self.multiplicities)


def _cluster(values, threshold):
    # single-linkage union-find over the pairwise distance graph
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= threshold:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _eig(t):
    try:
        return np.linalg.eig(t)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def spectrum(t, tol=1e-8):
    """
    Eigenvalues of `t` clustered at distance ``tol * ||t||_2``.

    Cluster centres are the means of their members. Clusters are ordered by
    decreasing modulus, then increasing phase.
    """
    t = as_cmatrix(t)
    if tol <= 0:
        raise ValueError("tol must be positive")
    values, _ = _eig(t)
    groups = _cluster(values, tol * frobenius_norm(t))
    centres = np.array([values[g].mean() for g in groups], dtype=np.complex128)
    mults = np.array([len(g) for g in groups], dtype=int)
    moduli = np.abs(centres)
    phases = np.mod(np.angle(centres), 2 * np.pi)
    order = np.lexsort((phases, -moduli))
    return Spectrum(
        eigenvalues=centres[order],
        multiplicities=mults[order],
        moduli=moduli[order],
        phases=phases[order],
    )


def is_diagonalizable(t, tol=1e-8):
    """
    Numerical diagonalizability test.

    For every eigenvalue cluster ``mu`` the kernel dimension of ``T - mu I``
    (singular values at most ``tol * ||T||_2``) must equal the cluster size.
    An eigenvector matrix with condition number above ``1 / tol`` is also
    rejected, since it means `t` is within ``tol`` of a defective matrix.
    """
    t = as_cmatrix(t)
    scale = frobenius_norm(t)
    if scale == 0:
        return True
    spec = spectrum(t, tol)
    eye = np.eye(t.shape[0])
    for mu, m in zip(spec.eigenvalues, spec.multiplicities):
        s = np.linalg.svd(t - mu * eye, compute_uv=False)
        if np.count_nonzero(s <= tol * scale) != m:
            return False
    _, vectors = _eig(t)
    return bool(np.linalg.cond(vectors) <= 1.0 / tol)


def eigenvalue_distance(a, b):
    """
    Largest distance between two eigenvalue multisets under the best matching.

    `a` and `b` are 1-D arrays of equal length (multiplicities expanded).
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatch("multisets have different sizes")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
