import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from aluthge.exceptions import (
    DimensionMismatch,
    NonFiniteInput,
    NotHermitian,
    SingularNegativePower,
)
from aluthge.linalg import (
    as_cmatrix,
    char_poly,
    eigenvalue_distance,
    frobenius_inner,
    frobenius_norm,
    hermitian_eig,
    is_diagonalizable,
    normality_defect,
    polar_decompose,
    psd_power,
    spectrum,
)
from conftest import cgauss, diagonalizable, random_unitary

T44 = np.array([[3.0, 0.0], [-2.0, 1.0]])
seeds = st.integers(0, 2**31 - 1)


def test_as_cmatrix_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        as_cmatrix(np.zeros((2, 3)))
    with pytest.raises(NonFiniteInput):
        as_cmatrix([[1.0, np.nan], [0.0, 1.0]])
    a = np.eye(2)
    m = as_cmatrix(a)
    m[0, 0] = 5
    assert a[0, 0] == 1


# hermitian_eig

def test_hermitian_eig_diagonal():
    w, v = hermitian_eig(np.diag([3.0, 1.0]))
    assert np.allclose(w, [1, 3])
    assert np.allclose(np.abs(v), [[0, 1], [1, 0]])


def test_hermitian_eig_identity():
    w, v = hermitian_eig(np.eye(3))
    assert np.allclose(w, 1)
    assert np.allclose(v, np.eye(3))


def test_hermitian_eig_two_by_two():
    # roots of x^2 - 4x + 3
    w, _ = hermitian_eig([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(w, np.roots([1, -4, 3])[::-1])


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig([[1.0, 2.0], [0.0, 1.0]])


def test_hermitian_eig_deterministic_on_degenerate():
    a = np.diag([1.0, 1.0, 2.0]).astype(complex)
    v1 = hermitian_eig(a)[1]
    v2 = hermitian_eig(a.copy())[1]
    assert np.array_equal(v1, v2)


@given(seeds, st.integers(1, 6))
def test_hermitian_eig_reconstruction(seed, r):
    rng = np.random.default_rng(seed)
    z = cgauss(rng, (r, r))
    a = z + z.conj().T
    w, v = hermitian_eig(a)
    scale = frobenius_norm(a)
    assert np.all(np.diff(w) >= 0)
    assert frobenius_norm((v * w) @ v.conj().T - a) <= 1e-10 * scale
    assert frobenius_norm(v.conj().T @ v - np.eye(r)) <= 1e-10


# polar_decompose

def test_polar_of_unitary(rng):
    u = random_unitary(rng, 4)
    f = polar_decompose(u)
    assert np.allclose(f.u, u, atol=1e-12)
    assert np.allclose(f.p, np.eye(4), atol=1e-12)
    assert f.rank == 4


def test_polar_of_positive_diagonal():
    f = polar_decompose(np.diag([3.0, 1.0]))
    assert np.allclose(f.u, np.eye(2), atol=1e-14)
    assert np.allclose(f.p, np.diag([3.0, 1.0]), atol=1e-14)


def test_polar_of_section44_matrix():
    f = polar_decompose(T44)
    # independent oracle: principal square root of T*T
    tt = T44.T @ T44
    assert np.allclose(tt, [[13, -2], [-2, 1]])
    assert np.allclose(f.p, sla.sqrtm(tt), atol=1e-12)
    assert frobenius_norm(f.u @ f.p - T44) <= 1e-12 * frobenius_norm(T44)


def test_polar_singular_partial_isometry():
    t = np.array([[0.0, 1.0], [0.0, 0.0]])
    f = polar_decompose(t)
    assert f.rank == 1
    assert np.allclose(f.p, np.diag([0.0, 1.0]), atol=1e-15)
    assert np.allclose(f.u, t, atol=1e-15)
    # u* u is the projection onto range(p)
    assert np.allclose(f.u.conj().T @ f.u, psd_power(f.p, 0), atol=1e-12)
    assert np.allclose(f.u @ psd_power(f.p, 0) - f.u, 0)


def test_polar_reconstruction_1000_seeded():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for k in range(1000):
        r = 2 + k % 5
        t = cgauss(rng, (r, r)) * rng.uniform(0.1, 10)
        f = polar_decompose(t)
        worst = max(worst, frobenius_norm(f.u @ f.p - t) / max(1.0, frobenius_norm(t)))
        assert np.linalg.eigvalsh(f.p).min() >= -1e-12 * frobenius_norm(t)
        assert frobenius_norm(f.u.conj().T @ f.u - np.eye(r)) <= 1e-12
    assert worst <= 1e-11


@given(seeds, st.integers(2, 5), st.integers(1, 3))
def test_polar_low_rank(seed, r, drop):
    rng = np.random.default_rng(seed)
    drop = min(drop, r - 1)
    t = cgauss(rng, (r, r - drop)) @ cgauss(rng, (r - drop, r))
    f = polar_decompose(t)
    assert f.rank == r - drop
    scale = frobenius_norm(t)
    assert frobenius_norm(f.u @ f.p - t) <= 1e-12 * scale
    proj = psd_power(f.p, 0)
    assert frobenius_norm(f.u.conj().T @ f.u - proj) <= 1e-10
    assert frobenius_norm(f.u @ (np.eye(r) - proj)) <= 1e-10


# psd_power

def test_psd_power_examples():
    assert np.allclose(psd_power(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]))
    assert np.allclose(psd_power(np.eye(3), -0.7), np.eye(3))
    assert np.allclose(psd_power(np.diag([4.0, 0.0]), 0.5), np.diag([2.0, 0.0]))


def test_psd_power_singular_negative():
    with pytest.raises(SingularNegativePower):
        psd_power(np.diag([4.0, 0.0]), -0.5)


def test_psd_power_one_and_zero(rng):
    z = cgauss(rng, (4, 2))
    p = z @ z.conj().T
    assert frobenius_norm(psd_power(p, 1) - p) <= 1e-12 * frobenius_norm(p)
    q = psd_power(p, 0)
    # orthogonal projection onto range(z)
    qz = z @ np.linalg.pinv(z)
    assert frobenius_norm(q - qz) <= 1e-12


@given(seeds, st.integers(1, 5), st.floats(-1, 1), st.floats(-1, 1))
def test_psd_power_group_law(seed, r, a, b):
    rng = np.random.default_rng(seed)
    z = cgauss(rng, (r, r))
    p = z @ z.conj().T + 0.1 * np.eye(r)
    lhs = psd_power(p, a) @ psd_power(p, b)
    rhs = psd_power(p, a + b)
    assert frobenius_norm(lhs - rhs) <= 1e-10 * frobenius_norm(p) ** (a + b)


@given(seeds, st.integers(1, 4), st.floats(-1, 2))
def test_psd_power_matches_scipy(seed, r, a):
    rng = np.random.default_rng(seed)
    z = cgauss(rng, (r, r))
    p = z @ z.conj().T + 0.5 * np.eye(r)
    ref = sla.fractional_matrix_power(p, a)
    assert frobenius_norm(psd_power(p, a) - ref) <= 1e-9 * frobenius_norm(ref)


# norms

def test_frobenius_examples():
    assert frobenius_inner(np.eye(2), np.eye(2)) == 2
    assert np.isclose(frobenius_norm(T44), np.sqrt(14))
    assert np.isclose(frobenius_norm(np.eye(5)), np.sqrt(5))
    a = np.array([[1.0, 2.0], [-3.0, 0.5]])
    assert frobenius_inner(a, 1j * a) == 0
    with pytest.raises(DimensionMismatch):
        frobenius_inner(np.eye(2), np.eye(3))


def test_normality_defect_examples(rng):
    d = np.diag(cgauss(rng, 4))
    assert normality_defect(d) <= 1e-14 * frobenius_norm(d) ** 2
    assert normality_defect(random_unitary(rng, 4)) <= 1e-13
    assert np.isclose(normality_defect([[0.0, 1.0], [0.0, 0.0]]), np.sqrt(2))


# char_poly

def test_char_poly_examples():
    assert np.allclose(char_poly(np.diag([3.0, 1.0])), [1, -4, 3])
    assert np.allclose(char_poly(T44), [1, -4, 3])
    assert np.allclose(char_poly(np.eye(3)), [1, -3, 3, -1])


@given(seeds, st.integers(1, 6))
def test_char_poly_matches_roots(seed, r):
    rng = np.random.default_rng(seed)
    t, d = diagonalizable(rng, r)
    ref = np.poly(d)
    got = char_poly(t)
    assert np.all(np.abs(got - ref) <= 1e-7 * np.maximum(np.abs(ref), 1.0))


# spectrum and diagonalizability

def test_spectrum_section44():
    s = spectrum(T44)
    assert np.allclose(s.eigenvalues, [3, 1])
    assert list(s.multiplicities) == [1, 1]
    assert is_diagonalizable(T44)


def test_spectrum_jordan():
    j = [[0.0, 1.0], [0.0, 0.0]]
    s = spectrum(j)
    assert list(s.multiplicities) == [2]
    assert abs(s.eigenvalues[0]) < 1e-12
    assert not is_diagonalizable(j)


@given(seeds, st.integers(1, 5))
def test_normal_is_diagonalizable(seed, r):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, r)
    n = u @ np.diag(cgauss(rng, r)) @ u.conj().T
    assert is_diagonalizable(n)


def test_spectrum_phases_and_reconstruction():
    d = np.array([2j, -1.0, 1 - 1j, 2j])
    s = spectrum(np.diag(d))
    assert s.multiplicities.sum() == 4
    assert np.all((s.phases >= 0) & (s.phases < 2 * np.pi))
    rebuilt = s.moduli * np.exp(1j * s.phases)
    assert np.allclose(rebuilt, s.eigenvalues, rtol=1e-12)
    assert eigenvalue_distance(s.expanded(), d) <= 1e-12


def test_diagonalizable_with_multiple_eigenvalue(rng):
    s = np.eye(3) + 0.3 * cgauss(rng, (3, 3))
    t = s @ np.diag([2.0, 2.0, 1.0]) @ np.linalg.inv(s)
    assert is_diagonalizable(t)
    j = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
    assert not is_diagonalizable(s @ j @ np.linalg.inv(s))
