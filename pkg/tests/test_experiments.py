import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from aluthge.exceptions import ConstructionFailed, InsufficientData
from aluthge.experiments import (
    CUBE_ROOTS,
    block_reduction,
    conjecture_probe,
    limit_contract,
    nonconstancy_witness,
    permutation_example,
    random_similarity,
    random_unitary,
    rate_fit,
    reference_limit,
    reflection_oracle,
    reproduce_section44,
    sample_orbit,
    two_eigenvalue_constancy,
)
from aluthge.linalg import eigenvalue_distance, frobenius_norm, polar_decompose, psd_power
from aluthge.transform import aluthge, iterate, r_map
from conftest import cgauss

seeds = st.integers(0, 2**31 - 1)


def test_random_unitary_is_unitary():
    u = random_unitary(np.random.default_rng(0), 5)
    assert frobenius_norm(u.conj().T @ u - np.eye(5)) <= 1e-13


@given(seeds, st.integers(2, 5), st.floats(1.5, 50))
def test_similarity_conditioning(seed, r, bound):
    s = random_similarity(np.random.default_rng(seed), r, bound)
    assert np.linalg.cond(s) <= bound


def test_sample_orbit_spectrum_and_seed():
    d = [2.0, -1.0, 1j]
    a = sample_orbit(d, 5, seed=3)
    b = sample_orbit(d, 5, seed=3)
    for m1, m2, s in zip(a.matrices, b.matrices, a.similarities):
        assert np.array_equal(m1, m2)
        assert eigenvalue_distance(np.linalg.eigvals(m1), d) <= 1e-6
        assert np.linalg.cond(s) <= a.conditioning_bound


def test_section44_report():
    rep = reproduce_section44()
    assert rep["passed"]
    for row in rep["results"]:
        assert row["max_abs_deviation"] <= 1e-3
        assert row["hermitian_residual"] <= 1e-8
        assert row["spectrum_error"] <= 1e-6


@pytest.mark.parametrize("lam", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_reflection_closed_form(lam):
    rep = reflection_oracle(1, r=4, lam=lam)
    assert rep["passed"]
    assert rep["reflection_residual"] <= 1e-10


def test_reflection_half_is_one_step():
    rep = reflection_oracle(2, lam=0.5)
    assert rep["one_step_error"] <= 1e-10


def test_reflection_rate_scaling():
    # independent check: Delta^n(E) = R L^(1/2)^n at lam = 0.25
    rep = reflection_oracle(4, r=2, lam=0.25, n_max=10)
    f = polar_decompose(rep["E"])
    closed = f.u @ psd_power(f.p, 0.5 ** 10)
    cur = rep["E"]
    for _ in range(10):
        cur = aluthge(cur, 0.25)
    assert frobenius_norm(cur - closed) <= 1e-9 * frobenius_norm(rep["E"])


def test_reflection_constancy_in_lambda():
    a = reflection_oracle(5, lam=0.1)
    b = reflection_oracle(5, lam=0.9)
    assert a["limit_error"] <= 1e-8 and b["limit_error"] <= 1e-8
    assert np.array_equal(a["R"], b["R"])


def test_reflection_rejects_normal(monkeypatch):
    import aluthge.experiments as ex
    monkeypatch.setattr(ex, "_reflection", lambda rng, r, p, c: np.diag([1.0, -1.0]))
    with pytest.raises(ConstructionFailed):
        ex.reflection_oracle(0, r=2)


def test_permutation_examples():
    rep = permutation_example(1, 1, 1)
    assert rep["passed"] and max(rep["limit_errors"]) == 0
    rep = permutation_example(2, 3, 1 / 6)
    assert rep["passed"]
    assert rep["dispersion"] <= 1e-7
    with pytest.raises(ValueError):
        permutation_example(2, 3, 1)


def test_two_eigenvalue_constancy_real_pair():
    rep = two_eigenvalue_constancy(2, -2, seed=0, samples=2)
    assert rep["passed"] and rep["max_dispersion"] <= 1e-6


def test_two_eigenvalue_constancy_complex_pair():
    z = np.exp(1j * np.pi / 3)
    rep = two_eigenvalue_constancy(z, z.conjugate(), n=2, k=2, seed=1, samples=1)
    assert rep["passed"]
    assert all(s["blockwise_limit_error"] <= 1e-8 for s in rep["samples"])


def test_two_eigenvalue_constancy_normal_input():
    rep = two_eigenvalue_constancy(1, -1, seed=0, samples=1, scale=0.0)
    assert rep["max_dispersion"] == 0.0


def test_block_reduction_oracle(rng):
    # T = d1 Q + d2 (I - Q) for an oblique projection Q
    s = np.eye(3) + 0.5 * cgauss(rng, (3, 3))
    t = s @ np.diag([1j, -1j, -1j]) @ np.linalg.inv(s)
    v, blocks, tail, residual = block_reduction(t, 1j, -1j)
    assert residual <= 1e-10
    assert len(blocks) == 1 and tail == 1
    assert frobenius_norm(v.conj().T @ v - np.eye(3)) <= 1e-12


def test_witness_mixed_moduli():
    rep = nonconstancy_witness([3, 1], seed=0, threshold=0.1, samples=10)
    assert rep["status"] == "WitnessFound"
    assert rep["dispersion"] > 0.1


def test_witness_equal_moduli_none():
    rep = nonconstancy_witness([1, -1], seed=0, threshold=1e-5, samples=5)
    assert rep["status"] == "NoWitnessFound"
    assert max(rep["dispersions_tried"]) <= 1e-5


def test_mixed_spectrum_constant_direct_sum(rng):
    # T1 in the orbit of diag(1, -1), padded with the eigenvalue 2
    s = np.eye(2) + 0.5 * cgauss(rng, (2, 2))
    t = np.zeros((3, 3), dtype=complex)
    t[:2, :2] = s @ np.diag([1.0, -1.0]) @ np.linalg.inv(s)
    t[2, 2] = 2.0
    assert r_map(t).dispersion <= 1e-6


def test_conjecture_probe_reports_evidence():
    rep = conjecture_probe(CUBE_ROOTS, samples=4, seed=7)
    assert rep["n_distinct"] == 3
    assert len(rep["dispersions"]) == 4
    assert rep["max_dispersion"] == max(rep["dispersions"])
    assert "passed" not in rep


def test_conjecture_probe_two_point_control():
    rep = conjecture_probe([1, -1, 1], samples=3, seed=1)
    assert rep["max_dispersion"] <= 1e-6


def test_conjecture_probe_rejects_mixed_moduli():
    with pytest.raises(ValueError):
        conjecture_probe([1, 2, 1j], samples=1)


def test_rate_fit_reflection():
    rep = reflection_oracle(3, r=2, lam=0.25)
    trace = iterate(rep["E"], 0.25)
    rho, r2 = rate_fit(trace, rep["R"])
    assert abs(rho - 0.5) <= 0.02
    assert r2 > 0.99


def test_rate_fit_near_diagonal():
    rng = np.random.default_rng(8)
    a = cgauss(rng, (2, 2))
    t = expm(1e-3 * a) @ np.diag([3.0, 1.0]) @ expm(-1e-3 * a)
    trace = iterate(t, 0.5)
    rho, _ = rate_fit(trace, reference_limit(trace))
    assert rho <= np.sqrt(3) / 2 + 0.05


def test_rate_fit_fixed_point():
    trace = iterate(np.diag([1.0, 2.0]), 0.5)
    with pytest.raises(InsufficientData):
        rate_fit(trace, np.diag([1.0, 2.0]))


def test_limit_contract_helper(rng):
    s = np.eye(3) + 0.4 * cgauss(rng, (3, 3))
    t = s @ np.diag([1.0, 2j, -0.5]) @ np.linalg.inv(s)
    rep = limit_contract(t, 0.4)
    assert rep["normality_defect"] <= 1e-9 * frobenius_norm(t)
    assert rep["spectrum_error"] <= 1e-6
