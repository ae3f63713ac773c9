"""
When does the limit not depend on lam?
======================================

For two distinct eigenvalues of equal modulus the limit is the same for
every lam. With distinct moduli it usually is not. For three cube roots of
unity the question is open, so we only collect numbers.
"""
import numpy as np

from aluthge.experiments import (
    CUBE_ROOTS,
    conjecture_probe,
    nonconstancy_witness,
    two_eigenvalue_constancy,
)

rep = two_eigenvalue_constancy(2, -2, seed=0, samples=5)
print("eigenvalues 2, -2: max spread over lam", f"{rep['max_dispersion']:.1e}")

rep = nonconstancy_witness([3, 1], seed=0, threshold=0.1)
print("eigenvalues 3, 1:", rep["status"], f"spread {rep.get('dispersion', 0):.3f}")

rep = conjecture_probe(CUBE_ROOTS, samples=10, seed=0)
print("cube roots of unity, spreads:", np.round(rep["dispersions"], 8))
