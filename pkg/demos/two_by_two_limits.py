"""
Limits of the lambda-Aluthge iteration for a 2x2 matrix
=======================================================

The iteration T -> |T|**lam U |T|**(1 - lam) converges to a normal matrix
with the same spectrum, but which normal matrix depends on lam.
"""
import numpy as np

from aluthge import iterate, r_map
from aluthge.experiments import SECTION44_MATRIX

np.set_printoptions(precision=4, suppress=True)
t = SECTION44_MATRIX
print("T =\n", t)

for lam in (0.3, 0.5, 0.7):
    trace = iterate(t, lam)
    print(f"\nlam = {lam}: {trace.n_steps} steps, stop = {trace.stop_reason.value}")
    print(trace.final.real)

# eigenvalues are 3 and 1 for every limit, yet the limits differ
scan = r_map(t)
print("\nspread of the limits over the default grid:", round(scan.dispersion, 4))
