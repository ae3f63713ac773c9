"""
Reflections: an iteration with a closed form
============================================

If E**2 = I and E = R L is its left polar decomposition, the n-th iterate
is R L**((1 - 2 lam)**n). At lam = 1/2 the limit is reached in one step.
"""
import numpy as np

from aluthge.experiments import reflection_oracle

for lam in (0.1, 0.25, 0.5, 0.9):
    rep = reflection_oracle(seed=0, r=3, lam=lam)
    print(f"lam = {lam:4}: worst closed-form error {rep['max_closed_form_error']:.2e}, "
          f"steps to converge {rep['n_steps']}")

rep = reflection_oracle(seed=0, r=3, lam=0.5)
print("\none step at lam = 1/2 lands on R, error", f"{rep['one_step_error']:.1e}")
print("R is a unitary reflection:", np.allclose(rep["R"] @ rep["R"], np.eye(3)))
