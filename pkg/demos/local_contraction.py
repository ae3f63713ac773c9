"""
Local behaviour near a diagonal fixed point
===========================================

The derivative of the transform at D = diag(d) acts by Hadamard products.
On the orbit directions it contracts with constant k(d, lam), and a
perturbation of D converges back at about that rate.
"""
import numpy as np
from scipy.linalg import expm

from aluthge import iterate
from aluthge.experiments import rate_fit, reference_limit
from aluthge.tangent import (
    DiagonalPoint,
    build_model,
    compressed_derivative_norm,
    derivative_apply,
    derivative_fd,
    k_constant,
)

d = np.array([3.0, 1.0])
lam = 0.5
point = DiagonalPoint(d)
rng = np.random.default_rng(1)

x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
x[point.same_mask()] = 0
exact = derivative_apply(point, lam, x)
approx = derivative_fd(point, lam, x, 1e-5)
print("derivative vs finite differences:", f"{np.linalg.norm(exact - approx):.1e}")

k = k_constant(d, lam)
print("k(d, lam) =", round(k, 4), " norm on orbit directions =",
      round(compressed_derivative_norm(d, lam), 4))

# perturb D along its similarity orbit and watch the rate
a = rng.standard_normal((2, 2))
t = expm(1e-3 * a) @ np.diag(d) @ expm(-1e-3 * a)
trace = iterate(t, lam)
rho, r2 = rate_fit(trace, reference_limit(trace))
print(f"observed rate {rho:.4f} (fit r^2 {r2:.3f}), bound {k:.4f}")

# H2 is what pushes orbit directions off the orbit
model = build_model(point, lam)
print("H =\n", np.round(model.H, 4))
print("G =\n", np.round(model.G, 4))
