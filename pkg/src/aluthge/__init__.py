"""
The lambda-Aluthge transform ``|T|**lam U |T|**(1 - lam)``, its iteration to
a normal limit, and the derivative of the transform at normal fixed points.
"""
from .exceptions import *  # noqa: F401,F403
from .linalg import (
    PolarFactors,
    Spectrum,
    char_poly,
    frobenius_inner,
    frobenius_norm,
    hermitian_eig,
    is_diagonalizable,
    normality_defect,
    polar_decompose,
    psd_power,
    spectrum,
)
from .tangent import (
    DerivativeModel,
    DiagonalPoint,
    build_model,
    derivative_apply,
    derivative_fd,
    k_constant,
    q_projection,
    stable_projection_apply,
    stable_projection_block,
)
from .transform import (
    IterationTrace,
    LambdaScan,
    StopPolicy,
    StopReason,
    aluthge,
    duggal,
    iterate,
    limit,
    r_map,
    split_singular,
)

__version__ = "0.1.0"
