"""Momentum ray transforms of symmetric tensor fields.

Forward/adjoint/normal operators for the momentum ray transforms, an
explicit reconstruction pipeline from normal-operator data, Fourier-side
consistency diagnostics, and an exact-arithmetic kernel that verifies every
tensor identity the inversion formula rests on.
"""

from .coeffs import (
    beta_closed,
    beta_recurrence,
    binom_ext,
    c_coeff,
    double_factorial,
    f_factor,
    h_factor,
)
from .gridfield import (
    FourierField,
    GridSpec,
    GridTensorField,
    apply_D,
    frac_laplacian,
    gaussian_phantom,
    load_field,
    rel_error,
    save_field,
)
from .inversion import (
    InversionConfig,
    ReconReport,
    consistency_residual,
    fourier_system_residual,
    invert_full,
    invert_m1,
    invert_m2,
    normal_data,
)
from .raytransform import (
    LineSet,
    Sinogram,
    adjoint,
    forward,
    load_sinogram,
    make_lineset,
    normal_compose,
    normal_divergence,
    normal_kernel,
    save_sinogram,
    slice_residual,
)
from .symtensor import SymTensor, sym_dim, symmetrize

__version__ = "0.1.0"
