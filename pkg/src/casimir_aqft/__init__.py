"""Massless scalar field between Dirichlet plates: image-method two-point
functions, propagators, point-split observables and the field algebra."""

from ._numerics import AccuracyError, DomainError
from .algebra import (PairingKind, RegularFunctional, ccr_causality_check, generator,
                      sigma_c_pairing, star_product, symplectic_witness)
from .boundary import (BoundaryState, ImageSeriesConfig, boundary_kernel, casimir_kernel_closed,
                       casimir_kernel_series, casimir_pairing, casimir_propagator, cp_kernel,
                       cp_propagator, half_space_pairing, hypothesis_check, image_series,
                       kms_condition_check, mode_coefficients, positivity_form, slab_kernel)
from .fields import (FunctionSum, Geometry, PeriodicizedFunction, Point4, TestFunction,
                     image_N, isometry_apply, make_bump, noninjectivity_witness)
from .kernels import (SmearedValue, StateSpec, causal_pairing, hadamard_parametrix,
                      kirchhoff_apply, kirchhoff_pairing, kms_kernel, smear2, vacuum_kernel)
from .observables import (density_profile, reference_formulas, smear_density, stress_density,
                          stress_tensor, stress_tensor_fd, wick_square_density)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
