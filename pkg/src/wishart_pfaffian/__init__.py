"""Exact extreme-eigenvalue densities of real Wishart matrices via Pfaffians."""

from .errors import (
    ConvergenceError,
    DomainError,
    IntegrationError,
    ParameterError,
    StructuralError,
    UnsupportedScaleError,
    ValidationError,
    WishartError,
)
from .extremes import (
    DensityCurve,
    assemble_skew_largest,
    assemble_skew_smallest,
    aug_entry_largest,
    aug_entry_smallest,
    evaluate_curve,
    kernel_entry_largest,
    kernel_entry_smallest,
    log_pdf,
    pdf_largest,
    pdf_smallest,
)
from .logvalue import SignedLogValue, signed_logsumexp
from .model import (
    KernelIndex,
    ModelParams,
    exponent_r,
    joint_density,
    log_norm_constant,
    theta,
    vandermonde_det,
    xi,
)
from .pfaffian import SkewMatrix, congruence_scale, pfaffian
from .quadrature import QuadSpec, integrate_finite, integrate_semi_infinite
from .special import log_gamma, log_multivariate_gamma, reg_lower_gamma, reg_upper_gamma
from .validation import (
    EmpiricalSample,
    brute_force_pdf,
    ks_statistic,
    sample_extreme_eigs,
)

__version__ = "0.1.0"
