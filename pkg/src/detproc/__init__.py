"""Determinantal point processes with Whittaker and generalized sine kernels.

Kernel evaluation, Fredholm determinants and gap probabilities, exact
DPP sampling, tail-process asymptotics, and the commuting
Sturm-Liouville operators, behind an HTTP service and a CLI.
"""

from .asymptotics import (
    TailTransform,
    counting_lln,
    decay_rate_estimate,
    expected_alpha_sum,
    expected_beta_sum,
    lln_square_integral,
    tail_convergence_check,
    tail_transform_apply,
)
from .errors import (
    AccuracyWarning,
    DetprocError,
    DomainError,
    InsufficientPointsError,
    NumericalError,
    PoleError,
    SeriesClassificationError,
    TruncationError,
)
from .kernels import (
    AdmissibilityResult,
    KernelSpec,
    LaguerreCDKernel,
    SineKernel,
    SpectralParams,
    StationaryKernel,
    TailConstants,
    WhittakerKernel,
    admissible,
    classify_series,
    fourier_khat,
    fourier_khat_numeric,
    laguerre_cd_kernel,
    sine_kernel,
    stationary_kernel,
    tail_constants,
    whittaker_kernel,
)
from .operators import (
    DiscretizedOperator,
    Region,
    alpha1_cdf,
    correlation,
    fdd_pi,
    fredholm_det,
    fredholm_det_converged,
    gap_probability,
    nystrom,
    resolvent_kernel,
)
from .sampler import (
    EmpiricalStats,
    PointConfiguration,
    ThomaPoint,
    empirical_statistics,
    lift,
    sample_dpp,
    sample_dpp_many,
    sample_poisson_dirichlet,
)
from .specfun import (
    QuadratureRule,
    digamma,
    laguerre,
    log_gamma,
    make_quadrature,
    whittaker_w,
    whittaker_w_prime,
)
from .sturm import (
    SLCoefficients,
    commutation_residual,
    sl_params_sine,
    sl_params_stationary,
    sl_params_whittaker,
)

__version__ = "0.1.0"
