"""Learning curves for dot-product kernel ridge regression on spheres.

Closed-form bias/variance curves in the polynomial sample-scaling regimes,
Monte Carlo kernel-regression simulation, and Marchenko-Pastur checks of
empirical Gram spectra.
"""

from .curves import (
    LearningCurve,
    SpectralProfile,
    bias_r,
    err_r,
    learning_curve,
    local_maxima,
    variance_r,
)
from .harmonics import (
    Dataset,
    Geometry,
    GeometryError,
    harmonic_dim,
    legendre,
    legendre_gram,
    legendre_series,
    sample_sphere,
)
from .rmt import (
    CLOSED_FORM,
    QUADRATURE,
    EffectiveRegime,
    MarchenkoPastur,
    QuadratureError,
    SingularRegimeError,
    ZetaConsistencyError,
    chi_b,
    chi_v,
    effective_regime,
    mp_cdf,
    mp_expect,
    mp_pdf,
    zeta,
    zeta_check,
)
from .sim import (
    DegenerateTargetError,
    FactorizationError,
    MseResult,
    SpectrumResult,
    TargetFunction,
    build_kernel,
    empirical_mse,
    empirical_spectrum,
    krr_predict,
    ks_distance,
    ridge_solve,
    sample_target,
)

__version__ = "0.1.0"
