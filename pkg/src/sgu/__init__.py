"""Saturable global uncertainty for Gaussian and free-fermion quantum sensors.

The package computes the prior-weighted average of the inverse classical
Fisher information over a sensing window, minimized over a fixed measurement
setting, for bosonic Gaussian probes (thermometry, phase estimation) and for
the free-fermion transverse XY chain (magnetometry).
"""

__version__ = "0.1.0"

from .engine import (
    AverageResult,
    Axis,
    MeasurementSpace,
    Prior,
    SguResult,
    average_inverse_cfi,
    global_bound_G,
    minimize_sgu,
    sgu_with_nuisance,
)
from .errors import DomainError, NumericalError, SingularPointError
from .gaussian import (
    GaussianState,
    GeneralDyneMeasurement,
    ParametrizedFamily,
    cfi_gaussian,
    mean_photon_number,
    phase_encode,
    squeezed_thermal_covariance,
    squeezing_from_photons,
    thermal_covariance,
)

__all__ = [
    "AverageResult", "Axis", "MeasurementSpace", "Prior", "SguResult",
    "average_inverse_cfi", "global_bound_G", "minimize_sgu",
    "sgu_with_nuisance",
    "DomainError", "NumericalError", "SingularPointError",
    "GaussianState", "GeneralDyneMeasurement", "ParametrizedFamily",
    "cfi_gaussian", "mean_photon_number", "phase_encode",
    "squeezed_thermal_covariance", "squeezing_from_photons",
    "thermal_covariance",
]
