"""Single-mode equilibrium Gaussian thermometry.

Closed-form CFI over general-dyne measurements parameterized by r_m in [0, 1],
the homodyne/heterodyne transition maps, and the finite-resolution photon
counter comparison.
"""

import math
from dataclasses import dataclass

import numpy as np

from .engine import Axis, MeasurementSpace, Prior, SguResult, average_inverse_cfi, minimize_sgu
from .errors import DomainError

COUNTER_CAP = 10_000  # above this the Gaussian optimum is declared unbeaten
GAUSSIAN_OPTIMAL = -1  # sentinel returned when the cap is exceeded


@dataclass
class ThermometryConfig:
    T0: float
    delta: float

    def __post_init__(self):
        if not self.T0 > 0:
            raise DomainError("T0 must be positive")
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if self.T0 - 0.5 * self.delta < 0:
            raise DomainError("temperature window must stay nonnegative")
        if self.delta / self.T0 > 2 + 1e-12:
            raise DomainError("relative width delta/T0 must not exceed 2")


def nu_of_T(T):
    """Thermal symplectic eigenvalue coth(1/(2T)), vectorized."""
    T = np.asarray(T, dtype=float)
    return 1.0 / np.tanh(0.5 / T)


def dnu_dT(T):
    """d nu / d T = 1 / (2 T^2 sinh^2(1/(2T))), vectorized.

    Written as 2 e^(-1/T) / (T^2 (1 - e^(-1/T))^2): free of both the sinh
    overflow at small T and the coth^2 - 1 cancellation.
    """
    T = np.asarray(T, dtype=float)
    e = np.exp(-1.0 / T)
    return 2.0 * e / (T * T * np.expm1(-1.0 / T) ** 2)


def cfi_thermometry(T, r_m):
    """CFI of the general-dyne diag(r_m, 1/r_m) on a thermal state.

    F_c = (d nu/dT)^2 / 2 * [1/(nu + r_m)^2 + 1/(nu + 1/r_m)^2]; r_m = 0 uses
    the analytic homodyne limit where the second bracket term vanishes.
    """
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise DomainError("temperature must be positive")
    if not 0 <= r_m <= 1:
        raise DomainError("r_m must lie in [0, 1]")
    nu = nu_of_T(T)
    dnu = dnu_dT(T)
    bracket = 1.0 / (nu + r_m) ** 2
    if r_m > 0:
        bracket = bracket + 1.0 / (nu + 1.0 / r_m) ** 2
    return 0.5 * dnu * dnu * bracket


def measurement_space():
    return MeasurementSpace([Axis("r_m", 0.0, 1.0)])


def sgu_thermometry(T0, delta, grid_points=64, rtol=1e-8):
    """Minimize the window-averaged inverse CFI over r_m in [0, 1]."""
    ThermometryConfig(T0, delta)
    prior = Prior.uniform(T0, delta)
    return minimize_sgu(lambda T, r_m: cfi_thermometry(T, r_m),
                        measurement_space(), prior,
                        grid_points=grid_points, rtol=rtol)


def transition_map(T0_grid, delta_rel_grid, grid_points=64, rtol=1e-8):
    """Sweep sgu_thermometry over (T0, delta/T0); row-major in T0.

    Returns (r_opt, sgu) matrices of shape (len(T0_grid), len(delta_rel_grid));
    diverged cells hold NaN in both.
    """
    r_opt = np.full((len(T0_grid), len(delta_rel_grid)), np.nan)
    sgu = np.full_like(r_opt, np.nan)
    for i, T0 in enumerate(T0_grid):
        for j, rel in enumerate(delta_rel_grid):
            res = sgu_thermometry(T0, rel * T0, grid_points=grid_points, rtol=rtol)
            if not res.diverged:
                r_opt[i, j] = res.params["r_m"]
                sgu[i, j] = res.value
    return r_opt, sgu


def mean_occupation(T):
    """Bose occupation 1/(e^(1/T) - 1)."""
    T = np.asarray(T, dtype=float)
    return 1.0 / np.expm1(1.0 / T)


def fock_probabilities(T, cutoff):
    """Thermal Fock probabilities p_n for n < cutoff plus the tail mass."""
    if np.any(np.asarray(T) <= 0):
        raise DomainError("temperature must be positive")
    if cutoff < 1:
        raise DomainError("cutoff must be at least 1")
    nbar = float(mean_occupation(T))
    n = np.arange(cutoff)
    # p_n = nbar^n / (nbar+1)^(n+1), evaluated in logs for large cutoffs
    if nbar == 0.0:
        p = np.zeros(cutoff)
        p[0] = 1.0
        tail = 0.0
    else:
        logp = n * math.log(nbar) - (n + 1) * math.log(nbar + 1.0)
        p = np.exp(logp)
        tail = math.exp(cutoff * (math.log(nbar) - math.log(nbar + 1.0)))
    return p, tail


def counter_cfi(T, m0):
    """CFI of a photon counter resolving Fock levels 0 .. m0-1 plus a tail."""
    if m0 < 1:
        raise DomainError("m0 must be at least 1")
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise DomainError("temperature must be positive")
    scalar = T.ndim == 0
    T = np.atleast_1d(T)
    nbar = mean_occupation(T)
    dnbar = nbar * (nbar + 1.0) / (T * T)  # d nbar / dT, overflow-safe
    n = np.arange(m0)[:, None]
    ratio = nbar / (nbar + 1.0)
    p = ratio**n / (nbar + 1.0)
    # d p_n / d nbar = p_n * (n/nbar - (n+1)/(nbar+1)); the n/nbar term is
    # written as n * nbar^(n-1)/(nbar+1)^(n+1) to stay finite at n = 0
    dp = n * ratio ** np.maximum(n - 1, 0) / (nbar + 1.0) ** 2 * (n > 0) \
        - (n + 1) * p / (nbar + 1.0)
    tail = ratio**m0
    dtail = m0 * ratio ** (m0 - 1) / (nbar + 1.0) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, dp * dp / p, 0.0)
        tail_term = np.where(tail > 0.0, dtail * dtail / tail, 0.0)
    fisher = (np.sum(terms, axis=0) + tail_term) * dnbar * dnbar
    return float(fisher[0]) if scalar else fisher


def fock_cfi(T):
    """CFI of the ideal photon counter: (d nbar/dT)^2 / (nbar (nbar + 1))."""
    T = np.asarray(T, dtype=float)
    nbar = mean_occupation(T)
    return nbar * (nbar + 1.0) / T**4


def counter_average_uncertainty(T0, delta, m0, rtol=1e-8):
    """Window-averaged inverse CFI of an m0-level counter."""
    prior = Prior.uniform(T0, delta)
    return average_inverse_cfi(lambda T: counter_cfi(T, m0), prior, rtol=rtol)


def minimal_outperforming_levels(T0, delta, cap=COUNTER_CAP, rtol=1e-8):
    """Smallest m0 whose counter beats the optimal Gaussian measurement.

    Linear search with doubling acceleration past m0 = 64; returns the
    GAUSSIAN_OPTIMAL sentinel when the cap is exceeded (or the Gaussian
    average itself diverges).
    """
    gauss = sgu_thermometry(T0, delta, rtol=rtol)
    if gauss.diverged:
        return GAUSSIAN_OPTIMAL

    def beats(m0):
        avg = counter_average_uncertainty(T0, delta, m0, rtol=rtol)
        return (not avg.diverged) and avg.value < gauss.value

    m0 = 1
    while m0 <= 64:
        if beats(m0):
            return m0
        m0 += 1
    while m0 <= cap:
        if beats(m0):
            # first success past the doubling ramp: bisect back to the edge
            lo, hi = m0 // 2 + 1, m0
            while lo < hi:
                mid = (lo + hi) // 2
                if beats(mid):
                    hi = mid
                else:
                    lo = mid + 1
            return lo
        m0 *= 2
    return GAUSSIAN_OPTIMAL
