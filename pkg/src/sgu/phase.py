"""Global phase estimation with single-mode Gaussian probes.

Covers the three probe families with closed-form CFIs (displaced vacuum,
squeezed vacuum, squeezed thermal) and their window-averaged optimization
over the measurement squeezing (s_m directly for the squeezed families,
compactified through t = tanh(s_m) for the displaced-vacuum probe).
"""

import math
from dataclasses import dataclass

import numpy as np

from .engine import Axis, MeasurementSpace, Prior, average_inverse_cfi, minimize_sgu
from .errors import DomainError
from .gaussian import mean_photon_number, squeezing_from_photons

#: Hard cap on the measurement squeezing; beyond this the landscape is flat
#: to double precision and e^(2 s_m) risks overflow in intermediates.
S_M_CAP = 20.0

DEFAULT_LAMBDA0 = math.pi / 8


@dataclass
class PhaseProbeSpec:
    """One of the three named probe preparations."""

    d0: float = 0.0
    s: float = 0.0
    psi: float = 0.0
    theta: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        if self.d0 < 0 or self.s < 0 or self.n_th < 0:
            raise DomainError("d0, s and n_th must be nonnegative")
        if self.d0 > 0 and (self.s > 0 or self.n_th > 0):
            raise DomainError("combined displaced-squeezed-thermal probes are "
                              "not supported")

    @property
    def mean_photons(self):
        return mean_photon_number(self.d0, self.s, self.n_th)


def s_m_from_t(t):
    """Invert the compactification t = tanh(s_m), capped at S_M_CAP."""
    if t < 0 or t > 1:
        raise DomainError("t must lie in [0, 1]")
    if t >= math.tanh(S_M_CAP):
        return S_M_CAP
    return math.atanh(t)


def cfi_displaced_vacuum(d0, chi, s_m):
    """F_c = 4 d0^2 (1 - tanh(s_m) cos(chi)) for a displaced-vacuum probe."""
    if d0 <= 0:
        raise DomainError("degenerate probe: d0 = 0 has identically zero CFI")
    if s_m < 0:
        raise DomainError("s_m must be nonnegative")
    chi = np.asarray(chi, dtype=float)
    return 4.0 * d0 * d0 * (1.0 - math.tanh(s_m) * np.cos(chi))


def sgu_displaced_vacuum(chi0, delta, d0, grid_points=64, rtol=1e-8):
    """Window-averaged optimization over t = tanh(s_m) for displaced vacuum.

    chi0 is the window-center value of chi = 2 theta - 2 lambda - psi_m; chi
    sweeps chi0 -+ delta as lambda sweeps the window.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    prior = Prior.uniform(0.0, delta)

    def cfi(lam, t):
        if d0 <= 0:
            raise DomainError("degenerate probe: d0 = 0")
        return 4.0 * d0 * d0 * (1.0 - t * np.cos(chi0 - 2.0 * lam))

    space = MeasurementSpace([Axis("t", 0.0, 1.0, prefer_high=True)])
    res = minimize_sgu(cfi, space, prior, grid_points=grid_points, rtol=rtol)
    _attach_s_m(res)
    return res


def _attach_s_m(res):
    t = res.params.get("t")
    if t is not None and not math.isnan(t):
        res.params["s_m"] = s_m_from_t(t)
        res.flags["homodyne_limit"] = t >= math.tanh(S_M_CAP)


def cfi_sv(n, s_m, chi, s):
    """Squeezed-vacuum/thermal phase CFI, algebraically stabilized.

    Equivalent to the printed quotient (see cfi_sv_direct) but with the
    hyperbolic identities applied so no large-argument cancellation occurs:

        F = 4 (2n+1)^2 tanh^2(2s) (D + 2 sinh^2(2 s_m) sin^2 chi) / D^2
        D = (4n+2) (cosh(2 s_m) - sinh(2 s_m) cos(chi) tanh(2s))
            + 1 + (2n+1)^2 sech^2(2s)
    """
    if np.any(np.asarray(n) < 0) or s < 0 or s_m < 0:
        raise DomainError("n, s and s_m must be nonnegative")
    n = np.asarray(n, dtype=float)
    chi = np.asarray(chi, dtype=float)
    t2s = math.tanh(2 * s)
    b = (2 * n + 1) ** 2 / math.cosh(2 * s) ** 2
    ch, sh = math.cosh(2 * s_m), math.sinh(2 * s_m)
    # ch - sh*y rewritten as ch*(1-y) + y*e^(-2 s_m) to avoid cancellation
    # when y -> 1 at large s_m
    y = np.cos(chi) * t2s
    d = (4 * n + 2) * (ch * (1.0 - y) + y * math.exp(-2 * s_m)) + 1.0 + b
    return 4.0 * (2 * n + 1) ** 2 * t2s**2 * (d + 2.0 * sh * sh * np.sin(chi) ** 2) / (d * d)


def cfi_sv_direct(n, s_m, chi, s):
    """The squeezed-vacuum CFI quotient exactly as printed; unstable for
    large s_m, kept as the cross-check path."""
    chi = np.asarray(chi, dtype=float)
    a = 4 * n + 2
    b = (2 * n + 1) ** 2 / math.cosh(2 * s) ** 2
    ch, sh = math.cosh(2 * s_m), math.sinh(2 * s_m)
    t2s = math.tanh(2 * s)
    num = a * ch + ch * ch + b - sh * (np.cos(2 * chi) * sh + a * np.cos(chi) * t2s)
    den = a * ch + ch * ch + b - sh * (sh + a * np.cos(chi) * t2s)
    return 4.0 * (2 * n + 1) ** 2 * t2s**2 * num / den**2


def total_photons_st(s, n_thermal):
    """Mean photon number of a squeezed thermal state."""
    return (n_thermal + 0.5) * math.cosh(2 * s) - 0.5


def cfi_st(n_thermal, s, s_m, chi, squeezing_photons=None):
    """Squeezed-thermal phase CFI: the SV quotient with n the total photons.

    With n taken as the state's total mean photon number the quotient agrees
    exactly with the generic Gaussian CFI for a squeezed thermal probe.  Pass
    squeezing_photons to use the literal n = squeezing_photons + n_thermal
    reading instead.
    """
    if np.any(np.asarray(n_thermal) < 0):
        raise DomainError("n_thermal must be nonnegative")
    if squeezing_photons is None:
        n = (np.asarray(n_thermal, dtype=float) + 0.5) * math.cosh(2 * s) - 0.5
    else:
        n = squeezing_photons + n_thermal
    return cfi_sv(n, s_m, chi, s)


def _sv_sgu(lam0, delta, cfi_of_chi, grid_points, rtol, optimize_probe_phase):
    prior = Prior.uniform(lam0, delta)
    axes = [Axis("s_m", 0.0, S_M_CAP, prefer_high=True)]
    if optimize_probe_phase:
        axes.append(Axis("psi", 0.0, 2 * math.pi))

    def cfi(lam, s_m, psi=0.0):
        return cfi_of_chi(s_m, 2.0 * lam - psi)

    res = minimize_sgu(cfi, MeasurementSpace(axes), prior,
                       grid_points=grid_points, rtol=rtol)
    s_m = res.params.get("s_m")
    if s_m is not None and not math.isnan(s_m):
        res.flags["homodyne_limit"] = s_m >= S_M_CAP - 1e-9
    return res


def sgu_sv(lam0, delta, s, optimize_probe_phase=False, grid_points=64, rtol=1e-8):
    """SGU of a squeezed-vacuum probe, minimized over s_m in [0, S_M_CAP].

    With optimize_probe_phase the preparation squeezing phase psi is included
    as a second optimization axis (phases enter only through
    chi = 2 lambda - psi + psi_m; psi_m is fixed at 0).
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    if not s > 0:
        raise DomainError("squeezed-vacuum probe needs s > 0")
    n = (math.cosh(2 * s) - 1.0) / 2.0
    return _sv_sgu(lam0, delta, lambda s_m, chi: cfi_sv(n, s_m, chi, s),
                   grid_points, rtol, optimize_probe_phase)


def sgu_sv_from_photons(lam0, delta, n, **kw):
    """sgu_sv parameterized by the probe's mean photon number."""
    return sgu_sv(lam0, delta, squeezing_from_photons(n), **kw)


def sgu_st(lam0, delta, s, n_thermal, grid_points=64, rtol=1e-8):
    """SGU of a squeezed-thermal probe; phases held at psi = psi_m = 0."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    return _sv_sgu(lam0, delta,
                   lambda s_m, chi: cfi_st(n_thermal, s, s_m, chi),
                   grid_points, rtol, optimize_probe_phase=False)


def averaged_uncertainty_sv(lam0, delta, s, s_m, rtol=1e-8):
    """Window average of 1/F for a fixed measurement squeezing s_m."""
    n = (math.cosh(2 * s) - 1.0) / 2.0
    prior = Prior.uniform(lam0, delta)
    return average_inverse_cfi(lambda lam: cfi_sv(n, s_m, 2.0 * lam, s),
                               prior, rtol=rtol)


def measurement_comparison_curve(delta, n_grid, lam0=DEFAULT_LAMBDA0,
                                 grid_points=64, rtol=1e-8):
    """Averaged uncertainty of optimal / homodyne-cap / heterodyne vs n.

    Returns a list of dicts with keys n, n_prime, G_opt, G_homodyne,
    G_heterodyne, s_m_opt; diverged entries hold NaN.
    """
    rows = []
    for n in n_grid:
        s = squeezing_from_photons(n)
        opt = sgu_sv(lam0, delta, s, grid_points=grid_points, rtol=rtol)
        hom = averaged_uncertainty_sv(lam0, delta, s, S_M_CAP, rtol=rtol)
        het = averaged_uncertainty_sv(lam0, delta, s, 0.0, rtol=rtol)
        rows.append({
            "n": n,
            "n_prime": n - 0.5,
            "G_opt": math.nan if opt.diverged else opt.value,
            "G_homodyne": math.nan if hom.diverged else hom.value,
            "G_heterodyne": math.nan if het.diverged else het.value,
            "s_m_opt": opt.params.get("s_m", math.nan),
        })
    return rows


def fit_loglog_slope(x, y):
    """Least-squares slope of log y vs log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
