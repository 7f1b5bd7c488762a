"""Prior-averaged inverse Fisher information and its minimization.

The central quantity is the prior-weighted average of 1/F_c over the sensing
window, evaluated for a fixed measurement setting and then minimized over a
small box of measurement parameters.  Minimization is deterministic: a coarse
grid scan followed by golden-section refinement along each axis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .quadrature import adaptive_quad

#: When quadrature fails to converge, a sampled Fisher information this far
#: below the window maximum identifies the failure as a 1/F pole (divergent
#: average) rather than a tolerance problem.
DIVERGENCE_RATIO = 1e-12
#: Below this the Fisher information is treated as an exact zero.
F_FLOOR = 1e-300

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class Prior:
    """Normalized density over [center - width/2, center + width/2]."""

    center: float
    width: float
    density: object = None
    kind: str = "uniform"

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("prior width must be positive")
        if self.density is None:
            w = self.width
            self.density = lambda lam: np.full_like(np.asarray(lam, float), 1.0 / w)
            self.kind = "uniform"
        else:
            self.kind = "custom"
            self._check_normalization()

    @property
    def lo(self):
        return self.center - 0.5 * self.width

    @property
    def hi(self):
        return self.center + 0.5 * self.width

    def _check_normalization(self):
        res = adaptive_quad(self.density, self.lo, self.hi, rtol=1e-10)
        if abs(res.value - 1.0) > 1e-8:
            raise ValueError(f"prior density integrates to {res.value}, not 1")

    @classmethod
    def uniform(cls, center, width):
        return cls(center=center, width=width)

    @classmethod
    def point(cls, value):
        """Degenerate (zero-width) prior, used for nuisance parameters."""
        p = cls.__new__(cls)
        p.center = value
        p.width = 0.0
        p.density = None
        p.kind = "point"
        return p


@dataclass
class Axis:
    """One bounded measurement-parameter axis (already compactified)."""

    name: str
    lo: float
    hi: float
    prefer_high: bool = False  # tie-breaking direction on flat landscapes

    def grid(self, n):
        g = np.linspace(self.lo, self.hi, n)
        return g[::-1] if self.prefer_high else g


@dataclass
class MeasurementSpace:
    """A 1-3 dimensional box of measurement parameters."""

    axes: list

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 3:
            raise ValueError("measurement space must have 1-3 axes")

    @property
    def names(self):
        return [ax.name for ax in self.axes]


@dataclass
class AverageResult:
    """Prior-weighted average of an inverse Fisher information."""

    value: float
    error: float
    n_nodes: int
    diverged: bool = False


@dataclass
class SguResult:
    value: float
    params: dict
    diverged: bool = False
    n_nodes: int = 0
    error: float = 0.0
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.diverged and not self.value > 0:
            raise ValueError("SGU value must be positive unless diverged")


class _BlindMeasurement(Exception):
    pass


def _averaged_inverse(f, prior, rtol, atol, max_depth):
    """Shared core of average_inverse_cfi / global_bound_G."""
    seen = {"min": math.inf, "max": 0.0}

    def integrand(lam):
        fc = np.asarray(f(lam), dtype=float)
        if np.any(~np.isfinite(fc)) or np.any(fc < 0):
            raise NumericalError("Fisher information evaluated to an invalid value")
        lo = float(fc.min())
        seen["min"] = min(seen["min"], lo)
        seen["max"] = max(seen["max"], float(fc.max()))
        # F below the floor is an exact zero in double precision: the
        # measurement is blind at this window point and the average diverges
        if lo < F_FLOOR:
            raise _BlindMeasurement
        return prior.density(lam) / fc

    try:
        res = adaptive_quad(integrand, prior.lo, prior.hi,
                            rtol=rtol, atol=atol, max_depth=max_depth)
    except _BlindMeasurement:
        return AverageResult(value=math.inf, error=math.inf, n_nodes=0, diverged=True)
    except NumericalError:
        # non-convergence around a point where F collapses relative to the
        # rest of the window is an unresolvable 1/F pole, not a tolerance
        # problem; everything else is a genuine numerical failure
        if seen["min"] < DIVERGENCE_RATIO * seen["max"]:
            return AverageResult(value=math.inf, error=math.inf, n_nodes=0, diverged=True)
        raise
    return AverageResult(value=res.value, error=res.error, n_nodes=res.n_nodes)


def average_inverse_cfi(cfi, prior, rtol=1e-8, atol=1e-14, max_depth=30):
    """Average 1/F_c over the prior window for a fixed measurement.

    cfi must map an array of parameter values to an array of Fisher
    informations.  Returns a diverged AverageResult when the measurement is
    blind (F_c vanishing relative to its window maximum) somewhere inside.
    """
    return _averaged_inverse(cfi, prior, rtol, atol, max_depth)


def global_bound_G(qfi, prior, rtol=1e-8, atol=1e-14, max_depth=30):
    """Prior-weighted average of 1/F_Q: the generally unsaturable bound."""
    return _averaged_inverse(qfi, prior, rtol, atol, max_depth)


def _golden_section(f, a, b, tol, prefer_high=False):
    """Minimize a unimodal scalar function on [a, b].

    Exact ties shrink toward the high end when prefer_high is set, so a flat
    landscape resolves to the axis' preferred side instead of drifting low.
    """
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2 or (f1 == f2 and not prefer_high):
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def minimize_sgu(cfi, space, prior, grid_points=64, param_tol=1e-6,
                 boundary_tol=1e-4, rtol=1e-8):
    """Minimize the averaged inverse CFI over a measurement-parameter box.

    cfi maps (lam_array, *params) to an array of Fisher informations.
    Strategy: full-factorial coarse grid, then golden-section coordinate
    descent started from the few best non-neighbouring cells.  Parameters
    that refine to within boundary_tol of a box edge are snapped onto it.
    """
    cache = {}

    def objective(params):
        key = tuple(params)
        if key not in cache:
            avg = average_inverse_cfi(lambda lam: cfi(lam, *params), prior, rtol=rtol)
            cache[key] = avg
        return cache[key]

    grids = [ax.grid(grid_points) for ax in space.axes]
    scanned = []  # (value, params) over the full factorial grid
    for idx in np.ndindex(*[len(g) for g in grids]):
        params = [grids[d][i] for d, i in enumerate(idx)]
        avg = objective(params)
        if not avg.diverged:
            scanned.append((avg.value, params))

    if not scanned:
        return SguResult(value=math.inf, params={ax.name: math.nan for ax in space.axes},
                         diverged=True)

    step = [(ax.hi - ax.lo) / (grid_points - 1) for ax in space.axes]

    # multi-start: the landscape can hold several basins, so refine from the
    # best few grid cells that are not immediate neighbours of a better one
    scanned.sort(key=lambda t: t[0])
    starts = []
    for _, params in scanned:
        if any(all(abs(params[d] - s[d]) <= step[d] * (1 + 1e-9)
                   for d in range(len(step))) for s in starts):
            continue
        starts.append(params)
        if len(starts) == 4:
            break

    def value_at(params):
        avg = objective(params)
        return math.inf if avg.diverged else avg.value

    def refine(start):
        cur = list(start)
        for _ in range(12):
            moved = 0.0
            for d, ax in enumerate(space.axes):
                def f1d(x, d=d):
                    p = list(cur)
                    p[d] = x
                    return value_at(p)

                # golden-section around the current point; when the minimizer
                # runs into a bracket edge, double the bracket and retry so a
                # descent path longer than one grid step can be followed
                half = step[d]
                for _expand in range(8):
                    lo = max(ax.lo, cur[d] - half)
                    hi = min(ax.hi, cur[d] + half)
                    x_star = _golden_section(f1d, lo, hi, param_tol,
                                             prefer_high=ax.prefer_high)
                    on_lo = x_star <= lo + param_tol and lo > ax.lo
                    on_hi = x_star >= hi - param_tol and hi < ax.hi
                    if not (on_lo or on_hi):
                        break
                    cur[d] = x_star
                    half *= 2.0
                if f1d(x_star) <= f1d(cur[d]):
                    moved = max(moved, abs(x_star - cur[d]))
                    cur[d] = x_star
            if moved < param_tol:
                break
        return cur

    best_params, best_val = None, math.inf
    for start in starts:
        cand = refine(start)
        val = value_at(cand)
        if val < best_val or best_params is None:
            best_val, best_params = val, cand

    for d, ax in enumerate(space.axes):
        if abs(best_params[d] - ax.lo) < boundary_tol:
            best_params[d] = ax.lo
        elif abs(best_params[d] - ax.hi) < boundary_tol:
            best_params[d] = ax.hi

    final = objective(best_params)
    return SguResult(
        value=math.inf if final.diverged else final.value,
        params=dict(zip(space.names, best_params)),
        diverged=final.diverged,
        n_nodes=final.n_nodes,
        error=final.error,
    )


def sgu_with_nuisance(cfi, prior, nuisance_prior, space, grid_points=64,
                      param_tol=1e-6, rtol=1e-8):
    """SGU with a nuisance parameter averaged over its own prior.

    cfi maps (lam_array, xi, *params) to an array.  The double integral is a
    nested tensor-product quadrature; a point-mass nuisance prior reduces to
    plain minimize_sgu at the fixed nuisance value.
    """
    if nuisance_prior.kind == "point" or nuisance_prior.width == 0.0:
        xi0 = nuisance_prior.center
        return minimize_sgu(lambda lam, *p: cfi(lam, xi0, *p), space, prior,
                            grid_points=grid_points, param_tol=param_tol, rtol=rtol)

    def marginal_cfi(lam, *params):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.empty_like(lam)
        for i, l in enumerate(lam):
            def inner(xi):
                fc = np.asarray(cfi(np.full_like(np.asarray(xi, float), l), xi,
                                    *params), dtype=float)
                if np.any(fc < F_FLOOR):
                    raise _BlindMeasurement
                return nuisance_prior.density(xi) / fc
            res = adaptive_quad(inner, nuisance_prior.lo, nuisance_prior.hi,
                                rtol=0.1 * rtol)
            # fold the inner average back into an effective Fisher information
            out[i] = 1.0 / res.value
        return out

    return minimize_sgu(marginal_cfi, space, prior, grid_points=grid_points,
                        param_tol=param_tol, rtol=rtol)
