"""Acceptance suite: the nine headline checks at their stated tolerances.

Two clauses are marked xfail(strict=True) because the implemented physics
genuinely contradicts them; each carries a companion test that pins down the
actual behaviour:

* criterion 2, strict binary clause: two grid cells in the wide-window corner
  of the thermometry map have a true interior optimum r_m (a compromise
  measurement beating both homodyne and heterodyne by 1-3%), verified by an
  independent dense scan in test_criterion2_interior_cells_are_real.

* criterion 5, low-n clause: a -2 +- 0.1 log-log slope over n in [1, 100] at
  delta = pi/20 is impossible for any measurement because the averaged
  uncertainty is bounded below by the QFI average G; G(100) alone caps the
  achievable slope at about -1.87 (see
  test_criterion5_low_n_slope_is_infeasible).
"""

import math
import time

import numpy as np
import numpy.testing as npt
import pytest

from sgu.engine import Prior, average_inverse_cfi, global_bound_G
from sgu.gaussian import (
    GaussianState,
    GeneralDyneMeasurement,
    ParametrizedFamily,
    cfi_gaussian,
    squeezed_thermal_covariance,
    squeezing_from_photons,
    thermal_covariance,
)
from sgu.phase import (
    cfi_displaced_vacuum,
    cfi_sv,
    fit_loglog_slope,
    sgu_displaced_vacuum,
    sgu_st,
    sgu_sv_from_photons,
)
from sgu.quadrature import adaptive_quad
from sgu.thermometry import (
    cfi_thermometry,
    counter_cfi,
    dnu_dT,
    minimal_outperforming_levels,
    sgu_thermometry,
    transition_map,
)
from sgu.xychain import XYChain, sgu_xy

LAM0 = math.pi / 8


# ---------------------------------------------------------------- criterion 1

def test_criterion1_local_transition_temperature():
    """Bisection on the r_m flip at delta/T0 = 1e-3 lands at T_c = 1.13."""
    rel = 1e-3

    def homodyne_optimal(T0):
        return sgu_thermometry(T0, rel * T0).params["r_m"] < 0.5

    lo, hi = 0.5, 2.0
    assert homodyne_optimal(lo) and not homodyne_optimal(hi)
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        if homodyne_optimal(mid):
            lo = mid
        else:
            hi = mid
    t_c = 0.5 * (lo + hi)
    assert abs(t_c - 1.13) < 0.02


# ---------------------------------------------------------------- criterion 2

@pytest.fixture(scope="session")
def thermometry_map32():
    t0_grid = np.geomspace(0.05, 10.0, 32)
    rel_grid = np.linspace(0.0625, 2.0, 32)  # delta/T0 in (0, 2]
    r_opt, sgu = transition_map(t0_grid, rel_grid)
    return t0_grid, rel_grid, r_opt, sgu


@pytest.mark.xfail(
    strict=True,
    reason="two wide-window cells (T0 ~ 2.15, rel = 1.875 and T0 ~ 3.59, "
    "rel = 1.9375) have genuine interior optima r_m ~ 0.44 / 0.32 that beat "
    "both endpoint measurements; the strict {0, 1} clause does not hold")
def test_criterion2_strict_binary_map(thermometry_map32):
    _, _, r_opt, _ = thermometry_map32
    assert not np.any(np.isnan(r_opt))
    dist = np.minimum(np.abs(r_opt), np.abs(r_opt - 1.0))
    assert np.all(dist <= 1e-4)


def test_criterion2_map_structure(thermometry_map32):
    """What actually holds on the 32x32 grid.

    All cells are binary within 1e-4 except exactly the two known interior
    compromise cells; NaNs occur only where the window's lower edge drops
    below ~2.6e-3, where the Fisher information underflows double precision;
    the flip boundary is a single monotone curve along both grid directions.
    """
    t0_grid, rel_grid, r_opt, _ = thermometry_map32
    nan_mask = np.isnan(r_opt)
    t_lo = t0_grid[:, None] * (1.0 - rel_grid[None, :] / 2.0)
    assert np.all(t_lo[nan_mask] < 3e-3)

    dist = np.minimum(np.abs(r_opt), np.abs(r_opt - 1.0))
    interior = ~nan_mask & (dist > 1e-4)
    locs = {(i, j) for i, j in zip(*np.where(interior))}
    expected = set()
    for t0_ref, rel_ref in ((2.1476278813861014, 1.875),
                            (3.5862400447932803, 1.9375)):
        i = int(np.argmin(np.abs(t0_grid - t0_ref)))
        j = int(np.argmin(np.abs(rel_grid - rel_ref)))
        expected.add((i, j))
    assert locs <= expected

    cls = np.where(nan_mask, np.nan, np.round(r_opt))
    for j in range(rel_grid.size):       # single flip along T0
        col = cls[:, j]
        col = col[~np.isnan(col)]
        assert np.sum(np.abs(np.diff(col)) > 0) <= 1
    for i in range(t0_grid.size):        # single flip along delta/T0
        row = cls[i, :]
        row = row[~np.isnan(row)]
        assert np.sum(np.abs(np.diff(row)) > 0) <= 1


def test_criterion2_interior_cells_are_real():
    """Independent dense scan: the two off-binary cells are not optimizer
    artefacts; an interior r_m beats both endpoint measurements there."""
    for t0, rel in ((2.1476278813861014, 1.875),
                    (3.5862400447932803, 1.9375)):
        prior = Prior.uniform(t0, rel * t0)

        def avg(r_m):
            return average_inverse_cfi(
                lambda T: cfi_thermometry(T, r_m), prior).value

        rs = np.linspace(0.0, 1.0, 201)
        vals = np.array([avg(r) for r in rs])
        best = rs[np.argmin(vals)]
        assert 0.05 < best < 0.95
        assert vals.min() < avg(0.0) * (1 - 1e-3)
        assert vals.min() < avg(1.0) * (1 - 1e-3)


# ---------------------------------------------------------------- criterion 3

def test_criterion3_on_off_detector_regime():
    assert minimal_outperforming_levels(0.1, 0.05) == 1
    # m0 never decreases along increasing T0 at moderate relative width
    levels = [minimal_outperforming_levels(t0, 0.5 * t0, cap=200)
              for t0 in (0.1, 0.3, 1.0, 3.0)]
    assert levels[0] == 1
    assert all(b >= a for a, b in zip(levels, levels[1:]))


# ---------------------------------------------------------------- criterion 4

def test_criterion4_displaced_vacuum_exact():
    for delta in (math.pi / 100, math.pi / 20, math.pi / 4):
        for d0 in (0.5, 1.0, 3.0):
            res = sgu_displaced_vacuum(0.0, delta, d0)
            assert not res.diverged
            npt.assert_allclose(res.value, 0.25 / d0**2, rtol=1e-8)
            assert res.params["s_m"] == 0.0


# ---------------------------------------------------------------- criterion 5

def _sv_value(n, delta):
    res = sgu_sv_from_photons(LAM0, delta, n, optimize_probe_phase=True,
                              grid_points=32)
    assert not res.diverged
    return res.value


@pytest.fixture(scope="session")
def sv_crossover_lo():
    ns = [1.0, 3.0, 10.0, 30.0, 100.0]
    return ns, [_sv_value(n, math.pi / 20) for n in ns]


@pytest.mark.xfail(
    strict=True,
    reason="slope -2 over n in [1, 100] at delta = pi/20 is infeasible: the "
    "averaged uncertainty cannot drop below the QFI average G, and G(100) "
    "already limits the slope to about -1.87; the actual crossover to the "
    "1/n regime happens near n* = sqrt(3)/(2 delta) ~ 11")
def test_criterion5_low_n_slope(sv_crossover_lo):
    ns, vals = sv_crossover_lo
    slope = fit_loglog_slope(ns, vals)
    assert abs(slope + 2.0) <= 0.1


def test_criterion5_low_n_slope_is_infeasible(sv_crossover_lo):
    """No measurement can produce the -2 +- 0.1 slope on this window."""
    ns, vals = sv_crossover_lo
    prior = Prior.uniform(LAM0, math.pi / 20)

    def qfi_average(n):
        s = squeezing_from_photons(n)
        qfi = 2.0 * math.sinh(2 * s) ** 2
        return global_bound_G(
            lambda lam: np.full_like(np.asarray(lam, float), qfi), prior).value

    # the computed curve respects the bound at every point ...
    for n, v in zip(ns, vals):
        assert v >= qfi_average(n) * (1 - 1e-9)
    # ... and the bound itself forbids the claimed slope: even a curve that
    # starts at the computed value at n = 1 and is only constrained at
    # n = 100 cannot fall steeper than this
    steepest = (math.log(qfi_average(100.0)) - math.log(vals[0])) / math.log(100.0)
    assert steepest > -1.9
    # the actual slope sits well above the claimed window
    assert fit_loglog_slope(ns, vals) > -1.5


def test_criterion5_high_n_slope():
    ns = [1e4, 1e5, 1e6]
    vals = [_sv_value(n, math.pi / 20) for n in ns]
    slope = fit_loglog_slope(ns, vals)
    assert abs(slope + 1.0) <= 0.1


def test_criterion5_narrow_window_slope():
    ns = [1.0, 1e2, 1e4, 1e6]
    vals = [_sv_value(n, 1e-6) for n in ns]
    slope = fit_loglog_slope(ns, vals)
    assert abs(slope + 2.0) <= 0.1


# ---------------------------------------------------------------- criterion 6

def test_criterion6_optimal_measurement_asymptote():
    deltas = np.geomspace(math.pi / 100, math.pi / 2, 6)
    s_ms = []
    for delta in deltas:
        res = sgu_sv_from_photons(LAM0, delta, 1e6, optimize_probe_phase=True,
                                  grid_points=32)
        s_ms.append(res.params["s_m"])
    s_ms = np.asarray(s_ms)
    x = np.log(1.0 / deltas)
    coef = np.polyfit(x, s_ms, 1)
    pred = np.polyval(coef, x)
    r2 = 1.0 - np.sum((s_ms - pred) ** 2) / np.sum((s_ms - np.mean(s_ms)) ** 2)
    assert r2 >= 0.98
    assert coef[0] > 0  # s_m grows as the window narrows


def test_criterion6_thermal_occupation_trend():
    s_ms = [sgu_st(LAM0, math.pi / 20, 1.0, n_th,
                   grid_points=32).params["s_m"]
            for n_th in (0.0, 0.5, 1.0)]
    assert s_ms[0] > s_ms[1] > s_ms[2]


# ---------------------------------------------------------------- criterion 7

def test_criterion7_oracle_equivalence_thermometry():
    rng = np.random.default_rng(2024)
    fam = ParametrizedFamily(
        evaluate=lambda T: GaussianState(np.zeros(2), thermal_covariance(T)),
        derivative=lambda T: (np.zeros(2), float(dnu_dT(T)) * np.eye(2)))
    for _ in range(1000):
        T = rng.uniform(0.1, 10.0)
        r_m = rng.uniform(1e-3, 1.0)
        generic = cfi_gaussian(fam, T, GeneralDyneMeasurement.from_rm(r_m))
        npt.assert_allclose(float(cfi_thermometry(T, r_m)), generic,
                            rtol=1e-8)


def test_criterion7_oracle_equivalence_squeezed():
    rng = np.random.default_rng(2025)
    for _ in range(1000):
        s = rng.uniform(0.05, 1.5)
        n_th = rng.choice([0.0, rng.uniform(0.0, 2.0)])
        psi = rng.uniform(0, 2 * math.pi)
        lam = rng.uniform(-1.0, 1.0)
        s_m = rng.uniform(0.0, 5.0)
        psi_m = rng.uniform(0, 2 * math.pi)
        fam = ParametrizedFamily(
            evaluate=lambda l, n_th=n_th, s=s, psi=psi: GaussianState(
                np.zeros(2), squeezed_thermal_covariance(n_th, s, psi - 2 * l)))
        generic = cfi_gaussian(
            fam, lam, GeneralDyneMeasurement.from_squeezing(s_m, psi_m))
        n = (2 * n_th + 1) * math.cosh(2 * s) / 2.0 - 0.5
        chi = 2 * lam - psi + psi_m
        npt.assert_allclose(float(cfi_sv(n, s_m, chi, s)), generic, rtol=1e-8)


def test_criterion7_oracle_equivalence_displaced():
    rng = np.random.default_rng(2026)
    for _ in range(1000):
        d0 = rng.uniform(0.2, 3.0)
        theta = rng.uniform(0, 2 * math.pi)
        lam = rng.uniform(-1.0, 1.0)
        s_m = rng.uniform(0.0, 5.0)
        psi_m = rng.uniform(0, 2 * math.pi)

        def evaluate(l, d0=d0, theta=theta):
            th = theta - l
            d = 2.0 * math.sqrt(2.0) * d0 * np.array(
                [math.cos(th), math.sin(th)])
            return GaussianState(d, np.eye(2))

        fam = ParametrizedFamily(evaluate=evaluate)
        generic = cfi_gaussian(
            fam, lam, GeneralDyneMeasurement.from_squeezing(s_m, psi_m))
        chi = 2.0 * (theta - lam) - psi_m
        npt.assert_allclose(float(cfi_displaced_vacuum(d0, chi, s_m)),
                            generic, rtol=1e-8)


# ---------------------------------------------------------------- criterion 8

def test_criterion8_xy_coincidence():
    res = sgu_xy(XYChain(64, 1.0), 0.5, 0.2)
    assert not res.diverged
    assert abs(res.value - res.flags["G"]) <= 1e-6 * res.flags["G"]
    assert res.flags["basis_endpoint_mismatch"] <= 1e-6


# ---------------------------------------------------------------- criterion 9

def test_criterion9_property_suite():
    t_start = time.monotonic()
    rng = np.random.default_rng(99)

    # F_c >= 0 across all closed forms
    for _ in range(200):
        T = rng.uniform(0.05, 10.0)
        assert float(cfi_thermometry(T, rng.uniform(0, 1))) >= 0.0
        assert float(counter_cfi(T, int(rng.integers(1, 50)))) >= 0.0
        s = rng.uniform(0.05, 2.0)
        n = (math.cosh(2 * s) - 1.0) / 2.0
        assert float(cfi_sv(n, rng.uniform(0, 8),
                            rng.uniform(0, 2 * math.pi), s)) >= 0.0

    # G <= averaged inverse CFI for every fixed measurement
    for _ in range(20):
        t0 = rng.uniform(0.2, 5.0)
        delta = rng.uniform(0.05, 1.0) * t0
        prior = Prior.uniform(t0, delta)
        g = global_bound_G(
            lambda T: cfi_thermometry(T, 0.0) + cfi_thermometry(T, 1.0),
            prior).value  # a strict upper envelope of every r_m
        for r_m in (0.0, rng.uniform(0.01, 0.99), 1.0):
            fixed = average_inverse_cfi(
                lambda T: cfi_thermometry(T, r_m), prior)
            assert fixed.diverged or fixed.value >= g

    # counter CFI monotone in m0; coarse-graining never increases CFI
    for _ in range(20):
        T = rng.uniform(0.1, 5.0)
        m0s = sorted(rng.integers(1, 200, size=4))
        vals = [float(counter_cfi(T, int(m))) for m in m0s]
        assert all(b >= a - 1e-12 * abs(a)
                   for a, b in zip(vals, vals[1:]))

    # quadrature error estimates bound observed refinement deltas
    for _ in range(20):
        a = rng.uniform(-2.0, 0.0)
        b = a + rng.uniform(0.5, 3.0)
        w = rng.uniform(1.0, 20.0)
        f = lambda x, w=w: np.cos(w * x) / (1.0 + x * x)
        coarse = adaptive_quad(f, a, b, rtol=1e-6)
        fine = adaptive_quad(f, a, b, rtol=1e-12)
        assert abs(coarse.value - fine.value) <= max(coarse.error, 1e-12)

    assert time.monotonic() - t_start <= 120.0
