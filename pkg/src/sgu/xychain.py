"""Ground-state magnetometry with the transverse-field XY chain.

The chain is solved in the antiperiodic momentum sector: positive momenta
k_j = (2j-1) pi / N for j = 1 .. N/2, each counted twice.  Every momentum
cell is a two-level problem with block (lam - cos k) sigma_z - gamma sin k
sigma_x, Bloch-angle ground state and an analytic angle derivative.
"""

import math
from dataclasses import dataclass

import numpy as np

from .engine import Prior, SguResult, average_inverse_cfi, global_bound_G
from .errors import DomainError, SingularPointError

_GAP_TOL = 1e-12
_CRITICAL_NUDGE = 1e-9
_DEGENERATE_TOL = 1e-10


@dataclass
class XYChain:
    n_sites: int
    gamma: float = 1.0

    def __post_init__(self):
        if self.n_sites < 2 or self.n_sites % 2 != 0:
            raise DomainError("n_sites must be even and at least 2")
        if not 0 < self.gamma <= 1:
            raise DomainError("gamma must lie in (0, 1]")

    @property
    def momenta(self):
        """Positive antiperiodic-sector momenta, each of multiplicity 2."""
        j = np.arange(1, self.n_sites // 2 + 1)
        return (2 * j - 1) * math.pi / self.n_sites


@dataclass
class KCellMeasurement:
    """Projective qubit basis given by polar and azimuthal Bloch angles."""

    theta_m: float
    phi_m: float = 0.0


def bloch_angle(lam, gamma, k):
    """Ground-state Bloch angle theta_k and gap E_k of one momentum block.

    The block is (lam - cos k) sigma_z - gamma sin k sigma_x; the ground
    state is cos(theta_k)|0> + sin(theta_k)|1> with cos(theta_k) >= 0.
    """
    lam = np.asarray(lam, dtype=float)
    a = lam - np.cos(k)
    b = gamma * np.sin(k)
    energy = np.sqrt(a * a + b * b)
    if np.any(energy < _GAP_TOL):
        raise SingularPointError(f"gap closes at (lam, k) = ({lam}, {k})")
    theta = np.arctan2(a + energy, b)
    return theta, energy


def dtheta_dlam(lam, gamma, k):
    """Analytic d theta_k / d lam = gamma sin k / (2 E_k^2)."""
    _, energy = bloch_angle(lam, gamma, k)
    return gamma * np.sin(k) / (2.0 * energy * energy)


def kcell_cfi(theta_k, dtheta, basis):
    """CFI of a projective qubit measurement on one momentum cell.

    Outcome probabilities are p+- = (1 +- u)/2 with u the Bloch overlap; the
    degenerate case |u| -> 1 is evaluated by its analytic limit.
    """
    theta_k = np.asarray(theta_k, dtype=float)
    dtheta = np.asarray(dtheta, dtype=float)
    a = math.sin(basis.theta_m) * math.cos(basis.phi_m)
    b = math.cos(basis.theta_m)
    u = a * np.sin(2 * theta_k) + b * np.cos(2 * theta_k)
    v = a * np.cos(2 * theta_k) - b * np.sin(2 * theta_k)  # (du/dtheta)/2
    denom = 1.0 - u * u
    with np.errstate(divide="ignore", invalid="ignore"):
        cfi = 4.0 * dtheta * dtheta * v * v / denom
    limit = 4.0 * dtheta * dtheta * np.abs(u)
    return np.where(denom < _DEGENERATE_TOL, limit, cfi)


def kcell_qfi(dtheta):
    """Per-cell quantum Fisher information 4 (d theta_k / d lam)^2."""
    dtheta = np.asarray(dtheta, dtype=float)
    return 4.0 * dtheta * dtheta


def optimal_kcell_basis(lam, gamma, k, grid_points=64, refine_tol=1e-9):
    """Deterministic per-cell CFI maximization over (theta_m, phi_m).

    A grid scan with a canonical tie-break (smallest angles win unless a
    candidate improves by more than refine_tol).  The maximum sits on a flat
    ridge -- every phi_m = 0 basis away from the degenerate alignment attains
    the per-cell QFI -- so the scan resolution does not limit the achieved
    value and the returned basis is stable across parameter values.
    """
    theta_k = float(bloch_angle(lam, gamma, k)[0])
    dth = float(dtheta_dlam(lam, gamma, k))
    thetas = np.linspace(0.0, math.pi, grid_points, endpoint=False)
    phis = np.linspace(0.0, 2 * math.pi, grid_points, endpoint=False)
    best = (0.0, 0.0)
    best_val = -math.inf
    for phi in phis:
        for th in thetas:
            val = float(kcell_cfi(theta_k, dth, KCellMeasurement(th, phi)))
            if val > best_val * (1.0 + refine_tol) + refine_tol:
                best_val = val
                best = (th, phi)
    return KCellMeasurement(*best), best_val


def chain_cfi(chain, lam, bases, k_cutoff=None):
    """Additive chain CFI for per-cell bases (multiplicity 2 per momentum)."""
    lam = np.asarray(lam, dtype=float)
    ks = chain.momenta
    if k_cutoff is not None:
        ks = ks[ks < k_cutoff]
        if ks.size == 0:
            raise DomainError("momentum cutoff leaves no cells")
    total = np.zeros_like(np.atleast_1d(lam), dtype=float)
    for k, basis in zip(ks, bases):
        theta, _ = bloch_angle(np.atleast_1d(lam), chain.gamma, k)
        dth = dtheta_dlam(np.atleast_1d(lam), chain.gamma, k)
        total += 2.0 * kcell_cfi(theta, dth, basis)
    return float(total[0]) if lam.ndim == 0 else total


def chain_qfi(chain, lam, k_cutoff=None):
    """Additive chain QFI: sum over cells of 2 * 4 (d theta_k / d lam)^2."""
    lam = np.asarray(lam, dtype=float)
    ks = chain.momenta
    if k_cutoff is not None:
        ks = ks[ks < k_cutoff]
        if ks.size == 0:
            raise DomainError("momentum cutoff leaves no cells")
    grid = np.atleast_1d(lam)[:, None]
    dth = chain.gamma * np.sin(ks)[None, :] / (
        2.0 * ((grid - np.cos(ks)[None, :]) ** 2
               + (chain.gamma * np.sin(ks)[None, :]) ** 2))
    total = np.sum(8.0 * dth * dth, axis=1)
    return float(total[0]) if lam.ndim == 0 else total


def _nudged(lam):
    """Push quadrature nodes off the critical point lam = 1."""
    lam = np.asarray(lam, dtype=float).copy()
    mask = np.abs(lam - 1.0) < _CRITICAL_NUDGE
    lam[mask] = 1.0 + _CRITICAL_NUDGE
    return lam


def sgu_xy(chain, lam0, delta, rtol=1e-8, basis_grid=64):
    """SGU of the XY chain and the QFI-based bound G, computed independently.

    The per-cell bases are found by maximizing the cell CFI at both window
    endpoints; the window-averaged inverse chain CFI with those fixed bases
    is returned together with G and the basis diagnostics.
    """
    prior = Prior.uniform(lam0, delta)
    g_bound = global_bound_G(lambda lam: chain_qfi(chain, _nudged(lam)),
                             prior, rtol=rtol)

    bases_lo, bases_hi = [], []
    for k in chain.momenta:
        b_lo, _ = optimal_kcell_basis(prior.lo, chain.gamma, k, grid_points=basis_grid)
        b_hi, _ = optimal_kcell_basis(prior.hi, chain.gamma, k, grid_points=basis_grid)
        bases_lo.append(b_lo)
        bases_hi.append(b_hi)

    avg = average_inverse_cfi(
        lambda lam: chain_cfi(chain, _nudged(lam), bases_lo), prior, rtol=rtol)
    res = SguResult(
        value=avg.value, params={}, diverged=avg.diverged,
        n_nodes=avg.n_nodes, error=avg.error,
        flags={
            "G": g_bound.value,
            "bases": bases_lo,
            "basis_endpoint_mismatch": max(
                max(abs(a.theta_m - b.theta_m), abs(a.phi_m - b.phi_m))
                for a, b in zip(bases_lo, bases_hi)),
        },
    )
    return res


def truncated_sgu(chain, lam0, delta, k_cutoff, rtol=1e-8, basis_grid=64):
    """sgu_xy restricted to momenta below k_cutoff."""
    if not 0 < k_cutoff <= math.pi:
        raise DomainError("k_cutoff must lie in (0, pi]")
    ks = chain.momenta[chain.momenta < k_cutoff]
    if ks.size == 0:
        raise DomainError("momentum cutoff leaves no cells")
    prior = Prior.uniform(lam0, delta)
    g_bound = global_bound_G(
        lambda lam: chain_qfi(chain, _nudged(lam), k_cutoff=k_cutoff),
        prior, rtol=rtol)
    bases = [optimal_kcell_basis(prior.lo, chain.gamma, k, grid_points=basis_grid)[0]
             for k in ks]
    avg = average_inverse_cfi(
        lambda lam: chain_cfi(chain, _nudged(lam), bases, k_cutoff=k_cutoff),
        prior, rtol=rtol)
    return SguResult(value=avg.value, params={}, diverged=avg.diverged,
                     n_nodes=avg.n_nodes, error=avg.error,
                     flags={"G": g_bound.value, "bases": bases,
                            "n_cells": int(ks.size)})
