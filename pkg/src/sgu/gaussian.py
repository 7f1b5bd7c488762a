"""Bosonic Gaussian states, general-dyne measurements and the generic CFI.

Conventions: hbar = k_B = 1 and the vacuum covariance matrix is the identity,
so a single-mode thermal state has sigma = nu * I with nu = coth(1/(2T)) and
quadratures are dimensionless.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError

_SYM_TOL = 1e-12
_BONAFIDE_TOL = 1e-10
_COND_MAX = 1e12


def symplectic_form(n_modes):
    """Block-diagonal standard symplectic form Omega."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), block)


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of an N-mode bosonic Gaussian state."""

    displacement: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.displacement, dtype=float)
        sigma = np.asarray(self.covariance, dtype=float)
        object.__setattr__(self, "displacement", d)
        object.__setattr__(self, "covariance", sigma)
        if d.ndim != 1 or d.size % 2 != 0 or d.size == 0:
            raise DomainError("displacement must have length 2*n_modes")
        if sigma.shape != (d.size, d.size):
            raise DomainError("covariance shape inconsistent with displacement")
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > _SYM_TOL * scale:
            raise DomainError("covariance matrix is not symmetric")
        omega = symplectic_form(d.size // 2)
        eigs = np.linalg.eigvalsh(sigma + 1j * omega)
        if eigs.min() < -_BONAFIDE_TOL:
            raise DomainError(
                f"covariance violates the bona-fide condition "
                f"(min eigenvalue of sigma + i Omega = {eigs.min():.3e})")

    @property
    def n_modes(self):
        return self.displacement.size // 2


@dataclass(frozen=True)
class GeneralDyneMeasurement:
    """Zero-displacement Gaussian POVM with pure covariance sigma_m."""

    covariance: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.covariance, dtype=float)
        object.__setattr__(self, "covariance", sigma)
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > _SYM_TOL * scale:
            raise DomainError("measurement covariance is not symmetric")
        eigs = np.linalg.eigvalsh(sigma)
        # relative tolerance: for strongly squeezed sigma_m the small
        # eigenvalue e^(-2 s_m) sits below the eigensolver's absolute error
        if eigs.min() <= -_BONAFIDE_TOL * max(1.0, eigs.max()):
            raise DomainError("measurement covariance must be positive definite")

    @classmethod
    def from_rm(cls, r_m):
        """Single-mode diag(r_m, 1/r_m); r_m=1 heterodyne, r_m->0 homodyne."""
        if not 0 < r_m <= 1:
            raise DomainError("r_m must lie in (0, 1]")
        return cls(np.diag([r_m, 1.0 / r_m]))

    @classmethod
    def from_squeezing(cls, s_m, psi_m=0.0):
        """Single-mode squeezed measurement R diag(e^-2s_m, e^2s_m) R^T."""
        if s_m < 0:
            raise DomainError("s_m must be nonnegative")
        r = rotation(psi_m / 2)
        return cls(r @ np.diag([math.exp(-2 * s_m), math.exp(2 * s_m)]) @ r.T)


@dataclass
class ParametrizedFamily:
    """A state family lam -> GaussianState with first-derivative access.

    derivative, if given, maps lam -> (d d/d lam, d sigma/d lam).  Otherwise a
    central finite difference with step 1e-6 * max(1, |lam|) is used.
    """

    evaluate: object
    derivative: object = None
    fd_step: float = 1e-6

    def derivative_at(self, lam):
        if self.derivative is not None:
            return self.derivative(lam)
        h = self.fd_step * max(1.0, abs(lam))
        plus = self.evaluate(lam + h)
        minus = self.evaluate(lam - h)
        dd = (plus.displacement - minus.displacement) / (2 * h)
        dsigma = (plus.covariance - minus.covariance) / (2 * h)
        return dd, dsigma


def thermal_covariance(T, omega=1.0):
    """Single-mode thermal covariance nu * I with nu = coth(omega/(2T))."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    nu = 1.0 / math.tanh(omega / (2.0 * T))
    return nu * np.eye(2)


def squeezed_thermal_covariance(n_th, s, psi_tilde=0.0):
    """Covariance of a squeezed thermal state, (2 n_th + 1) * squeezing part.

    The thermal prefactor is fixed so n_th = s = 0 gives the vacuum identity.
    """
    if n_th < 0:
        raise DomainError("n_th must be nonnegative")
    if s < 0:
        raise DomainError("s must be nonnegative")
    c2, s2 = math.cosh(2 * s), math.sinh(2 * s)
    cp, sp = math.cos(psi_tilde), math.sin(psi_tilde)
    return (2 * n_th + 1) * np.array([
        [c2 - s2 * cp, -s2 * sp],
        [-s2 * sp, c2 + s2 * cp],
    ])


def phase_encode(theta, psi, lam):
    """Phase angles after the rotation by lam: (theta - lam, psi - 2 lam)."""
    return theta - lam, psi - 2.0 * lam


def mean_photon_number(d0, s, n_th):
    """n = d0^2 + (n_th + 1/2) cosh(2s) - 1/2."""
    if d0 < 0 or s < 0 or n_th < 0:
        raise DomainError("d0, s and n_th must be nonnegative")
    return d0 * d0 + (n_th + 0.5) * math.cosh(2 * s) - 0.5


def squeezing_from_photons(n):
    """Inverse of mean_photon_number for d0 = n_th = 0: cosh(2s) = 2n + 1."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return 0.5 * math.acosh(2.0 * n + 1.0)


def _inv_2x2(m):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det <= 0:
        raise NumericalError("non positive-definite 2x2 matrix")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def cfi_gaussian(family, lam, measurement):
    """Classical Fisher information of a general-dyne measurement.

    F_c = dd^T (sigma + sigma_m)^{-1} dd
          + 1/2 Tr[((sigma + sigma_m)^{-1} dsigma)^2]
    """
    state = family.evaluate(lam)
    dd, dsigma = family.derivative_at(lam)
    total = state.covariance + measurement.covariance
    if total.shape == (2, 2):
        inv = _inv_2x2(total)
    else:
        cond = np.linalg.cond(total)
        if cond > _COND_MAX:
            raise NumericalError(
                f"sigma + sigma_m is ill-conditioned (cond = {cond:.3e})")
        inv = np.linalg.inv(total)
    a = inv @ dsigma
    return float(dd @ inv @ dd + 0.5 * np.trace(a @ a))
