"""Adaptive Gauss-Kronrod quadrature with deterministic accumulation.

The integrand must accept a numpy array of abscissae and return an array of
the same shape.  Panels are accepted when the Kronrod-Gauss discrepancy drops
below the locally allocated tolerance; accepted panels are summed in sorted
order so the result does not depend on the refinement schedule.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

# 15-point Kronrod nodes on [-1, 1] and weights, with the embedded 7-point
# Gauss rule on the odd-indexed nodes.
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])
_GAUSS_IDX = np.arange(1, 15, 2)


@dataclass
class QuadResult:
    value: float
    error: float
    n_nodes: int


def _panel(f, a, b):
    h = 0.5 * (b - a)
    x = 0.5 * (a + b) + h * _XK
    y = np.asarray(f(x), dtype=float)
    kron = h * np.dot(_WK, y)
    gauss = h * np.dot(_WG, y[_GAUSS_IDX])
    return kron, abs(kron - gauss)


def adaptive_quad(f, a, b, rtol=1e-8, atol=1e-14, max_depth=30):
    """Integrate f over [a, b].

    Raises NumericalError if the tolerance cannot be met within max_depth
    bisection levels.
    """
    if not b > a:
        raise ValueError("require b > a")
    whole, _ = _panel(f, a, b)
    scale = max(abs(whole), atol)
    span = b - a
    accepted = []  # (left edge, panel integral, panel error)
    stack = [(a, b, 0)]
    n_nodes = 15
    forced_error = 0.0
    while stack:
        x0, x1, depth = stack.pop()
        kron, err = _panel(f, x0, x1)
        n_nodes += 15
        tol = max(atol, rtol * scale) * (x1 - x0) / span
        # deep panels bottom out at roundoff in the Kronrod-Gauss discrepancy
        tol = max(tol, 100.0 * np.finfo(float).eps * abs(kron))
        if err <= tol:
            accepted.append((x0, kron, err))
        elif depth >= max_depth:
            # Bottomed out, typically on a sharp integrable spike where the
            # integrand's own roundoff noise exceeds the local allocation.
            # Accept the panel; whether its error matters is judged against
            # the completed integral below.
            accepted.append((x0, kron, err))
            forced_error += err
        else:
            xm = 0.5 * (x0 + x1)
            stack.append((xm, x1, depth + 1))
            stack.append((x0, xm, depth + 1))
    accepted.sort(key=lambda t: t[0])
    value = float(sum(t[1] for t in accepted))
    error = float(sum(t[2] for t in accepted))
    if forced_error > max(atol, rtol * abs(value)):
        raise NumericalError(
            f"quadrature did not converge within depth {max_depth}: "
            f"unresolved panel error {forced_error:.3e} exceeds tolerance "
            f"{max(atol, rtol * abs(value)):.3e}")
    return QuadResult(value=value, error=error, n_nodes=n_nodes)
