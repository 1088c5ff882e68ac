"""Double-well optical potential and its derivatives.

V(x, y) = -V0 * [cos^2(beta/2) (cos^2 y + cos^2 x)
                 + sin^2(beta/2) (cos y + cos(x - theta))^2]

with x, y dimensionless (k*x, k*y).  beta interpolates between the symmetric
lambda/2 double-well lattice (beta = 0, period pi) and the lambda lattice
(beta = pi, period 2*pi); theta moves the lambda-lattice wells and controls
the tilt between the two wells of a cell (zero tilt at theta = +/- pi/2).
The double-well axis is y = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .grid import DEFAULT_DOMAIN


@dataclass(frozen=True)
class LatticeParams:
    """Instantaneous lattice control parameters."""

    v0: float  # potential depth, kHz
    beta: float  # polarization angle, rad
    theta: float  # phase shift, rad

    def __post_init__(self):
        if not self.v0 >= 0.0:
            raise ValueError(f"v0 must be >= 0 kHz, got {self.v0}")
        if not 0.0 <= self.beta <= math.pi:
            raise ValueError(f"beta/pi must lie in [0, 1], got {self.beta / math.pi}")


@dataclass(frozen=True)
class WellGeometry:
    """Positions and energies of the two well minima and the barrier between them."""

    left_min_x: float
    right_min_x: float
    left_min_e: float
    right_min_e: float
    barrier_e: float
    barrier_x: float

    @property
    def tilt(self) -> float:
        """right_min_e - left_min_e (positive when the right well is shallower)."""
        return self.right_min_e - self.left_min_e

    @property
    def is_double_well(self) -> bool:
        return self.left_min_x != self.right_min_x


def potential_2d(p: LatticeParams, x, y):
    """Evaluate the 2D lattice potential in kHz at dimensionless (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c2 = math.cos(0.5 * p.beta) ** 2
    s2 = math.sin(0.5 * p.beta) ** 2
    out = -p.v0 * (
        c2 * (np.cos(y) ** 2 + np.cos(x) ** 2)
        + s2 * (np.cos(y) + np.cos(x - p.theta)) ** 2
    )
    return out if out.ndim else float(out)


def potential_1d(p: LatticeParams, x):
    """Cross-section along the double-well axis (y = 0)."""
    x = np.asarray(x, dtype=float)
    c2 = math.cos(0.5 * p.beta) ** 2
    s2 = math.sin(0.5 * p.beta) ** 2
    out = -p.v0 * (c2 * (1.0 + np.cos(x) ** 2) + s2 * (1.0 + np.cos(x - p.theta)) ** 2)
    return out if out.ndim else float(out)


def potential_gradient(p: LatticeParams, x):
    """Analytic partials (dV/dV0, dV/dbeta, dV/dtheta) of potential_1d at x.

    Used pointwise by the control-update step of the optimizer.
    """
    x = np.asarray(x, dtype=float)
    c2 = math.cos(0.5 * p.beta) ** 2
    s2 = math.sin(0.5 * p.beta) ** 2
    sb = math.sin(p.beta)  # d(s2)/dbeta = sb/2 = -d(c2)/dbeta
    cosx2 = np.cos(x) ** 2
    w = 1.0 + np.cos(x - p.theta)

    d_v0 = -(c2 * (1.0 + cosx2) + s2 * w**2)
    d_beta = -p.v0 * 0.5 * sb * (w**2 - (1.0 + cosx2))
    d_theta = -p.v0 * s2 * 2.0 * w * np.sin(x - p.theta)
    if x.ndim:
        return d_v0, d_beta, d_theta
    return float(d_v0), float(d_beta), float(d_theta)


def _refine_extremum(f, x_lo, x_hi, sign=1.0):
    """Golden-section/Brent refinement of an extremum bracketed in [x_lo, x_hi]."""
    res = minimize_scalar(
        lambda x: sign * f(x), bounds=(x_lo, x_hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x), float(sign * res.fun)


def well_geometry(p: LatticeParams, domain=DEFAULT_DOMAIN, scan_points: int = 4096) -> WellGeometry:
    """Locate the two minima of the cell and the barrier top between them.

    The domain is scanned on a dense cyclic mesh (the potential has period
    2*pi) and each extremum is refined to ~1e-10 relative.  In a single-well
    configuration a degenerate geometry is returned with both minima equal and
    barrier_e == min energy.
    """
    if p.v0 == 0.0:
        x0 = 0.5 * (domain[0] + domain[1])
        return WellGeometry(x0, x0, 0.0, 0.0, 0.0, x0)

    def f(x):
        return potential_1d(p, x)

    length = domain[1] - domain[0]
    xs = domain[0] + length * np.arange(scan_points) / scan_points
    vs = potential_1d(p, xs)

    # cyclic local minima / maxima of the scan
    left = np.roll(vs, 1)
    right = np.roll(vs, -1)
    min_idx = np.where((vs < left) & (vs <= right))[0]
    max_idx = np.where((vs > left) & (vs >= right))[0]

    h = length / scan_points
    minima = []
    for i in min_idx:
        xm, vm = _refine_extremum(f, xs[i] - h, xs[i] + h, sign=1.0)
        minima.append((xm, vm))
    minima.sort(key=lambda t: t[1])

    if len(minima) < 2:
        xm, vm = minima[0]
        return WellGeometry(xm, xm, vm, vm, vm, xm)

    # two deepest minima, ordered left to right
    (xa, va), (xb, vb) = sorted(minima[:2])
    # barrier: highest refined maximum strictly between them
    barrier_x, barrier_e = None, -np.inf
    for i in max_idx:
        if xa < xs[i] < xb:
            xm, vm = _refine_extremum(f, xs[i] - h, xs[i] + h, sign=-1.0)
            if vm > barrier_e:
                barrier_x, barrier_e = xm, vm
    if barrier_x is None:  # maxima only at scan-cell edges; refine the midpoint arc
        barrier_x, barrier_e = _refine_extremum(f, xa, xb, sign=-1.0)
    return WellGeometry(xa, xb, va, vb, barrier_e, barrier_x)
