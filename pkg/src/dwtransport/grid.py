"""Spatial discretization and wavefunction containers.

The mesh is uniform on [x_min, x_max] with n intervals (n+1 points including
both Dirichlet endpoints, where wavefunctions are pinned to zero).  Norms and
inner products carry the dx measure so they approximate integrals and are
grid-resolution independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError

# One lattice period of the double-well cell: left well near -pi, right well
# near 0, merge region near -pi/2, Dirichlet walls on the outer barrier tops.
DEFAULT_DOMAIN = (-1.5 * math.pi, 0.5 * math.pi)
DEFAULT_N = 1000

NORM_TOL = 1e-10


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform 1D mesh in dimensionless position xi = k*x."""

    x_min: float
    x_max: float
    n: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]

    def __eq__(self, other):
        if not isinstance(other, SpatialGrid):
            return NotImplemented
        return (self.x_min, self.x_max, self.n) == (other.x_min, other.x_max, other.n)

    def __hash__(self):
        return hash((self.x_min, self.x_max, self.n))


def make_grid(x_min: float, x_max: float, n: int) -> SpatialGrid:
    """Create a uniform grid; dx is exactly (x_max - x_min)/n."""
    if not x_max > x_min:
        raise ValueError(f"invalid domain: x_max={x_max} must exceed x_min={x_min}")
    if n < 8:
        raise ValueError(f"invalid domain: need n >= 8 grid intervals, got {n}")
    return SpatialGrid(float(x_min), float(x_max), int(n))


def default_grid(n: int = DEFAULT_N) -> SpatialGrid:
    return make_grid(DEFAULT_DOMAIN[0], DEFAULT_DOMAIN[1], n)


class WaveFn1D:
    """Complex amplitudes on a grid, normalized as sum |psi|^2 dx = 1."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: SpatialGrid, values: np.ndarray):
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (grid.n + 1,):
            raise ValueError(
                f"amplitude vector has length {values.shape}, grid needs {grid.n + 1}"
            )
        self.grid = grid
        self.values = values

    @classmethod
    def from_samples(cls, grid: SpatialGrid, values) -> "WaveFn1D":
        """Build a normalized wavefunction from raw samples (endpoints zeroed)."""
        v = np.array(values, dtype=np.complex128)
        v[0] = 0.0
        v[-1] = 0.0
        nrm = np.sqrt(np.sum(np.abs(v) ** 2) * grid.dx)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero function")
        return cls(grid, v / nrm)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))

    def normalized(self) -> "WaveFn1D":
        return WaveFn1D(self.grid, self.values / self.norm())

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def copy(self) -> "WaveFn1D":
        return WaveFn1D(self.grid, self.values.copy())


def inner_product(a: WaveFn1D, b: WaveFn1D) -> complex:
    """<a|b> = sum conj(a) * b * dx; conjugate-symmetric in its arguments."""
    if a.grid != b.grid:
        raise GridMismatchError("wavefunctions live on different grids")
    return complex(np.vdot(a.values, b.values) * a.grid.dx)


class WaveFn2D:
    """Two-particle amplitudes on the (x1, x2) product grid (same 1D mesh)."""

    __slots__ = ("grid", "values", "bosonic")

    def __init__(self, grid: SpatialGrid, values: np.ndarray, bosonic: bool = True):
        values = np.asarray(values, dtype=np.complex128)
        m = grid.n + 1
        if values.shape != (m, m):
            raise ValueError(f"amplitude array has shape {values.shape}, need ({m}, {m})")
        self.grid = grid
        self.values = values
        self.bosonic = bool(bosonic)

    @classmethod
    def from_samples(cls, grid: SpatialGrid, values, bosonic: bool = True) -> "WaveFn2D":
        """Normalize raw samples; symmetrize when the bosonic flag is set."""
        v = np.array(values, dtype=np.complex128)
        v[0, :] = v[-1, :] = 0.0
        v[:, 0] = v[:, -1] = 0.0
        if bosonic:
            v = 0.5 * (v + v.T)
        nrm = np.sqrt(np.sum(np.abs(v) ** 2) * grid.dx**2)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero function")
        return cls(grid, v / nrm, bosonic=bosonic)

    @classmethod
    def symmetrized_product(cls, a: WaveFn1D, b: WaveFn1D) -> "WaveFn2D":
        """(|a>|b> + |b>|a>)/sqrt(2), renormalized on the discrete grid."""
        if a.grid != b.grid:
            raise GridMismatchError("factors live on different grids")
        prod = np.outer(a.values, b.values)
        return cls.from_samples(a.grid, prod + prod.T, bosonic=True)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx**2))

    def exchange_asymmetry(self) -> float:
        """max |Psi(x1,x2) - Psi(x2,x1)| relative to max |Psi|."""
        scale = float(np.max(np.abs(self.values)))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.values - self.values.T))) / scale

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def copy(self) -> "WaveFn2D":
        return WaveFn2D(self.grid, self.values.copy(), bosonic=self.bosonic)


def inner_product_2d(a: WaveFn2D, b: WaveFn2D) -> complex:
    """<A|B> with the dx^2 measure."""
    if a.grid != b.grid:
        raise GridMismatchError("wavefunctions live on different grids")
    return complex(np.vdot(a.values, b.values) * a.grid.dx**2)
