"""Discretized 1D Hamiltonian, low-lying eigenstates and localized well states.

The Hamiltonian is the standard three-point stencil on the Dirichlet mesh:
diagonal V(x_k) + 2*hop, off-diagonal -hop, with hop = recoil/dx^2 (equal to
eps/dx^2 when dx is measured in units of lambda).  Eigensolving goes through
LAPACK's tridiagonal MRRR driver, which satisfies the residual contract
directly; an iterative targeted method is not needed at these sizes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, DelocalizationError
from .grid import SpatialGrid, WaveFn1D
from .potential import LatticeParams, potential_1d
from .sequences import ControlSequence, sample
from .textio import float_repr
from .units import RECOIL_KHZ

MAX_EIGENSTATES = 10


@dataclass(frozen=True)
class TridiagonalOperator:
    """Real symmetric tridiagonal Hamiltonian on a grid (Dirichlet walls)."""

    grid: SpatialGrid
    diagonal: np.ndarray  # n+1 values, V(x_k) + 2*hop (boundary rows included)
    offdiag: float  # constant -hop

    @property
    def hop(self) -> float:
        return -self.offdiag

    def apply(self, values: np.ndarray) -> np.ndarray:
        """H @ values with the wavefunction pinned to zero at both walls."""
        out = np.zeros_like(values, dtype=np.result_type(values, 1.0 + 0j))
        out[1:-1] = self.diagonal[1:-1] * values[1:-1] + self.offdiag * (
            values[:-2] + values[2:]
        )
        return out

    def expectation(self, psi: WaveFn1D) -> float:
        return float(np.real(np.vdot(psi.values, self.apply(psi.values))) * psi.grid.dx)


@dataclass(frozen=True)
class EigenPair:
    energy: float  # kHz
    state: WaveFn1D


def assemble_hamiltonian(grid: SpatialGrid, p: LatticeParams) -> TridiagonalOperator:
    hop = RECOIL_KHZ / grid.dx**2
    diag = potential_1d(p, grid.points) + 2.0 * hop
    return TridiagonalOperator(grid, diag, -hop)


def lowest_eigenstates(
    H: TridiagonalOperator, count: int, target_energy: float | None = None
) -> list[EigenPair]:
    """The `count` eigenpairs nearest the target (default: bottom of spectrum).

    Returned sorted ascending by energy, normalized with the dx measure and
    mutually orthogonal.
    """
    if not 1 <= count <= MAX_EIGENSTATES:
        raise ValueError(f"count must be in [1, {MAX_EIGENSTATES}], got {count}")
    grid = H.grid
    m = grid.n - 1  # interior points
    if count > m:
        raise ValueError(f"grid supports only {m} eigenstates")
    d = H.diagonal[1:-1]
    e = np.full(m - 1, H.offdiag)

    if target_energy is None:
        lo, hi = 0, count - 1
    else:
        vals = eigh_tridiagonal(d, e, eigvals_only=True)
        order = np.argsort(np.abs(vals - target_energy), kind="stable")[:count]
        lo, hi = int(np.min(order)), int(np.max(order))
        if hi - lo != count - 1:  # nearest set is contiguous in the sorted spectrum
            raise ConvergenceError("could not bracket the target energy window")
    try:
        vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(lo, hi))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc

    pairs = []
    for j in range(vals.size):
        full = np.zeros(grid.n + 1, dtype=np.complex128)
        full[1:-1] = vecs[:, j] / np.sqrt(grid.dx)
        pairs.append(EigenPair(float(vals[j]), WaveFn1D(grid, full)))
    return pairs


def eigenvalues(H: TridiagonalOperator, count: int) -> np.ndarray:
    """Lowest `count` eigenvalues only (no vectors)."""
    d = H.diagonal[1:-1]
    e = np.full(H.grid.n - 2, H.offdiag)
    return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, count - 1))


def localized_states(ground: EigenPair, excited: EigenPair, barrier_x: float | None = None):
    """Recombine a doublet into left/right localized states.

    psi_{L,R} = (phi0 -/+ phi1)/sqrt(2) with the signs fixed so each carries
    at least 90% of its probability on its side of the barrier.  When no
    barrier position is supplied it is taken at the interior node of the
    antisymmetric doublet partner.
    """
    g, x = ground.state, excited.state
    if g.grid != x.grid:
        raise ValueError("doublet states live on different grids")
    grid = g.grid
    pts = grid.points

    if barrier_x is None:
        # node of the excited state between the two density maxima of the ground state
        dens = ground.state.density()
        imax = _two_main_maxima(dens)
        seg = slice(min(imax), max(imax) + 1)
        barrier_x = pts[seg][np.argmin(np.abs(x.values[seg]))]

    left_mask = pts < barrier_x
    a = WaveFn1D(grid, (g.values - x.values) / np.sqrt(2.0))
    b = WaveFn1D(grid, (g.values + x.values) / np.sqrt(2.0))
    dx = grid.dx

    def left_mass(w):
        return float(np.sum(w.density()[left_mask]) * dx)

    la, lb = left_mass(a), left_mass(b)
    if la >= lb:
        psi_l, psi_r, ml, mr = a, b, la, 1.0 - lb
    else:
        psi_l, psi_r, ml, mr = b, a, lb, 1.0 - la
    if ml < 0.9 or mr < 0.9:
        raise DelocalizationError(
            f"doublet recombination reaches only {ml:.3f}/{mr:.3f} left/right mass"
        )
    return psi_l, psi_r


def _two_main_maxima(dens: np.ndarray):
    idx = np.where((dens[1:-1] > dens[:-2]) & (dens[1:-1] >= dens[2:]))[0] + 1
    if idx.size < 2:
        raise DelocalizationError("ground state density is not bimodal")
    top = idx[np.argsort(dens[idx])[-2:]]
    return top


@dataclass(frozen=True)
class SpectrumTrace:
    """Lowest instantaneous energies along a control sequence."""

    times: np.ndarray  # ms
    energies: np.ndarray  # (len(times), count), kHz, ascending per row

    def to_table(self) -> str:
        buf = io.StringIO()
        count = self.energies.shape[1]
        buf.write("t_ms " + " ".join(f"E{k}_kHz" for k in range(count)) + "\n")
        for t, row in zip(self.times, self.energies):
            buf.write(f"{float_repr(t)} " + " ".join(float_repr(v) for v in row) + "\n")
        return buf.getvalue()


def instantaneous_spectrum(
    seq: ControlSequence, sample_times, count: int = 6, grid: SpatialGrid | None = None
) -> SpectrumTrace:
    """Eigenvalues of the time-frozen Hamiltonian at the requested times.

    Levels are tracked by plain energy ordering, matching how instantaneous
    spectra are usually displayed.
    """
    times = np.atleast_1d(np.asarray(sample_times, dtype=float))
    if grid is None:
        from .grid import default_grid

        grid = default_grid()
    energies = np.empty((times.size, count))
    for i, t in enumerate(times):
        H = assemble_hamiltonian(grid, sample(seq, t))
        energies[i] = eigenvalues(H, count)
    return SpectrumTrace(times, energies)
