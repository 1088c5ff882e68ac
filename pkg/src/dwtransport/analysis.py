"""Fidelity observables, parameter scans and model-vs-data comparison."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .grid import SpatialGrid, WaveFn1D, WaveFn2D, inner_product, inner_product_2d
from .potential import LatticeParams
from .propagate1d import evolve
from .sequences import ControlSequence, sample
from .spectrum import assemble_hamiltonian, localized_states, lowest_eigenstates
from .textio import float_repr


@dataclass
class FidelityReport:
    """Populations and two-particle fidelities for one simulation."""

    f_by_alpha: dict = field(default_factory=dict)  # {"L": f_n array, "R": ...}
    p_trace: "ProjectionTrace | None" = None
    F: float | None = None  # non-interacting two-particle fidelity
    F_int: float | None = None  # interacting two-particle fidelity

    def to_json(self) -> str:
        out = {}
        out["f"] = {a: list(map(float, v)) for a, v in self.f_by_alpha.items()}
        if self.p_trace is not None:
            out["p_trace"] = {
                "times_ms": list(map(float, self.p_trace.times)),
                "p": [list(map(float, row)) for row in self.p_trace.p],
            }
        if self.F is not None:
            out["F"] = float(self.F)
        if self.F_int is not None:
            out["F_int"] = float(self.F_int)
        return json.dumps(out, indent=2, sort_keys=True)


@dataclass
class ProjectionTrace:
    times: np.ndarray
    p: np.ndarray  # (len(times), count)

    def to_table(self) -> str:
        buf = io.StringIO()
        count = self.p.shape[1]
        buf.write("t_ms " + " ".join(f"p{k}" for k in range(count)) + "\n")
        for t, row in zip(self.times, self.p):
            buf.write(f"{float_repr(t)} " + " ".join(float_repr(v) for v in row) + "\n")
        return buf.getvalue()


@dataclass
class ScanResult:
    """Per-point population summaries over a scan variable (T or theta_b)."""

    variable: str
    values: np.ndarray
    f_l: np.ndarray  # (len(values), count) populations for the left atom
    f_r: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.diff(self.values) > 0):
            raise ValueError("scan values must be strictly increasing")

    def argmax(self, state: int = 1) -> tuple[float, float]:
        """(scan value, population) maximizing f_{state} for the left atom."""
        i = int(np.argmax(self.f_l[:, state]))
        return float(self.values[i]), float(self.f_l[i, state])

    def to_table(self) -> str:
        buf = io.StringIO()
        count = self.f_l.shape[1]
        cols = " ".join(f"f{k}_L" for k in range(count))
        if self.f_r is not None:
            cols += " " + " ".join(f"f{k}_R" for k in range(count))
        buf.write(f"{self.variable} {cols}\n")
        for i, v in enumerate(self.values):
            row = " ".join(float_repr(x) for x in self.f_l[i])
            if self.f_r is not None:
                row += " " + " ".join(float_repr(x) for x in self.f_r[i])
            buf.write(f"{float_repr(v)} {row}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        vmax, fmax = self.argmax()
        out = {
            "variable": self.variable,
            "values": list(map(float, self.values)),
            "f_L": [list(map(float, r)) for r in self.f_l],
            "argmax": {"value": vmax, "f1_L": fmax},
        }
        if self.f_r is not None:
            out["f_R"] = [list(map(float, r)) for r in self.f_r]
        return json.dumps(out, indent=2, sort_keys=True)


def populations(final_state: WaveFn1D, final_params: LatticeParams, count: int = 6) -> np.ndarray:
    """f_n = |<phi_n|psi(T)>|^2 against the eigenstates of the final Hamiltonian."""
    H = assemble_hamiltonian(final_state.grid, final_params)
    pairs = lowest_eigenstates(H, count)
    return np.array(
        [abs(inner_product(q.state, final_state)) ** 2 for q in pairs]
    )


def initial_well_states(seq: ControlSequence, grid: SpatialGrid):
    """(psi_L, psi_R) from the doublet of the sequence's initial Hamiltonian."""
    H0 = assemble_hamiltonian(grid, seq.params_at_node(0))
    doublet = lowest_eigenstates(H0, 2)
    return localized_states(doublet[0], doublet[1])


def transport_populations(
    seq: ControlSequence, grid: SpatialGrid, alpha: str = "L", count: int = 6,
    v_table=None,
) -> np.ndarray:
    """Populations f_n^alpha after evolving the chosen well state through seq."""
    psi_l, psi_r = initial_well_states(seq, grid)
    psi0 = psi_l if alpha == "L" else psi_r
    res = evolve(psi0, seq, v_table=v_table)
    return populations(res.final_state, seq.params_at_node(seq.n_slices), count)


def projection_trace(
    seq: ControlSequence, psi0: WaveFn1D, record_times, count: int = 4
) -> ProjectionTrace:
    """p_n(t) = |<phi_n(t)| U(t) psi0>|^2 onto instantaneous eigenstates."""
    res = evolve(psi0, seq, record_times=record_times)
    times, p_rows = [], []
    for t, state in res.trajectory:
        H = assemble_hamiltonian(psi0.grid, sample(seq, t))
        pairs = lowest_eigenstates(H, count)
        p_rows.append([abs(inner_product(q.state, state)) ** 2 for q in pairs])
        times.append(t)
    return ProjectionTrace(np.array(times), np.array(p_rows))


def two_particle_fidelity(final: WaveFn2D, target: WaveFn2D) -> float:
    """|<target|final>|^2 with the dx^2 measure."""
    return abs(inner_product_2d(target, final)) ** 2


def product_two_particle_fidelity(seq: ControlSequence, grid: SpatialGrid) -> float:
    """Non-interacting two-particle fidelity F from single-particle amplitudes.

    With U1 (x) U2 evolution and orthogonal localized initial states,
    F = |a0R * a1L + a1R * a0L|^2 with a_n^alpha = <phi_n|U|psi_alpha>.
    """
    psi_l, psi_r = initial_well_states(seq, grid)
    final_params = seq.params_at_node(seq.n_slices)
    pairs = lowest_eigenstates(assemble_hamiltonian(grid, final_params), 2)
    ul = evolve(psi_l, seq).final_state
    ur = evolve(psi_r, seq).final_state
    a0l = inner_product(pairs[0].state, ul)
    a1l = inner_product(pairs[1].state, ul)
    a0r = inner_product(pairs[0].state, ur)
    a1r = inner_product(pairs[1].state, ur)
    return abs(a0r * a1l + a1r * a0l) ** 2


def scan_duration(seq_family, T_values, grid: SpatialGrid, alpha: str = "L", count: int = 6) -> ScanResult:
    """Populations as a function of sequence duration.

    seq_family maps T (ms) to a ControlSequence.
    """
    rows = []
    for T in T_values:
        rows.append(transport_populations(seq_family(float(T)), grid, alpha, count))
    return ScanResult("T_ms", np.asarray(T_values, float), np.array(rows))


def scan_theta(seq_family, theta_values, grid: SpatialGrid, count: int = 6,
               include_right: bool = False) -> ScanResult:
    """Populations as a function of the merge endpoint theta_b (fixed T).

    seq_family maps theta_b (rad) to a ControlSequence.
    """
    rows_l, rows_r = [], []
    for th in theta_values:
        seq = seq_family(float(th))
        rows_l.append(transport_populations(seq, grid, "L", count))
        if include_right:
            rows_r.append(transport_populations(seq, grid, "R", count))
    return ScanResult(
        "theta_b_rad",
        np.asarray(theta_values, float),
        np.array(rows_l),
        np.array(rows_r) if include_right else None,
    )


def rms_deviation(model: ScanResult, data_values, data_f, offset: float = 0.0) -> float:
    """RMS difference between measured populations and the (offset) model.

    The model populations are interpolated at data_values + offset; points
    falling outside the model's scan range are rejected.
    """
    data_values = np.asarray(data_values, dtype=float) + offset
    data_f = np.asarray(data_f, dtype=float)
    if data_f.ndim != 2 or data_f.shape[0] != data_values.size:
        raise ValueError("data_f must be (n_points, n_states) matching data_values")
    n_states = min(data_f.shape[1], model.f_l.shape[1])
    lo, hi = model.values[0], model.values[-1]
    if np.any(data_values < lo - 1e-12) or np.any(data_values > hi + 1e-12):
        raise ValueError("data points fall outside the model scan range")
    diffs = []
    for k in range(n_states):
        m = np.interp(data_values, model.values, model.f_l[:, k])
        diffs.append(m - data_f[:, k])
    return float(np.sqrt(np.mean(np.square(diffs))))


def find_offset(model: ScanResult, data_values, data_f, candidate_offsets) -> float:
    """Offset minimizing the rms deviation over the candidate grid."""
    best, best_rms = None, np.inf
    for off in candidate_offsets:
        try:
            r = rms_deviation(model, data_values, data_f, offset=float(off))
        except ValueError:
            continue
        if r < best_rms:
            best, best_rms = float(off), r
    if best is None:
        raise ValueError("no candidate offset keeps the data inside the model range")
    return best
