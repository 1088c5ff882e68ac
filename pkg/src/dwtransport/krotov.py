"""Iterative pulse optimization for one or several state-transfer objectives.

Each iteration propagates every objective's state forward, propagates the
costate (the target scaled by its overlap with the evolved state) backward,
and updates the active controls pointwise:

    u(t) <- u(t) + s(t)/lambda * sum_i Im <chi_i(t)| dH/du |psi_i(t)>

with s(t) = sin^2(pi t / T) pinning the endpoints.  A trial update is only
accepted if the combined fidelity sum_i |<target_i|U|initial_i>|^2 did not
decrease; otherwise lambda is increased and the step retried, which makes the
recorded trace monotone.  The gradient is assembled by co-propagating psi and
chi backward through the unitary steps, so no trajectory storage is needed.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import WaveFn1D, WaveFn2D
from .potential import LatticeParams, potential_gradient
from .propagate1d import cn_step_arrays, potential_table
from .propagate2d import InteractionParams, pr_step_arrays
from .sequences import ControlSequence
from .textio import float_repr
from .units import RECOIL_KHZ

CONTROL_NAMES = ("v0", "beta", "theta")

#: first accepted update aims at this peak change, in each control's units
INITIAL_STEP = {"v0": 0.5, "beta": 0.01, "theta": 0.01}

ACCEPT_SLACK = 1e-12
STALL_UPDATE = 1e-8


@dataclass
class Objective:
    initial: object  # WaveFn1D or WaveFn2D
    target: object

    def __post_init__(self):
        for state, name in ((self.initial, "initial"), (self.target, "target")):
            if abs(state.norm() - 1.0) > 1e-6:
                raise ValueError(f"{name} state is not normalized")
        if self.initial.grid != self.target.grid:
            raise ValueError("objective states live on different grids")


@dataclass
class ControlProblem:
    objectives: list
    seq0: ControlSequence
    active_controls: tuple = ("beta", "theta")
    step_weights: dict | None = None  # lambda per control; None = auto-calibrated
    max_iterations: int = 2000
    stop_fidelity: float | None = None
    max_backtracks: int = 40

    def __post_init__(self):
        if not self.objectives:
            raise ValueError("need at least one objective")
        for u in self.active_controls:
            if u not in CONTROL_NAMES:
                raise ValueError(f"unknown control {u!r}")
        if self.step_weights is not None:
            for u, lam in self.step_weights.items():
                if not lam > 0:
                    raise ValueError(f"step weight for {u} must be positive")

    @property
    def grid(self):
        return self.objectives[0].initial.grid


@dataclass
class IterationRecord:
    iteration: int
    fidelities: tuple  # per objective |overlap|^2
    combined: float  # sum of the above
    backtracks: int = 0


@dataclass
class OptimizationTrace:
    records: list = field(default_factory=list)
    final_sequence: ControlSequence | None = None
    converged: bool = False
    message: str = ""

    @property
    def fidelity_history(self) -> np.ndarray:
        return np.array([r.combined for r in self.records])

    def to_table(self) -> str:
        buf = io.StringIO()
        n_obj = len(self.records[0].fidelities) if self.records else 0
        cols = " ".join(f"fidelity_{k}" for k in range(n_obj))
        buf.write(f"iter {cols} fidelity_combined\n")
        for r in self.records:
            vals = " ".join(float_repr(v) for v in r.fidelities)
            buf.write(f"{r.iteration} {vals} {float_repr(r.combined)}\n")
        return buf.getvalue()


def _envelope(n_nodes: int) -> np.ndarray:
    t = np.arange(n_nodes) / (n_nodes - 1)
    return np.sin(np.pi * t) ** 2


def _gradient_tables(seq: ControlSequence, grid, controls) -> dict:
    """dV/du on every (node, grid point) for each active control."""
    need = {u: np.empty((seq.n_slices + 1, grid.n + 1)) for u in controls}
    pts = grid.points
    for j in range(seq.n_slices + 1):
        dv0, dbeta, dtheta = potential_gradient(seq.params_at_node(j), pts)
        table = {"v0": dv0, "beta": dbeta, "theta": dtheta}
        for u in controls:
            need[u][j] = table[u]
    return need


class _Workspace1D:
    """Forward/backward propagation and gradient assembly, single particle."""

    def __init__(self, problem: ControlProblem):
        self.grid = problem.grid
        self.hop = RECOIL_KHZ / self.grid.dx**2
        self.objectives = problem.objectives

    def forward(self, seq, v_table):
        dt = seq.dt
        overlaps, finals = [], []
        dx = self.grid.dx
        for obj in self.objectives:
            psi = obj.initial.values.copy()
            for j in range(seq.n_slices):
                psi = cn_step_arrays(psi, v_table[j], v_table[j + 1], self.hop, dt)
            overlaps.append(complex(np.vdot(obj.target.values, psi) * dx))
            finals.append(psi)
        return overlaps, finals

    def gradient(self, seq, v_table, dv_tables, overlaps, finals):
        dt = seq.dt
        dx = self.grid.dx
        n_nodes = seq.n_slices + 1
        grads = {u: np.zeros(n_nodes) for u in dv_tables}
        for obj, o, psi_T in zip(self.objectives, overlaps, finals):
            psi = psi_T.copy()
            chi = o * obj.target.values
            for j in range(seq.n_slices, -1, -1):
                m = np.imag(np.conj(chi) * psi)
                for u, tab in dv_tables.items():
                    grads[u][j] += float(np.dot(tab[j], m)) * dx
                if j > 0:
                    psi = cn_step_arrays(psi, v_table[j - 1], v_table[j], self.hop, -dt)
                    chi = cn_step_arrays(chi, v_table[j - 1], v_table[j], self.hop, -dt)
        return grads


class _Workspace2D:
    """Same contract for one interacting two-particle objective."""

    def __init__(self, problem: ControlProblem, ip: InteractionParams):
        self.grid = problem.grid
        self.hop = RECOIL_KHZ / self.grid.dx**2
        self.objectives = problem.objectives
        self.ip = ip

    def forward(self, seq, v_table):
        dt = seq.dt
        dx = self.grid.dx
        g1d = self.ip.g1d
        overlaps, finals = [], []
        for obj in self.objectives:
            psi = obj.initial.values.copy()
            for j in range(seq.n_slices):
                psi = pr_step_arrays(psi, v_table[j], v_table[j + 1], self.hop, dx, g1d, dt)
            overlaps.append(complex(np.vdot(obj.target.values, psi) * dx * dx))
            finals.append(psi)
        return overlaps, finals

    def gradient(self, seq, v_table, dv_tables, overlaps, finals):
        dt = seq.dt
        dx = self.grid.dx
        g1d = self.ip.g1d
        n_nodes = seq.n_slices + 1
        grads = {u: np.zeros(n_nodes) for u in dv_tables}
        for obj, o, psi_T in zip(self.objectives, overlaps, finals):
            psi = psi_T.copy()
            chi = o * obj.target.values
            for j in range(seq.n_slices, -1, -1):
                m = np.imag(np.conj(chi) * psi)
                # dH2/du = dV/du(x1) + dV/du(x2): row sums meet column sums
                w = m.sum(axis=1) + m.sum(axis=0)
                for u, tab in dv_tables.items():
                    grads[u][j] += float(np.dot(tab[j], w)) * dx * dx
                if j > 0:
                    psi = pr_step_arrays(psi, v_table[j - 1], v_table[j], self.hop, dx, g1d, -dt)
                    chi = pr_step_arrays(chi, v_table[j - 1], v_table[j], self.hop, dx, g1d, -dt)
        return grads


def _apply_update(seq: ControlSequence, deltas: dict) -> ControlSequence:
    new = {}
    for u, d in deltas.items():
        w = getattr(seq, u) + d
        if u == "beta":
            w = np.clip(w, 0.0, math.pi)
        elif u == "v0":
            w = np.maximum(w, 0.0)
        new[u] = w
    return seq.with_waveforms(**new)


def _run(problem: ControlProblem, workspace) -> OptimizationTrace:
    seq = problem.seq0
    grid = problem.grid
    controls = tuple(problem.active_controls)
    env = _envelope(seq.n_slices + 1)
    trace = OptimizationTrace()

    v_table = potential_table(seq, grid)
    overlaps, finals = workspace.forward(seq, v_table)
    fids = tuple(abs(o) ** 2 for o in overlaps)
    J = float(sum(fids))
    trace.records.append(IterationRecord(0, fids, J))

    lambdas = dict(problem.step_weights) if problem.step_weights else None

    for it in range(1, problem.max_iterations + 1):
        if problem.stop_fidelity is not None and min(fids) >= problem.stop_fidelity:
            trace.converged = True
            trace.message = f"reached stop fidelity {problem.stop_fidelity}"
            break

        dv_tables = _gradient_tables(seq, grid, controls)
        grads = workspace.gradient(seq, v_table, dv_tables, overlaps, finals)
        scaled = {u: env * grads[u] for u in controls}

        if lambdas is None:  # calibrate so the first step peaks at INITIAL_STEP
            lambdas = {}
            for u in controls:
                peak = float(np.max(np.abs(scaled[u])))
                lambdas[u] = peak / INITIAL_STEP[u] if peak > 0 else 1.0

        peak_update = max(
            float(np.max(np.abs(scaled[u] / lambdas[u]))) for u in controls
        )
        if peak_update <= STALL_UPDATE:
            trace.converged = True
            trace.message = "stationary point: update magnitude below threshold"
            break

        accepted = False
        for attempt in range(problem.max_backtracks + 1):
            trial = _apply_update(seq, {u: scaled[u] / lambdas[u] for u in controls})
            trial_table = potential_table(trial, grid)
            t_overlaps, t_finals = workspace.forward(trial, trial_table)
            t_fids = tuple(abs(o) ** 2 for o in t_overlaps)
            t_J = float(sum(t_fids))
            if t_J >= J - ACCEPT_SLACK:
                seq, v_table = trial, trial_table
                overlaps, finals, fids, J = t_overlaps, t_finals, t_fids, t_J
                trace.records.append(IterationRecord(it, fids, J, backtracks=attempt))
                for u in controls:
                    lambdas[u] *= 0.85
                accepted = True
                break
            for u in controls:
                lambdas[u] *= 3.0
        if not accepted:
            trace.message = "no improving step found (stalled)"
            break
    else:
        trace.message = "iteration limit reached"

    trace.final_sequence = seq
    return trace


def optimize(problem: ControlProblem) -> OptimizationTrace:
    """Optimize single-particle transport objectives."""
    for obj in problem.objectives:
        if not isinstance(obj.initial, WaveFn1D):
            raise ValueError("optimize() expects WaveFn1D objectives")
    return _run(problem, _Workspace1D(problem))


def optimize_with_interactions(problem: ControlProblem, ip: InteractionParams) -> OptimizationTrace:
    """Optimize a single interacting two-particle objective."""
    if len(problem.objectives) != 1 or not isinstance(problem.objectives[0].initial, WaveFn2D):
        raise ValueError("interacting optimization expects one WaveFn2D objective")
    return _run(problem, _Workspace2D(problem, ip))


def fidelity_and_gradient(problem: ControlProblem, seq: ControlSequence | None = None,
                          ip: InteractionParams | None = None):
    """Combined fidelity and raw update direction for the given sequence.

    Returns (J, fidelities, grads) where grads[u][j] = sum_i
    Im <chi_i(t_j)| dV/du |psi_i(t_j)>.  For an interior node the derivative
    of J with respect to u_j is 4*pi*dt*grads[u][j] up to O(dt^2).
    """
    seq = seq if seq is not None else problem.seq0
    if ip is not None or isinstance(problem.objectives[0].initial, WaveFn2D):
        ws = _Workspace2D(problem, ip if ip is not None else InteractionParams(a_s_m=0.0))
    else:
        ws = _Workspace1D(problem)
    grid = problem.grid
    v_table = potential_table(seq, grid)
    overlaps, finals = ws.forward(seq, v_table)
    dv_tables = _gradient_tables(seq, grid, problem.active_controls)
    grads = ws.gradient(seq, v_table, dv_tables, overlaps, finals)
    fids = tuple(abs(o) ** 2 for o in overlaps)
    return float(sum(fids)), fids, grads
