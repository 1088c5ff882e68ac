"""Command-line front end: spectrum, evolve, optimize, scan, fourier.

Every command validates its configuration fully before computing and writes
plain tabular text / JSON into the output directory.  Exit codes: 0 success,
2 configuration error, 3 numerical failure.  Timestamps live only in
metadata.json so repeated runs with the same config are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import analysis
from .config import RunConfig, load_config
from .errors import ConfigError, SimulationError
from .textio import float_repr
from .grid import WaveFn2D
from .krotov import ControlProblem, Objective, optimize, optimize_with_interactions
from .propagate1d import evolve, format_trajectory
from .propagate2d import (
    evolve_two_particle,
    format_density_2d,
    two_particle_eigenstate,
)
from .sequences import format_sequence, fourier_spectrum
from .spectrum import assemble_hamiltonian, instantaneous_spectrum, lowest_eigenstates

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write(out_dir: str, name: str, text: str) -> None:
    with open(os.path.join(out_dir, name), "w") as fh:
        fh.write(text)


def _write_metadata(out_dir: str, command: str) -> None:
    meta = {"command": command, "written_at_unix": time.time()}
    _write(out_dir, "metadata.json", json.dumps(meta, indent=2, sort_keys=True))


def _spectrum_text(seq, which) -> str:
    spec = fourier_spectrum(seq, which)
    if spec.degenerate:
        return f"# degenerate spectrum: constant {which} waveform\n"
    lines = [f"f_kHz mag_{which}_normalized"]
    for f, m in zip(spec.frequencies, spec.magnitudes):
        lines.append(f"{float_repr(f)} {float_repr(m)}")
    return "\n".join(lines) + "\n"


def cmd_spectrum(cfg: RunConfig, out_dir: str) -> None:
    grid = cfg.grid()
    seq = cfg.sequence()
    count = cfg.getint("spectrum", "count", check=lambda v: 1 <= v <= 10)
    n_times = cfg.getint("spectrum", "times", check=lambda v: v >= 1)
    cfg.raise_if_errors()
    times = np.linspace(0.0, seq.duration, n_times)
    trace = instantaneous_spectrum(seq, times, count=count, grid=grid)
    _write(out_dir, "spectrum.txt", trace.to_table())


def _single_particle_report(grid, seq, which, count, record_count):
    psi_l, psi_r = analysis.initial_well_states(seq, grid)
    report = analysis.FidelityReport()
    record_times = (
        np.linspace(0.0, seq.duration, record_count) if record_count else None
    )
    final_params = seq.params_at_node(seq.n_slices)
    outputs = {}
    for alpha, psi0 in (("L", psi_l), ("R", psi_r)):
        if which not in ("both", alpha):
            continue
        res = evolve(psi0, seq, record_times=record_times)
        report.f_by_alpha[alpha] = analysis.populations(res.final_state, final_params, count)
        if record_times is not None:
            outputs[f"trajectory_{alpha}.txt"] = format_trajectory(res)
    return report, outputs


def cmd_evolve(cfg: RunConfig, out_dir: str) -> None:
    grid = cfg.grid()
    seq = cfg.sequence()
    particles = cfg.getint("evolve", "particles", check=lambda v: v in (1, 2))
    which = cfg.require_choice("evolve", "initial", {"l", "r", "both", "pair"})
    count = cfg.getint("evolve", "count", check=lambda v: 1 <= v <= 10)
    record_count = cfg.getint("evolve", "record_count", check=lambda v: v >= 0)
    with_int = cfg.getbool("evolve", "interactions")
    ip = cfg.interaction()
    cfg.raise_if_errors()

    if particles == 1:
        which = {"l": "L", "r": "R"}.get(which, which)
        report, outputs = _single_particle_report(grid, seq, which, count, record_count)
    else:
        psi_l, psi_r = analysis.initial_well_states(seq, grid)
        ref_in = WaveFn2D.symmetrized_product(psi_l, psi_r)
        fin = lowest_eigenstates(
            assemble_hamiltonian(grid, seq.params_at_node(seq.n_slices)), 2
        )
        ref_tg = WaveFn2D.symmetrized_product(fin[1].state, fin[0].state)
        if with_int:
            ini = two_particle_eigenstate(grid, seq.params_at_node(0), ip, ref_in)
            tgt = two_particle_eigenstate(grid, seq.params_at_node(seq.n_slices), ip, ref_tg)
        else:
            from .propagate2d import TwoParticleState

            ini, tgt = TwoParticleState(ref_in), TwoParticleState(ref_tg)
        ip_run = ip if with_int else ip.scaled(0.0)
        res = evolve_two_particle(ini.wavefunction, seq, ip_run)
        fid = analysis.two_particle_fidelity(res.final_state.wavefunction, tgt.wavefunction)
        report = analysis.FidelityReport()
        if with_int:
            report.F_int = fid
        else:
            report.F = fid
        outputs = {"density_final.txt": format_density_2d(res.final_state.wavefunction)}

    _write(out_dir, "report.json", report.to_json())
    _write(out_dir, "sequence_used.txt", format_sequence(seq))
    for name, text in outputs.items():
        _write(out_dir, name, text)


def cmd_scan(cfg: RunConfig, out_dir: str) -> None:
    grid = cfg.grid()
    kind = cfg.require_choice("scan", "kind", {"theta", "duration"})
    count = cfg.getint("scan", "count", check=lambda v: 1 <= v <= 10)
    include_right = cfg.getbool("scan", "include_right")
    values = cfg.scan_values()
    cfg.raise_if_errors()

    if kind == "theta":
        T = cfg.getfloat("sequence", "t_ms", check=lambda v: v > 0)
        cfg.raise_if_errors()
        family = lambda th: cfg.sequence(t_ms=T, theta_pi=th / math.pi)
        result = analysis.scan_theta(family, values, grid, count=count, include_right=include_right)
    else:
        family = lambda T: cfg.sequence(t_ms=T)
        result = analysis.scan_duration(family, values, grid, count=count)
    _write(out_dir, "scan.txt", result.to_table())
    _write(out_dir, "scan.json", result.to_json())


def cmd_optimize(cfg: RunConfig, out_dir: str) -> None:
    grid = cfg.grid()
    seq0 = cfg.sequence()
    objective = cfg.require_choice("optimize", "objective", {"transport", "pair"})
    max_iter = cfg.getint("optimize", "max_iterations", check=lambda v: v >= 1)
    stop = cfg.getfloat("optimize", "stop_fidelity", check=lambda v: 0 < v <= 1)
    controls = tuple(
        c.strip() for c in cfg.get("optimize", "controls").split(",") if c.strip()
    )
    weights = {}
    for u in controls:
        raw = cfg.get("optimize", f"lambda_{u}").strip() if cfg.parser.has_option("optimize", f"lambda_{u}") else ""
        if raw:
            weights[u] = cfg.getfloat("optimize", f"lambda_{u}", check=lambda v: v > 0)
    ip = cfg.interaction()
    do_fourier = cfg.getbool("optimize", "fourier")
    cfg.raise_if_errors()

    final_params = seq0.params_at_node(seq0.n_slices)
    if objective == "transport":
        psi_l, psi_r = analysis.initial_well_states(seq0, grid)
        fin = lowest_eigenstates(assemble_hamiltonian(grid, final_params), 2)
        problem = ControlProblem(
            [Objective(psi_l, fin[1].state), Objective(psi_r, fin[0].state)],
            seq0,
            active_controls=controls,
            step_weights=weights or None,
            max_iterations=max_iter,
            stop_fidelity=stop,
        )
        trace = optimize(problem)
    else:
        psi_l, psi_r = analysis.initial_well_states(seq0, grid)
        ref_in = WaveFn2D.symmetrized_product(psi_l, psi_r)
        fin = lowest_eigenstates(assemble_hamiltonian(grid, final_params), 2)
        ref_tg = WaveFn2D.symmetrized_product(fin[1].state, fin[0].state)
        ini = two_particle_eigenstate(grid, seq0.params_at_node(0), ip, ref_in)
        tgt = two_particle_eigenstate(grid, final_params, ip, ref_tg)
        problem = ControlProblem(
            [Objective(ini.wavefunction, tgt.wavefunction)],
            seq0,
            active_controls=controls,
            step_weights=weights or None,
            max_iterations=max_iter,
            stop_fidelity=stop,
        )
        trace = optimize_with_interactions(problem, ip)

    _write(out_dir, "optimized_sequence.txt", format_sequence(trace.final_sequence))
    _write(out_dir, "trace.txt", trace.to_table())
    summary = {
        "converged": trace.converged,
        "message": trace.message,
        "iterations": len(trace.records) - 1,
        "final_fidelities": list(trace.records[-1].fidelities),
        "final_combined": trace.records[-1].combined,
    }
    _write(out_dir, "summary.json", json.dumps(summary, indent=2, sort_keys=True))
    if do_fourier:
        for which in ("beta", "theta"):
            _write(out_dir, f"fourier_{which}.txt", _spectrum_text(trace.final_sequence, which))


def cmd_fourier(cfg: RunConfig, out_dir: str) -> None:
    seq = cfg.sequence()
    cfg.raise_if_errors()
    for which in ("beta", "theta"):
        _write(out_dir, f"fourier_{which}.txt", _spectrum_text(seq, which))


COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "optimize": cmd_optimize,
    "scan": cmd_scan,
    "fourier": cmd_fourier,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dwtransport",
        description="Double-well optical lattice transport: simulation and optimal control",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", default=None, help="INI configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a configuration value (repeatable)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        cfg.raise_if_errors()
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](cfg, args.out)
        _write_metadata(args.out, args.command)
    except ConfigError as exc:
        for msg in exc.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
