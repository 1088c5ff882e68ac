"""Run configuration: INI-style file plus command-line overrides.

Every command validates the whole configuration up front and reports all
problems in one aggregated error, so a failed run leaves no partial output.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import DEFAULT_DOMAIN, SpatialGrid, make_grid
from .potential import LatticeParams
from .propagate2d import InteractionParams
from .sequences import (
    DEFAULT_N_SLICES,
    MERGE_BETA_END,
    MERGE_RAMP_POWER,
    MERGE_V0_KHZ,
    THETA_A_DEFAULT,
    THETA_B_DEFAULT,
    ControlSequence,
    load_sequence,
    make_merge_ramp,
)

DEFAULTS = {
    "grid": {
        "x_min": repr(DEFAULT_DOMAIN[0]),
        "x_max": repr(DEFAULT_DOMAIN[1]),
        "n": "1000",
    },
    "physics": {
        # 87Rb literature defaults; see units.py
        "a_s_m": "5.3129446974561e-09",
        "nu_y_khz": "35.0",
        "nu_z_khz": "35.0",
        "wavelength_m": "8.1e-07",
    },
    "sequence": {
        "preset": "b",  # a | b | file
        "t_ms": "0.5",
        "v0_khz": repr(MERGE_V0_KHZ),
        "beta_start_pi": "0.0",
        "beta_end_pi": repr(MERGE_BETA_END / math.pi),
        "theta_pi": "",  # empty = per-preset default (-0.474 for b, -0.454 for a)
        "ramp_power": repr(MERGE_RAMP_POWER),
        "n_slices": str(DEFAULT_N_SLICES),
        "file": "",
    },
    "evolve": {
        "particles": "1",
        "initial": "both",  # L | R | both (1-particle) / pair (2-particle)
        "count": "6",
        "record_count": "0",
        "interactions": "true",
    },
    "spectrum": {
        "count": "6",
        "times": "41",
    },
    "scan": {
        "kind": "theta",  # theta | duration
        "values": "-0.494:-0.440:19rpi",
        "count": "6",
        "include_right": "false",
    },
    "optimize": {
        "objective": "transport",  # transport | pair
        "max_iterations": "400",
        "stop_fidelity": "0.99",
        "controls": "beta,theta",
        "lambda_beta": "",
        "lambda_theta": "",
        "lambda_v0": "",
        "fourier": "true",
    },
}


@dataclass
class RunConfig:
    parser: configparser.ConfigParser
    errors: list = field(default_factory=list)

    def get(self, section: str, key: str) -> str:
        return self.parser.get(section, key)

    def getfloat(self, section, key, check=None) -> float:
        raw = self.parser.get(section, key)
        try:
            val = float(raw)
        except ValueError:
            self.errors.append(f"[{section}] {key}: not a number: {raw!r}")
            return math.nan
        if check is not None and not check(val):
            self.errors.append(f"[{section}] {key}: invalid value {val}")
        return val

    def getint(self, section, key, check=None) -> int:
        raw = self.parser.get(section, key)
        try:
            val = int(raw)
        except ValueError:
            self.errors.append(f"[{section}] {key}: not an integer: {raw!r}")
            return 0
        if check is not None and not check(val):
            self.errors.append(f"[{section}] {key}: invalid value {val}")
        return val

    def getbool(self, section, key) -> bool:
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            self.errors.append(f"[{section}] {key}: not a boolean")
            return False

    def require_choice(self, section, key, choices) -> str:
        val = self.parser.get(section, key).strip().lower()
        if val not in choices:
            self.errors.append(f"[{section}] {key}: {val!r} not in {sorted(choices)}")
        return val

    def raise_if_errors(self):
        if self.errors:
            raise ConfigError(self.errors)

    # -- assembled objects ---------------------------------------------------

    def grid(self) -> SpatialGrid:
        x_min = self.getfloat("grid", "x_min")
        x_max = self.getfloat("grid", "x_max")
        n = self.getint("grid", "n", check=lambda v: v >= 8)
        if not self.errors and x_max <= x_min:
            self.errors.append("[grid] x_max must exceed x_min")
        self.raise_if_errors()
        return make_grid(x_min, x_max, n)

    def interaction(self) -> InteractionParams:
        ip = InteractionParams(
            a_s_m=self.getfloat("physics", "a_s_m"),
            nu_y_khz=self.getfloat("physics", "nu_y_khz", check=lambda v: v >= 0),
            nu_z_khz=self.getfloat("physics", "nu_z_khz", check=lambda v: v >= 0),
            wavelength_m=self.getfloat("physics", "wavelength_m", check=lambda v: v > 0),
        )
        self.raise_if_errors()
        return ip

    def sequence(self, t_ms: float | None = None, theta_pi: float | None = None) -> ControlSequence:
        preset = self.require_choice("sequence", "preset", {"a", "b", "file"})
        if preset == "file":
            path = self.get("sequence", "file")
            if not path:
                self.errors.append("[sequence] file: required for preset=file")
                self.raise_if_errors()
            try:
                return load_sequence(path)
            except (OSError, ValueError) as exc:
                self.errors.append(f"[sequence] file: {exc}")
                self.raise_if_errors()
        T = t_ms if t_ms is not None else self.getfloat("sequence", "t_ms", check=lambda v: v > 0)
        v0 = self.getfloat("sequence", "v0_khz", check=lambda v: v >= 0)
        b0 = self.getfloat("sequence", "beta_start_pi", check=lambda v: 0 <= v <= 1)
        b1 = self.getfloat("sequence", "beta_end_pi", check=lambda v: 0 <= v <= 1)
        if theta_pi is None:
            raw_theta = self.get("sequence", "theta_pi").strip()
            if raw_theta == "":
                theta_pi = (THETA_A_DEFAULT if preset == "a" else THETA_B_DEFAULT) / math.pi
            else:
                theta_pi = self.getfloat("sequence", "theta_pi")
        power = self.getfloat("sequence", "ramp_power", check=lambda v: v > 0)
        n_slices = self.getint("sequence", "n_slices", check=lambda v: v >= 1)
        self.raise_if_errors()
        return make_merge_ramp(
            T,
            theta=theta_pi * math.pi,
            v0=v0,
            beta_start=b0 * math.pi,
            beta_end=b1 * math.pi,
            power=power,
            n_slices=n_slices,
        )

    def scan_values(self):
        """Parse 'start:stop:numrpi' ranges or comma lists ('rpi' = values in pi units)."""
        raw = self.get("scan", "values").strip()
        in_pi = raw.endswith("rpi")
        if in_pi:
            raw = raw[:-3]
        try:
            if ":" in raw:
                start, stop, num = raw.split(":")
                vals = np.linspace(float(start), float(stop), int(num))
            else:
                vals = np.array([float(x) for x in raw.split(",")])
        except ValueError:
            self.errors.append(f"[scan] values: cannot parse {raw!r}")
            self.raise_if_errors()
        if in_pi:
            vals = vals * math.pi
        if vals.size < 1 or (vals.size > 1 and not (vals[1:] > vals[:-1]).all()):
            self.errors.append("[scan] values must be strictly increasing")
        self.raise_if_errors()
        return vals


def load_config(path: str | None, overrides=()) -> RunConfig:
    """Read the INI config (optional) and apply section.key=value overrides."""
    parser = configparser.ConfigParser()
    parser.read_dict(DEFAULTS)
    problems = []
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError([f"config file not found: {path}"])
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError([f"cannot parse config file {path}: {exc}"]) from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            problems.append(f"override must look like section.key=value: {item!r}")
            continue
        key, value = item.split("=", 1)
        section, option = key.split(".", 1)
        if section not in parser:
            problems.append(f"unknown config section {section!r}")
            continue
        if option not in parser[section]:
            problems.append(f"unknown option {option!r} in section {section!r}")
            continue
        parser.set(section, option, value)
    cfg = RunConfig(parser)
    cfg.errors.extend(problems)
    return cfg
