"""Time-dependent control waveforms V0(t), beta(t), theta(t).

Sequences are stored as dense uniform samples (n_slices + 1 nodes over
[0, T]); the optimizer updates them pointwise in time.  The interchange
format is plain tabular text with header ``t_ms V0_kHz beta_rad theta_rad``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .potential import LatticeParams
from .textio import float_repr

DEFAULT_N_SLICES = 5000

SEQUENCE_HEADER = "t_ms V0_kHz beta_rad theta_rad"


@dataclass(frozen=True)
class ControlSequence:
    """Sampled control waveforms over [0, T]."""

    duration: float  # T, ms
    v0: np.ndarray
    beta: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in ("v0", "beta", "theta"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        k = len(self.v0)
        if k < 2 or len(self.beta) != k or len(self.theta) != k:
            raise ValueError("waveforms need matching lengths >= 2")
        if not self.duration > 0.0:
            raise ValueError(f"invalid duration T={self.duration} ms")
        if np.any(self.v0 < 0.0):
            raise ValueError("v0 samples must be >= 0 kHz")
        if np.any(self.beta < 0.0) or np.any(self.beta > math.pi):
            raise ValueError("beta samples must lie in [0, pi]")

    @property
    def n_slices(self) -> int:
        return len(self.v0) - 1

    @property
    def dt(self) -> float:
        return self.duration / self.n_slices

    @property
    def times(self) -> np.ndarray:
        return self.duration * np.arange(self.n_slices + 1) / self.n_slices

    def params_at_node(self, j: int) -> LatticeParams:
        return LatticeParams(self.v0[j], self.beta[j], self.theta[j])

    def time_reversed(self) -> "ControlSequence":
        return ControlSequence(
            self.duration, self.v0[::-1].copy(), self.beta[::-1].copy(), self.theta[::-1].copy()
        )

    def with_waveforms(self, v0=None, beta=None, theta=None) -> "ControlSequence":
        return ControlSequence(
            self.duration,
            self.v0 if v0 is None else v0,
            self.beta if beta is None else beta,
            self.theta if theta is None else theta,
        )


@dataclass(frozen=True)
class WaveformSpectrum:
    """DFT magnitudes of one control waveform, normalized at 1/T."""

    frequencies: np.ndarray  # kHz
    magnitudes: np.ndarray  # |w(f)| / |w(1/T)|
    fundamental_khz: float
    degenerate: bool = False


def make_linear_merge(
    T: float, start: LatticeParams, end: LatticeParams, n_slices: int = DEFAULT_N_SLICES
) -> ControlSequence:
    """Linear ramp of each parameter between start and end over [0, T].

    Holding a parameter is expressed by equal endpoints; the experimental
    merge ramps beta with V0 and theta held.
    """
    if not T > 0.0:
        raise ValueError(f"invalid duration T={T} ms")
    lam = np.arange(n_slices + 1) / n_slices
    return ControlSequence(
        T,
        start.v0 + (end.v0 - start.v0) * lam,
        start.beta + (end.beta - start.beta) * lam,
        start.theta + (end.theta - start.theta) * lam,
    )


def make_constant(T: float, p: LatticeParams, n_slices: int = DEFAULT_N_SLICES) -> ControlSequence:
    return make_linear_merge(T, p, p, n_slices)


# Reconstruction of the experimental double-well -> single-well merge ramps.
# The published waveforms exist only as figures; these defaults are calibrated
# so the T = 0.5 ms tilt scan peaks at theta_b/pi = -0.474 with f1 ~ 0.95 and
# the T = 0.15 ms ramp starts from (f1_L, f0_R) ~ (0.58, 0.68).
MERGE_V0_KHZ = 100.0
MERGE_BETA_END = 0.45 * math.pi
MERGE_RAMP_POWER = 2.0
THETA_B_DEFAULT = -0.474 * math.pi
THETA_A_DEFAULT = -0.454 * math.pi


def make_merge_ramp(
    T: float,
    theta: float = THETA_B_DEFAULT,
    v0: float = MERGE_V0_KHZ,
    beta_start: float = 0.0,
    beta_end: float = MERGE_BETA_END,
    power: float = MERGE_RAMP_POWER,
    n_slices: int = DEFAULT_N_SLICES,
) -> ControlSequence:
    """Sequence-b style merge: beta rises as (t/T)**power, V0 and theta held.

    power = 1 recovers a plain linear ramp; the default slow-start ramp
    reproduces the published transport numbers.  Sequence-a style runs use the
    same shape with theta fixed at the nominal calibration value instead of
    the scan endpoint.
    """
    if not T > 0.0:
        raise ValueError(f"invalid duration T={T} ms")
    lam = (np.arange(n_slices + 1) / n_slices) ** power
    return ControlSequence(
        T,
        np.full(n_slices + 1, float(v0)),
        beta_start + (beta_end - beta_start) * lam,
        np.full(n_slices + 1, float(theta)),
    )


def sample(seq: ControlSequence, t: float) -> LatticeParams:
    """Linear interpolation between the two nearest stored samples."""
    # tolerate float fuzz at the endpoints only
    eps = 1e-9 * seq.duration
    if t < -eps or t > seq.duration + eps:
        raise ValueError(f"time {t} ms outside [0, {seq.duration}] ms")
    s = min(max(t, 0.0), seq.duration) / seq.dt
    j = min(int(s), seq.n_slices - 1)
    w = s - j
    return LatticeParams(
        (1.0 - w) * seq.v0[j] + w * seq.v0[j + 1],
        (1.0 - w) * seq.beta[j] + w * seq.beta[j + 1],
        (1.0 - w) * seq.theta[j] + w * seq.theta[j + 1],
    )


def _waveform(seq: ControlSequence, which: str) -> np.ndarray:
    try:
        return {"v0": seq.v0, "beta": seq.beta, "theta": seq.theta}[which]
    except KeyError:
        raise ValueError(f"unknown waveform {which!r}; expected beta or theta") from None


def fourier_spectrum(seq: ControlSequence, which: str) -> WaveformSpectrum:
    """Magnitude spectrum of the selected waveform, mean removed.

    The n_slices periodic samples span exactly one period T, so bin m sits at
    m/T kHz and the fundamental is 1/T.  A constant waveform has no
    fundamental to normalize by and comes back flagged degenerate.
    """
    if seq.n_slices < 4:
        raise ValueError("need at least 4 slices for a spectrum")
    w = _waveform(seq, which)[: seq.n_slices]
    w = w - np.mean(w)
    mags = np.abs(np.fft.rfft(w))
    freqs = np.arange(len(mags)) / seq.duration
    fundamental = mags[1]
    scale = np.max(mags)
    if fundamental == 0.0 or (scale > 0.0 and fundamental < 1e-12 * scale):
        return WaveformSpectrum(
            np.empty(0), np.empty(0), 1.0 / seq.duration, degenerate=True
        )
    return WaveformSpectrum(freqs, mags / fundamental, 1.0 / seq.duration)


def _lowpass(w: np.ndarray, T: float, cutoff: float) -> np.ndarray:
    """Hard spectral truncation of one waveform, endpoints preserved exactly.

    The linear trend between the endpoints is removed first (the detrended
    residual is periodic over T), components above the cutoff are zeroed, and
    the small periodic offset left at the ends is absorbed into a constant so
    no above-cutoff leakage is reintroduced.
    """
    n = len(w) - 1
    trend = w[0] + (w[-1] - w[0]) * np.arange(n + 1) / n
    r = w - trend  # r[0] == r[n] == 0
    spec = np.fft.rfft(r[:n])
    freqs = np.arange(len(spec)) / T
    spec[freqs > cutoff] = 0.0
    rf = np.fft.irfft(spec, n=n)
    rf = np.concatenate([rf, rf[:1]])  # periodic continuation back to n+1 nodes
    return trend + (rf - rf[0])


def lowpass_filter(seq: ControlSequence, cutoff: float) -> ControlSequence:
    """Remove Fourier components above `cutoff` (kHz) from every waveform."""
    if not cutoff > 0.0:
        raise ValueError(f"cutoff must be positive, got {cutoff} kHz")
    v0 = np.maximum(_lowpass(seq.v0, seq.duration, cutoff), 0.0)
    beta = np.clip(_lowpass(seq.beta, seq.duration, cutoff), 0.0, math.pi)
    theta = _lowpass(seq.theta, seq.duration, cutoff)
    return ControlSequence(seq.duration, v0, beta, theta)


def save_sequence(seq: ControlSequence, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_sequence(seq))


def format_sequence(seq: ControlSequence) -> str:
    buf = io.StringIO()
    buf.write(SEQUENCE_HEADER + "\n")
    for t, v, b, th in zip(seq.times, seq.v0, seq.beta, seq.theta):
        buf.write(
            f"{float_repr(t)} {float_repr(v)} {float_repr(b)} {float_repr(th)}\n"
        )
    return buf.getvalue()


def load_sequence(path) -> ControlSequence:
    with open(path) as fh:
        header = fh.readline().strip()
        if header.split() != SEQUENCE_HEADER.split():
            raise ValueError(f"bad sequence header {header!r}")
        data = np.loadtxt(fh, ndmin=2)
    if data.shape[1] != 4:
        raise ValueError("sequence rows need 4 columns: t v0 beta theta")
    t = data[:, 0]
    if len(t) < 2:
        raise ValueError("sequence needs at least 2 samples")
    dt = np.diff(t)
    if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-8, atol=1e-12):
        raise ValueError("sequence times must be uniform and increasing")
    return ControlSequence(float(t[-1]), data[:, 1], data[:, 2], data[:, 3])
