"""Tone-burst excitation, packet detection, velocity and crack localization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d

from .pim import HarmonicSegment
from .record import Snapshot, WaveRecord

__all__ = [
    "SignalError",
    "ToneBurst",
    "Packet",
    "WaveRecord",
    "Snapshot",
    "toneburst_eval",
    "decompose",
    "envelope",
    "detect_arrivals",
    "group_velocity",
    "locate_crack",
]


class SignalError(ValueError):
    pass


@dataclass(frozen=True)
class ToneBurst:
    """Hann-windowed sine: ``a/2 (1 - cos(w_c t / n)) sin(w_c t)`` on ``[0, n / f_c]``."""

    f_c: float = 100e3
    n_cycles: int = 5
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.f_c > 0 or int(self.n_cycles) != self.n_cycles or self.n_cycles < 1:
            raise SignalError(f"need f_c > 0 and a positive integer cycle count, got {self}")

    @property
    def duration(self) -> float:
        return self.n_cycles / self.f_c

    @property
    def omega_c(self) -> float:
        return 2.0 * math.pi * self.f_c

    @property
    def omega_m(self) -> float:
        return self.omega_c / self.n_cycles

    @property
    def period(self) -> float:
        return 1.0 / self.f_c


def toneburst_eval(tb: ToneBurst, t):
    t = np.asarray(t, dtype=float)
    val = 0.5 * (1.0 - np.cos(tb.omega_m * t)) * np.sin(tb.omega_c * t)
    val = np.where((t >= 0.0) & (t <= tb.duration), tb.amplitude * val, 0.0)
    return val if val.ndim else float(val)


def decompose(tb: ToneBurst) -> list[HarmonicSegment]:
    """Split the burst into three sines on ``[0, T_b]``.

    ``(1 - cos B) sin A / 2 = sin A / 2 - sin(A + B) / 4 - sin(A - B) / 4``.
    Amplitudes are scalar forces; :meth:`HarmonicSegment.lift` maps them to
    state space.
    """
    a, wc, wm, T = tb.amplitude, tb.omega_c, tb.omega_m, tb.duration
    return [
        HarmonicSegment(0.5 * a, 0.0, wc, 0.0, T),
        HarmonicSegment(-0.25 * a, 0.0, wc + wm, 0.0, T),
        HarmonicSegment(-0.25 * a, 0.0, wc - wm, 0.0, T),
    ]


@dataclass(frozen=True)
class Packet:
    t_arrival: float
    peak: float
    t_peak: float
    t_end: float

    @property
    def centroid(self) -> float:
        return self.t_peak


def envelope(series, dt: float, period: float = 1e-5) -> np.ndarray:
    """Centered moving-RMS envelope over one carrier period, scaled to amplitude."""
    x = np.asarray(series, dtype=float)
    width = max(1, int(round(period / dt)))
    ms = uniform_filter1d(x * x, size=width, mode="constant", origin=0)
    return np.sqrt(2.0 * np.maximum(ms, 0.0))


def detect_arrivals(
    series, dt: float, threshold_frac: float = 0.1, period: float = 1e-5, t0: float = 0.0
) -> list[Packet]:
    """Wave packets where the envelope exceeds ``threshold_frac`` of its maximum.

    Runs separated by less than one ``period`` are merged.  Arrival times are
    the linearly interpolated threshold crossings, offset by ``t0``.
    """
    env = envelope(series, dt, period)
    top = float(env.max()) if env.size else 0.0
    if top <= 0.0:
        return []
    level = threshold_frac * top
    above = env > level
    edges = np.flatnonzero(np.diff(np.concatenate([[0], above.view(np.int8), [0]])))
    runs = list(zip(edges[::2], edges[1::2]))
    gap = max(1, int(round(period / dt)))
    merged: list[list[int]] = []
    for a, b in runs:
        if merged and a - merged[-1][1] < gap:
            merged[-1][1] = b
        else:
            merged.append([a, b])
    out = []
    for a, b in merged:
        if a == 0:
            t_cross = 0.0
        else:
            e0, e1 = env[a - 1], env[a]
            t_cross = (a - 1 + (level - e0) / (e1 - e0)) * dt
        k = a + int(np.argmax(env[a:b]))
        out.append(Packet(t_arrival=t0 + t_cross, peak=float(env[k]), t_peak=t0 + k * dt, t_end=t0 + (b - 1) * dt))
    return out


def group_velocity(
    record: WaveRecord | np.ndarray,
    sensor_distance: float,
    label: str | None = None,
    reference_time: float = 0.0,
    dt: float | None = None,
    threshold_frac: float = 0.1,
    period: float = 1e-5,
    method: str = "threshold",
) -> float:
    """Distance over first-packet travel time.

    ``reference_time`` is the matching time of the excitation itself (its
    threshold crossing, or its envelope peak for ``method="centroid"``).
    """
    if isinstance(record, WaveRecord):
        series = record.series[label] if label is not None else next(iter(record.series.values()))
        dt = record.dt
    else:
        series = record
    if dt is None:
        raise SignalError("sample step required for a bare series")
    packets = detect_arrivals(series, dt, threshold_frac, period)
    if not packets:
        raise SignalError("no wave packet detected")
    first = packets[0]
    if method == "threshold":
        t = first.t_arrival
    elif method == "centroid":
        t = first.t_peak
    else:
        raise SignalError(f"unknown velocity method {method!r}")
    travel = t - reference_time
    if travel <= 0:
        raise SignalError(f"non-positive travel time {travel}")
    return sensor_distance / travel


@dataclass(frozen=True)
class CrackEstimate:
    x_c: float
    t_direct: float
    t_crack: float


def locate_crack(
    packets_or_record,
    L: float,
    c: float,
    label: str | None = None,
    threshold_frac: float = 0.1,
    period: float = 1e-5,
) -> CrackEstimate:
    """Crack position from direct and crack-reflected arrivals at the far end.

    The reflected packet travels ``x_c`` back to the excited end, ``x_c`` forward
    again and then ``L`` to the sensor, so ``x_c = c (t_crack - t_direct) / 2``.
    """
    if isinstance(packets_or_record, WaveRecord):
        rec = packets_or_record
        series = rec.series[label] if label is not None else next(iter(rec.series.values()))
        packets = detect_arrivals(series, rec.dt, threshold_frac, period)
    else:
        packets = list(packets_or_record)
    if len(packets) < 2:
        raise SignalError("no reflection detected")
    direct, crack = packets[0], packets[1]
    t_d = getattr(direct, "t_arrival", direct)
    t_c = getattr(crack, "t_arrival", crack)
    if not t_c > t_d:
        raise SignalError(f"direct arrival {t_d} must precede the crack arrival {t_c}")
    x = 0.5 * c * (t_c - t_d)
    if x > L:
        raise SignalError(f"estimated crack position {x} exceeds the structure length {L}")
    return CrackEstimate(x_c=x, t_direct=t_d, t_crack=t_c)
