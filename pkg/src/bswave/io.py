"""Deterministic CSV and report files.

Numbers are written with 17 significant digits so files round-trip exactly.
Wall-clock timings go to ``timing.txt`` so every other file is byte-identical
between runs of the same configuration.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .record import WaveRecord

__all__ = ["fmt", "flatten_report", "write_outputs", "read_sensor_csv"]

TIMING_KEYS = ("wall_time_s",)


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return "none"
    return str(value)


def flatten_report(report: dict, prefix: str = "") -> list[tuple[str, str]]:
    """``{"a": {"b": 1}, "rows": [{...}]}`` -> ``a.b``, ``rows.0.x`` keys, in insertion order."""
    out = []
    for key, val in report.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.extend(flatten_report(val, name + "."))
        elif isinstance(val, (list, tuple)) and val and isinstance(val[0], dict):
            for i, item in enumerate(val):
                out.extend(flatten_report(item, f"{name}.{i}."))
        elif isinstance(val, (list, tuple)):
            out.append((name, ",".join(fmt(v) for v in val)))
        else:
            out.append((name, fmt(val)))
    return out


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text, newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_outputs(record: WaveRecord | None, report: dict | None, directory, prefix: str = "") -> list[Path]:
    """Write ``sensors.csv``, ``snapshot_*.csv``, ``report.txt`` and ``timing.txt``."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {d}: {exc}") from exc
    written = []
    if record is not None:
        labels = list(record.series)
        lines = [",".join(["time_s", *labels])]
        cols = [record.series[lab] for lab in labels]
        for k in range(record.n_samples):
            lines.append(",".join([fmt(k * record.dt), *(fmt(c[k]) for c in cols)]))
        written.append(_write(d / f"{prefix}sensors.csv", "\n".join(lines) + "\n"))
        for i, snap in enumerate(record.snapshots):
            body = ["x_m,value"] + [f"{fmt(x)},{fmt(v)}" for x, v in zip(snap.x, snap.values)]
            name = f"{prefix}snapshot_{i:03d}_{snap.label}_t{snap.time * 1e6:.3f}us.csv"
            written.append(_write(d / name, "\n".join(body) + "\n"))
    if report is not None:
        items = flatten_report(report)
        body = [f"{k}={v}" for k, v in items if k.rsplit(".", 1)[-1] not in TIMING_KEYS]
        timing = [f"{k}={v}" for k, v in items if k.rsplit(".", 1)[-1] in TIMING_KEYS]
        written.append(_write(d / f"{prefix}report.txt", "\n".join(body) + "\n"))
        if timing:
            written.append(_write(d / f"{prefix}timing.txt", "\n".join(timing) + "\n"))
    return written


def read_sensor_csv(path) -> WaveRecord:
    """Inverse of the ``sensors.csv`` writer."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "time_s":
        raise ValueError(f"{path}: expected a 'time_s,...' header")
    labels = rows[0][1:]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least two samples")
    dt = float(data[-1, 0] - data[0, 0]) / (data.shape[0] - 1)
    return WaveRecord(dt=dt, series={lab: data[:, i + 1].copy() for i, lab in enumerate(labels)})
