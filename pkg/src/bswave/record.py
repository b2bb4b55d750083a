from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Snapshot:
    time: float
    x: np.ndarray
    values: np.ndarray
    label: str = "u"


@dataclass
class WaveRecord:
    """Uniformly sampled sensor histories and full-field snapshots.

    ``series[label][k]`` is the value at ``k * dt``.
    """

    dt: float
    series: dict[str, np.ndarray] = field(default_factory=dict)
    snapshots: list[Snapshot] = field(default_factory=list)
    energy: np.ndarray | None = field(default=None, repr=False)
    final_state: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_samples(self) -> int:
        return len(next(iter(self.series.values()))) if self.series else 0

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt
