"""Scenario configuration: JSON in, validated dataclasses out."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .elements import ALUMINUM, BOUNDARY_CONDITIONS, STEEL, Material, MeshError, Section, make_mesh
from .signal import ToneBurst

__all__ = ["ConfigError", "CrackConfig", "SectionConfig", "ScenarioConfig", "load_config", "preset"]

MATERIALS = {"aluminum": ALUMINUM, "steel": STEEL}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _positive(path: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}") from None
    if not math.isfinite(v) or v <= 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return v


@dataclass
class SectionConfig:
    shape: str = "circular"
    d: float | None = 0.012
    b: float | None = None
    h: float | None = None
    shear_factor: float | None = None

    def build(self) -> Section:
        kw = {} if self.shear_factor is None else {"shear_factor": self.shear_factor}
        if self.shape == "circular":
            return Section.circular(self.d, **kw)
        return Section.rectangular(self.b, self.h, **kw)


@dataclass
class CrackConfig:
    x: float
    depth_ratio: float = 0.2


@dataclass
class ScenarioConfig:
    """Everything needed to run one scenario; SI units throughout."""

    structure: str = "rod"
    material: Any = "aluminum"
    length: float = 1.5
    section: SectionConfig = field(default_factory=SectionConfig)
    n_el: int = 16
    bc: str = "free-free"
    burst: dict = field(default_factory=lambda: {"f_c": 100e3, "n_cycles": 5, "amplitude": 1.0})
    tau: float = 5e-5 / 150
    N: int = 20
    t_end: float = 6e-4
    cracks: list[CrackConfig] = field(default_factory=list)
    fII_variant: str = "printed"
    sensors: list[float] | None = None
    snapshot_times: list[float] = field(default_factory=list)
    threshold_frac: float = 0.1
    dt_list: list[float] = field(default_factory=lambda: [5e-5 / 150, 5e-6, 1e-5, 5e-5])
    sweep_fractions: list[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5])
    sweep_depth_ratio: float = 0.2
    diameters: list[float] = field(default_factory=list)
    beam_variant: bool = True
    output_dir: str = "out"

    # -- derived objects -------------------------------------------------
    def material_obj(self) -> Material:
        if isinstance(self.material, str):
            return MATERIALS[self.material]
        return Material(**self.material)

    def section_obj(self) -> Section:
        return self.section.build()

    def burst_obj(self) -> ToneBurst:
        return ToneBurst(**self.burst)

    def sensor_positions(self) -> list[float]:
        return [self.length] if self.sensors is None else list(self.sensors)

    # -- (de)serialization -----------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("$", "configuration must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(data) - known)
        if extra:
            raise ConfigError(extra[0], "unknown field")
        kw = dict(data)
        if "section" in kw:
            sec = kw["section"]
            if not isinstance(sec, dict):
                raise ConfigError("section", "must be an object")
            bad = sorted(set(sec) - set(SectionConfig.__dataclass_fields__))
            if bad:
                raise ConfigError(f"section.{bad[0]}", "unknown field")
            kw["section"] = SectionConfig(**sec)
        if "cracks" in kw:
            cracks = []
            for i, c in enumerate(kw["cracks"] or []):
                if not isinstance(c, dict) or "x" not in c:
                    raise ConfigError(f"cracks[{i}]", "expected an object with 'x' and 'depth_ratio'")
                bad = sorted(set(c) - {"x", "depth_ratio"})
                if bad:
                    raise ConfigError(f"cracks[{i}].{bad[0]}", "unknown field")
                cracks.append(CrackConfig(**c))
            kw["cracks"] = cracks
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def validate(self) -> "ScenarioConfig":
        if self.structure not in ("rod", "beam"):
            raise ConfigError("structure", f"must be 'rod' or 'beam', got {self.structure!r}")
        if isinstance(self.material, str):
            if self.material not in MATERIALS:
                raise ConfigError("material", f"unknown preset {self.material!r}")
        elif isinstance(self.material, dict):
            for key in ("E", "rho"):
                _positive(f"material.{key}", self.material.get(key))
            nu = self.material.get("nu")
            if not isinstance(nu, (int, float)) or not -1.0 < nu < 0.5:
                raise ConfigError("material.nu", f"must lie in (-1, 0.5), got {nu!r}")
        else:
            raise ConfigError("material", "must be a preset name or an object with E, nu, rho")
        _positive("length", self.length)
        sec = self.section
        if sec.shape == "circular":
            _positive("section.d", sec.d)
        elif sec.shape == "rectangular":
            _positive("section.b", sec.b)
            _positive("section.h", sec.h)
        else:
            raise ConfigError("section.shape", f"must be 'circular' or 'rectangular', got {sec.shape!r}")
        if sec.shear_factor is not None:
            _positive("section.shear_factor", sec.shear_factor)
        if not isinstance(self.n_el, int) or isinstance(self.n_el, bool) or self.n_el < 1:
            raise ConfigError("n_el", f"must be a positive integer, got {self.n_el!r}")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ConfigError("bc", f"must be one of {BOUNDARY_CONDITIONS}, got {self.bc!r}")
        try:
            self.burst_obj()
        except (TypeError, ValueError) as exc:
            raise ConfigError("burst", str(exc)) from None
        if float(self.burst.get("amplitude", 1.0)) < 0:
            raise ConfigError("burst.amplitude", "must be nonnegative")
        _positive("tau", self.tau)
        if not isinstance(self.N, int) or not 1 <= self.N <= 40:
            raise ConfigError("N", f"must be an integer in [1, 40], got {self.N!r}")
        _positive("t_end", self.t_end)
        seen = set()
        for i, c in enumerate(self.cracks):
            x = _positive(f"cracks[{i}].x", c.x)
            if x >= self.length:
                raise ConfigError(f"cracks[{i}].x", f"must lie inside (0, {self.length})")
            if not isinstance(c.depth_ratio, (int, float)) or not 0 < c.depth_ratio < 1:
                raise ConfigError(f"cracks[{i}].depth_ratio", f"must lie in (0, 1), got {c.depth_ratio!r}")
            if x in seen:
                raise ConfigError(f"cracks[{i}].x", "duplicate crack location")
            seen.add(x)
            try:
                make_mesh(float(self.length), self.n_el, self.structure, [x])
            except MeshError as exc:
                raise ConfigError(f"cracks[{i}].x", str(exc)) from None
        if self.cracks and self.section.shape != "rectangular":
            raise ConfigError("section.shape", "cracked structures need a rectangular section (b, h)")
        if self.fII_variant not in ("printed", "tada"):
            raise ConfigError("fII_variant", f"must be 'printed' or 'tada', got {self.fII_variant!r}")
        for i, x in enumerate(self.sensor_positions()):
            if not isinstance(x, (int, float)) or not 0 <= x <= self.length:
                raise ConfigError(f"sensors[{i}]", f"must lie in [0, {self.length}]")
        for i, t in enumerate(self.snapshot_times):
            if not isinstance(t, (int, float)) or t < 0 or t > self.t_end:
                raise ConfigError(f"snapshot_times[{i}]", f"must lie in [0, t_end], got {t!r}")
        if not 0 < self.threshold_frac < 1:
            raise ConfigError("threshold_frac", "must lie in (0, 1)")
        for i, dt in enumerate(self.dt_list):
            _positive(f"dt_list[{i}]", dt)
        for i, f in enumerate(self.sweep_fractions):
            if not isinstance(f, (int, float)) or not 0 < f < 1:
                raise ConfigError(f"sweep_fractions[{i}]", f"must lie in (0, 1), got {f!r}")
        if not 0 < self.sweep_depth_ratio < 1:
            raise ConfigError("sweep_depth_ratio", "must lie in (0, 1)")
        for i, d in enumerate(self.diameters):
            _positive(f"diameters[{i}]", d)
        return self


def preset(name: str) -> ScenarioConfig:
    """Built-in scenarios: ``rod`` (aluminum, 1.5 m), ``beam`` (steel, 1.8 m), ``crack-rod``."""
    if name == "rod":
        return ScenarioConfig()
    if name == "beam":
        return ScenarioConfig(
            structure="beam",
            material="steel",
            length=1.8,
            section=SectionConfig(shape="rectangular", d=None, b=0.012, h=0.012),
            n_el=32,
            t_end=8e-4,
        )
    if name == "crack-rod":
        return ScenarioConfig(
            section=SectionConfig(shape="rectangular", d=None, b=0.012, h=0.012),
            cracks=[CrackConfig(x=0.75, depth_ratio=0.2)],
            t_end=7e-4,
        )
    raise ConfigError("preset", f"unknown preset {name!r}")


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    if isinstance(data, dict) and "preset" in data:
        base = preset(data.pop("preset")).to_dict()
        base.update(data)
        data = base
    return ScenarioConfig.from_dict(data)
