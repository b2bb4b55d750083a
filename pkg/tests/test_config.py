import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bswave.config import ConfigError, ScenarioConfig, load_config, preset
from bswave.io import flatten_report, fmt, read_sensor_csv, write_outputs
from bswave.record import Snapshot, WaveRecord
from bswave.scenarios import build_model


@pytest.mark.parametrize("name", ["rod", "beam", "crack-rod"])
def test_presets_round_trip(name):
    cfg = preset(name)
    again = ScenarioConfig.from_dict(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.to_json() == cfg.to_json()


@given(
    length=st.floats(0.1, 10.0),
    n_el=st.integers(1, 64),
    tau=st.floats(1e-8, 1e-5),
    d=st.floats(1e-3, 0.1),
)
@settings(max_examples=50, deadline=None)
def test_round_trip_property(length, n_el, tau, d):
    cfg = ScenarioConfig.from_dict({"length": length, "n_el": n_el, "tau": tau, "section": {"d": d}})
    assert ScenarioConfig.from_dict(json.loads(cfg.to_json())) == cfg


def test_custom_material():
    cfg = ScenarioConfig.from_dict({"material": {"E": 1e9, "nu": 0.25, "rho": 1000.0}})
    assert cfg.material_obj().c0 == pytest.approx(1000.0)


def _crack_cfg(**kw):
    base = preset("crack-rod").to_dict()
    base.update(kw)
    return base


@pytest.mark.parametrize(
    "data, path",
    [
        ({"length": -1.0}, "length"),
        ({"length": 0.0}, "length"),
        ({"tau": 0.0}, "tau"),
        ({"tau": -1e-6}, "tau"),
        ({"n_el": 0}, "n_el"),
        ({"N": 50}, "N"),
        ({"bc": "clamped"}, "bc"),
        ({"structure": "plate"}, "structure"),
        ({"material": "copper"}, "material"),
        ({"material": {"E": 1e9, "nu": 0.7, "rho": 1.0}}, "material.nu"),
        ({"section": {"shape": "circular", "d": -0.01}}, "section.d"),
        ({"sensors": [2.0]}, "sensors[0]"),
        ({"snapshot_times": [1.0]}, "snapshot_times[0]"),
        ({"bogus": 1}, "bogus"),
        ({"section": {"radius": 1}}, "section.radius"),
        ({"threshold_frac": 1.5}, "threshold_frac"),
        (_crack_cfg(cracks=[{"x": 0.75, "depth_ratio": 1.0}]), "cracks[0].depth_ratio"),
        (_crack_cfg(cracks=[{"x": 0.75, "depth_ratio": 1.2}]), "cracks[0].depth_ratio"),
        (_crack_cfg(cracks=[{"x": 0.7, "depth_ratio": 0.2}]), "cracks[0].x"),
        (_crack_cfg(cracks=[{"x": 1.5, "depth_ratio": 0.2}]), "cracks[0].x"),
        ({"cracks": [{"x": 0.75}]}, "section.shape"),
    ],
)
def test_rejections(data, path):
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_dict(data)
    assert info.value.path == path


def test_load_with_preset(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"preset": "beam", "n_el": 8}))
    cfg = load_config(p)
    assert cfg.structure == "beam" and cfg.n_el == 8 and cfg.material == "steel"


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


@pytest.mark.parametrize("kind", ["rod", "beam"])
@pytest.mark.parametrize("n_el", [2, 8, 16])
def test_model_dof_accounting(kind, n_el):
    cfg = ScenarioConfig(structure=kind, n_el=n_el)
    model = build_model(cfg)
    per = 1 if kind == "rod" else 2
    assert model.mesh.n_dofs == per * (10 * n_el + 1)
    assert model.system.n == model.mesh.n_dofs


def test_cracked_model_dofs():
    model = build_model(preset("crack-rod"))
    assert model.mesh.n_dofs == 162


class TestIO:
    def test_fmt(self):
        assert fmt(True) == "true" and fmt(None) == "none" and fmt(3) == "3"
        x = 0.1 + 0.2
        assert float(fmt(x)) == x

    def test_flatten(self):
        items = flatten_report({"a": {"b": 1}, "rows": [{"x": 1.5}, {"x": 2.0}], "v": [1, 2]})
        assert items == [("a.b", "1"), ("rows.0.x", "1.5"), ("rows.1.x", "2"), ("v", "1,2")]

    def test_write_and_read(self, tmp_path):
        rng = np.random.default_rng(3)
        rec = WaveRecord(
            dt=1e-7,
            series={"u_x1.5": rng.standard_normal(20), "u_x0": rng.standard_normal(20)},
            snapshots=[Snapshot(1e-6, np.linspace(0, 1, 5), rng.standard_normal(5), "u")],
        )
        files = write_outputs(rec, {"dofs": 161, "velocity_mps": 5050.5, "wall_time_s": 0.1}, tmp_path)
        names = sorted(f.name for f in files)
        assert names == ["report.txt", "sensors.csv", "snapshot_000_u_t1.000us.csv", "timing.txt"]
        assert (tmp_path / "sensors.csv").read_text().splitlines()[0] == "time_s,u_x1.5,u_x0"
        assert (tmp_path / "snapshot_000_u_t1.000us.csv").read_text().splitlines()[0] == "x_m,value"
        report = (tmp_path / "report.txt").read_text()
        assert "dofs=161" in report and "wall_time_s" not in report
        back = read_sensor_csv(tmp_path / "sensors.csv")
        assert back.dt == pytest.approx(1e-7, rel=1e-12)
        for k, v in rec.series.items():
            np.testing.assert_array_equal(back.series[k], v)

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError):
            write_outputs(None, {"a": 1}, blocker / "sub")
