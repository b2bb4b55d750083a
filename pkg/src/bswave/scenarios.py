"""End-to-end scenarios: rod and beam wave runs, step-size study, crack sweeps."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import ConfigError, CrackConfig, ScenarioConfig, SectionConfig
from .crack import make_crack
from .elements import GlobalSystem, Mesh1D, aligned_element_count, assemble, make_mesh
from .pim import build_state, precise_expm, simulate
from .record import WaveRecord
from .signal import ToneBurst, decompose, detect_arrivals, group_velocity, locate_crack, toneburst_eval

__all__ = [
    "Model",
    "build_model",
    "snap_step",
    "burst_reference_time",
    "run_rod_wave",
    "run_beam_wave",
    "run_dt_study",
    "run_crack_scenarios",
    "run_diameter_sweep",
]

log = logging.getLogger(__name__)

STEP_TOL = 1e-9


@dataclass
class Model:
    cfg: ScenarioConfig
    mesh: Mesh1D
    system: GlobalSystem
    sensors: dict[str, int]
    snapshot_fields: dict[str, tuple]


def snap_step(tau: float, duration: float) -> tuple[float, bool]:
    """Largest step <= ``tau`` that divides ``duration``; flag if it moved."""
    if tau > duration * (1 + STEP_TOL):
        raise ValueError(f"step {tau} exceeds the load duration {duration}")
    n = math.ceil(duration / tau - STEP_TOL)
    snapped = duration / n
    return snapped, abs(snapped - tau) > STEP_TOL * tau


def burst_reference_time(tb: ToneBurst, dt: float, threshold_frac: float = 0.1) -> float:
    """Threshold-crossing time of the excitation itself, sampled like a record."""
    t = np.arange(0.0, 2.0 * tb.duration + 2.0 * tb.period, dt)
    packets = detect_arrivals(toneburst_eval(replace(tb, amplitude=1.0), t), dt, threshold_frac, tb.period)
    return packets[0].t_arrival


def _component_labels(kind: str):
    return ["u"] if kind == "rod" else ["w", "th"]


def build_model(cfg: ScenarioConfig, n_el: int | None = None) -> Model:
    mat, sec = cfg.material_obj(), cfg.section_obj()
    positions = [c.x for c in cfg.cracks]
    mesh = make_mesh(cfg.length, n_el or cfg.n_el, cfg.structure, positions)
    cracks = [
        make_crack(c.x, c.depth_ratio, mat.E, sec.b, sec.h, sec.shear_factor, cfg.fII_variant) for c in cfg.cracks
    ]
    system = assemble(mesh, mat, sec, cracks, bc=cfg.bc)
    sensors = {}
    for x in cfg.sensor_positions():
        node = mesh.node_at(x, side="right" if x >= cfg.length else "left")
        for comp, lab in enumerate(_component_labels(cfg.structure)):
            full = mesh.dof(node, comp)
            if full in system.free_dofs:
                sensors[f"{lab}_x{x:g}"] = system.reduced(full)
    fields = {}
    nodes = mesh.snapshot_nodes()
    for comp, lab in enumerate(_component_labels(cfg.structure)):
        full = np.array([mesh.dof(n, comp) for n in nodes])
        keep = np.isin(full, system.free_dofs)
        red = np.searchsorted(system.free_dofs, full[keep])
        fields[lab] = (red, mesh.node_x[nodes][keep])
    return Model(cfg, mesh, system, sensors, fields)


def _simulate(model: Model, tau: float, snapshot_times=(), t_end: float | None = None) -> WaveRecord:
    cfg = model.cfg
    tb = cfg.burst_obj()
    st = build_state(model.system.M, model.system.K, model.system.force_dof)
    prop = precise_expm(st.H, tau, cfg.N)
    t_end = cfg.t_end if t_end is None else t_end
    n_steps = math.floor(t_end / tau + 1e-6)
    schedule = decompose(tb) if tb.amplitude != 0 else []
    return simulate(
        st, prop, schedule, n_steps * tau, model.sensors, snapshot_times, model.snapshot_fields
    )


def _aligned_times(times, tau: float):
    return [round(t / tau) * tau for t in times if abs(round(t / tau) * tau - t) <= 1e-6 * tau]


def run_rod_wave(cfg: ScenarioConfig):
    """Rod wave run: sensor histories, snapshots and a velocity report."""
    t0 = time.perf_counter()
    tb = cfg.burst_obj()
    tau, moved = snap_step(cfg.tau, tb.duration)
    if moved:
        log.warning("time step %.6g s snapped to %.17g s to align with the burst", cfg.tau, tau)
    model = build_model(cfg)
    rec = _simulate(model, tau, _aligned_times(cfg.snapshot_times, tau))
    report = {
        "structure": cfg.structure,
        "dofs": model.mesh.n_dofs,
        "free_dofs": model.system.n,
        "n_el": model.mesh.n_el,
        "dt_s": tau,
        "steps": rec.n_samples - 1,
    }
    label = next(iter(rec.series)) if rec.series else None
    x_sensor = cfg.sensor_positions()[0]
    series = rec.series.get(label) if label else None
    if series is not None and np.any(series != 0):
        packets = detect_arrivals(series, rec.dt, cfg.threshold_frac, tb.period)
        ref = burst_reference_time(tb, rec.dt, cfg.threshold_frac)
        report["first_arrival_s"] = packets[0].t_arrival
        report["burst_reference_s"] = ref
        report["peak"] = float(np.max(np.abs(series)))
        report["packets"] = len(packets)
        if x_sensor > 0:
            report["velocity_mps"] = group_velocity(
                series, x_sensor, dt=rec.dt, reference_time=ref, threshold_frac=cfg.threshold_frac, period=tb.period
            )
        if cfg.cracks and len(packets) >= 2:
            est = locate_crack(packets, cfg.length, cfg.material_obj().c0)
            report["crack_estimate_m"] = est.x_c
            report["crack_arrival_s"] = est.t_crack
    else:
        report["peak"] = 0.0
    report["wall_time_s"] = time.perf_counter() - t0
    return rec, report


def run_beam_wave(cfg: ScenarioConfig):
    """Beam wave run; compares deflection and rotation at the first sensor."""
    t0 = time.perf_counter()
    tb = cfg.burst_obj()
    tau, moved = snap_step(cfg.tau, tb.duration)
    if moved:
        log.warning("time step %.6g s snapped to %.17g s to align with the burst", cfg.tau, tau)
    model = build_model(cfg)
    rec = _simulate(model, tau, _aligned_times(cfg.snapshot_times, tau))
    x = cfg.sensor_positions()[0]
    w, th = rec.series[f"w_x{x:g}"], rec.series[f"th_x{x:g}"]
    report = {
        "structure": cfg.structure,
        "dofs": model.mesh.n_dofs,
        "free_dofs": model.system.n,
        "n_el": model.mesh.n_el,
        "dt_s": tau,
        "steps": rec.n_samples - 1,
        "deflection_peak_m": float(np.max(np.abs(w))),
        "rotation_peak_rad": float(np.max(np.abs(th))),
    }
    if report["rotation_peak_rad"] > 0:
        report["deflection_rotation_ratio"] = report["deflection_peak_m"] / report["rotation_peak_rad"]
        pw = detect_arrivals(w, rec.dt, cfg.threshold_frac, tb.period)
        pt = detect_arrivals(th, rec.dt, cfg.threshold_frac, tb.period)
        ref = burst_reference_time(tb, rec.dt, cfg.threshold_frac)
        report["arrival_w_s"] = pw[0].t_arrival
        report["arrival_theta_s"] = pt[0].t_arrival
        report["arrival_difference_s"] = abs(pw[0].t_arrival - pt[0].t_arrival)
        if x > 0:
            report["velocity_mps"] = x / (pw[0].t_arrival - ref)
        if cfg.cracks and len(pw) >= 2:
            report["crack_arrival_s"] = pw[1].t_arrival
    report["wall_time_s"] = time.perf_counter() - t0
    return rec, report


def run_dt_study(cfg: ScenarioConfig, dt_list=None):
    """PIM runs at several steps compared at coincident sample times.

    Deviation is ``max |u - u_ref| / max |u_ref|`` over every displacement DOF
    at the times shared with the finest step.  Steps longer than the burst are
    reported invalid and not run.
    """
    tb = cfg.burst_obj()
    dt_list = list(cfg.dt_list if dt_list is None else dt_list)
    model = build_model(cfg)
    all_dofs = np.arange(model.system.n)
    full_model = replace(model, sensors={f"d{i}": i for i in all_dofs})
    rows, runs = [], {}
    for dt in dt_list:
        row = {"dt_requested_s": dt}
        try:
            tau, moved = snap_step(dt, tb.duration)
        except ValueError:
            row.update(valid=False, reason="step exceeds the excitation duration")
            rows.append(row)
            continue
        if moved:
            log.warning("time step %.6g s snapped to %.17g s to align with the burst", dt, tau)
        rec = _simulate(full_model, tau, _aligned_times(cfg.snapshot_times, tau))
        row.update(valid=True, dt_s=tau, snapped=moved, steps=rec.n_samples - 1)
        runs[dt] = rec
        rows.append(row)
    valid = [r for r in rows if r["valid"]]
    if valid:
        ref_row = min(valid, key=lambda r: r["dt_s"])
        ref = runs[ref_row["dt_requested_s"]]
        ref_mat = np.column_stack(list(ref.series.values()))
        scale = np.max(np.abs(ref_mat)) or 1.0
        for row in valid:
            rec = runs[row["dt_requested_s"]]
            mat = np.column_stack(list(rec.series.values()))
            idx_ref, idx = _coincident(ref.dt, rec.dt, ref.n_samples, rec.n_samples)
            row["coincident_samples"] = len(idx)
            row["max_rel_deviation"] = float(np.max(np.abs(mat[idx] - ref_mat[idx_ref]))) / scale if len(idx) else 0.0
    report = {"reference_dt_s": min((r["dt_s"] for r in valid), default=None), "rows": rows}
    return runs, report


def _coincident(dt_ref: float, dt: float, n_ref: int, n: int):
    k = np.arange(n)
    pos = k * dt / dt_ref
    j = np.rint(pos).astype(int)
    ok = (np.abs(pos - j) <= 1e-6) & (j < n_ref)
    return j[ok], k[ok]


def _crack_job(args):
    cfg, n_el = args
    tb = cfg.burst_obj()
    tau, _ = snap_step(cfg.tau, tb.duration)
    model = build_model(cfg, n_el)
    return _simulate(model, tau), model.mesh.l_e


def _direct_window_deviation(series_list, dt: float, threshold_frac: float, period: float):
    """Max deviation of each series from the last over the last one's first packet."""
    ref = series_list[-1]
    first = detect_arrivals(ref, dt, threshold_frac, period)[0]
    i = int(round(first.t_end / dt)) + 1
    scale = np.max(np.abs(ref[:i]))
    return [float(np.max(np.abs(s[:i] - ref[:i])) / scale) for s in series_list], first.t_end


def run_crack_scenarios(cfg: ScenarioConfig, jobs: int = 1):
    """Crack-location sweep on a rod plus a mid-span cracked beam.

    The element count is raised from ``cfg.n_el`` until every crack lies on an
    element boundary.
    """
    if cfg.section.shape != "rectangular":
        raise ConfigError("section.shape", "crack sweeps need a rectangular section (b, h)")
    t0 = time.perf_counter()
    tb = cfg.burst_obj()
    L = cfg.length
    positions = [f * L for f in cfg.sweep_fractions]
    n_el = aligned_element_count(L, positions, cfg.n_el)
    if n_el != cfg.n_el:
        log.info("using %d elements so every crack lies on an element boundary", n_el)
    cfgs = [replace(cfg, cracks=[CrackConfig(x=x, depth_ratio=cfg.sweep_depth_ratio)]) for x in positions]
    work = [(c, n_el) for c in cfgs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_crack_job, work))
    else:
        results = [_crack_job(w) for w in work]
    c = cfg.material_obj().c0
    entries, records = [], []
    label = None
    for x, (rec, l_e) in zip(positions, results):
        label = label or next(iter(rec.series))
        series = rec.series[label]
        packets = detect_arrivals(series, rec.dt, cfg.threshold_frac, tb.period)
        entry = {"x_c_m": x, "packets": len(packets), "element_length_m": l_e}
        if len(packets) >= 2:
            est = locate_crack(packets, L, c)
            entry.update(
                t_direct_s=est.t_direct,
                t_crack_s=est.t_crack,
                crack_estimate_m=est.x_c,
                error_m=abs(est.x_c - x),
                crack_peak_ratio=packets[1].peak / packets[0].peak,
            )
        entries.append(entry)
        records.append(rec)
    devs, t_window = _direct_window_deviation([r.series[label] for r in records], records[0].dt, cfg.threshold_frac, tb.period)
    for e, d in zip(entries, devs):
        e["direct_deviation"] = d
    arrivals = [e.get("t_crack_s", math.nan) for e in entries]
    report = {
        "n_el": n_el,
        "element_length_m": L / n_el,
        "sensor": label,
        "entries": entries,
        "crack_arrival_increasing": bool(all(b > a for a, b in zip(arrivals, arrivals[1:]))),
        "direct_window_end_s": t_window,
        "max_direct_deviation": max(devs),
    }
    beam_rec = None
    if cfg.beam_variant:
        beam_rec, beam_report = run_cracked_beam(cfg)
        report["beam"] = beam_report
    report["wall_time_s"] = time.perf_counter() - t0
    return records, beam_rec, report


def run_cracked_beam(cfg: ScenarioConfig, length: float = 1.0, n_el: int = 32):
    """Aluminum beam with a mid-span crack; crack speed taken from an intact run."""
    base = replace(
        cfg,
        structure="beam",
        material="aluminum",
        length=length,
        section=SectionConfig(shape="rectangular", d=None, b=0.012, h=0.012),
        n_el=n_el,
        sensors=None,
        cracks=[],
        snapshot_times=[],
    )
    intact_rec, intact = run_beam_wave(base)
    cracked = replace(base, cracks=[CrackConfig(x=0.5 * length, depth_ratio=cfg.sweep_depth_ratio)])
    rec, report = run_beam_wave(cracked)
    report["intact_velocity_mps"] = intact.get("velocity_mps")
    tb = cfg.burst_obj()
    w = rec.series[f"w_x{length:g}"]
    packets = detect_arrivals(w, rec.dt, cfg.threshold_frac, tb.period)
    report["packets"] = len(packets)
    if len(packets) >= 2 and intact.get("velocity_mps"):
        try:
            report["crack_estimate_m"] = locate_crack(packets, length, intact["velocity_mps"]).x_c
        except ValueError as exc:
            report["crack_estimate_error"] = str(exc)
    return rec, report


def run_diameter_sweep(cfg: ScenarioConfig, diameters=None):
    """Right-end response of circular rods of several diameters."""
    diameters = list(cfg.diameters if diameters is None else diameters) or [0.008, 0.012, 0.016]
    rows, records = [], []
    for d in diameters:
        c = replace(cfg, section=SectionConfig(shape="circular", d=d), cracks=[])
        rec, rep = run_rod_wave(c)
        rows.append({"diameter_m": d, "first_arrival_s": rep.get("first_arrival_s"), "peak": rep["peak"]})
        records.append(rec)
    return records, {"rows": rows}
