"""Scenario orchestration: dispatch a validated config, emit artifacts.

Every run writes a manifest.json (config, config hash, code version, wall
time) next to its numeric outputs.  All writes go through the atomic helpers
in :mod:`.io`, so a crashed run never leaves a truncated artifact behind.
Nothing is written outside the configured output directory.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from ..grid import GridField, RegParams
from ..kmc import EventKind, KmcParams, MicroState, make_stream, run_ensemble, run_trajectory
from ..mesoscale import MesoParams, integrate_meso
from ..pde import solve_h_equation, solve_pde
from ..spectral import decay_audit, lyapunov_audit
from ..statmech import scaled_tension_limit, surface_tension
from .compare import compare_scales
from .config import RunConfig
from .io import read_snapshot, write_csv, write_json, write_manifest, write_ndjson, write_snapshot
from .profiles import build_profile


def _write_fields(out: Path, times, fields) -> None:
    for i, (t, f) in enumerate(zip(times, fields)):
        write_snapshot(out / f"snap_{i:04d}.bin", f.values, float(t))


def _run_pde(cfg: RunConfig, out: Path) -> None:
    p = cfg.parameters
    u0 = build_profile(p["initial"], p["N_g"])
    reg = RegParams(epsilon=p["epsilon"], alpha=p["alpha"])
    report, snaps = solve_pde(
        u0, reg, p["t_final"], tol=p["tol"], sample_dt=p["sample_dt"],
    )
    write_csv(
        out / "report.csv",
        ["t", "min_u", "F", "E", "F_eps", "log_invariant", "energy_integral"],
        zip(report.times, report.min_u, report.F, report.E,
            report.F_eps, report.log_invariant, report.energy_integral),
    )
    write_json(out / "summary.json", {
        "min_u_overall": report.min_u_overall,
        "steps_accepted": report.steps_accepted,
        "steps_rejected": report.steps_rejected,
    })
    _write_fields(out, report.times, snaps)


def _run_h_equation(cfg: RunConfig, out: Path) -> None:
    p = cfg.parameters
    h0 = build_profile(p["initial"], p["N_g"])
    times, fields = solve_h_equation(h0, p["t_final"], dt=p["dt"], sample_dt=p["sample_dt"])
    _write_fields(out, times, fields)


def _run_meso(cfg: RunConfig, out: Path) -> None:
    p = cfg.parameters
    params = MesoParams(
        hop_coef=p["hop_coef"], dep_coef=p["dep_coef"], beta=p["beta"],
        N=p["N"], laplacian_scaling=p["laplacian_scaling"],
    )
    h0 = build_profile(p["initial"], p["N"])
    times, fields = integrate_meso(
        h0, params, p["t_final"], dt_ctrl=p["dt_ctrl"], sample_dt=p["sample_dt"],
    )
    x = np.arange(p["N"]) / p["N"]
    rows = []
    for t, f in zip(times, fields):
        for k in range(p["N"]):
            rows.append((float(t), float(x[k]), float(f.values[k])))
    write_csv(out / "snapshots.csv", ["t", "x_k", "h_k"], rows)


def _run_kmc(cfg: RunConfig, out: Path) -> None:
    p = cfg.parameters
    heights = np.rint(build_profile(p["initial"], p["N"]).values).astype(np.int64)
    state = MicroState(heights)
    params = KmcParams(
        beta=p["beta"], p=p["p"], rho_evap=p["rho_evap"],
        tau_dep_inv=p["tau_dep_inv"], mu_dep=p["mu_dep"], seed=cfg.seed,
    )
    sample_times = np.linspace(0.0, p["t_final"], p["n_samples"])
    traj = run_trajectory(
        state.copy(), params, p["t_final"], rng=make_stream(cfg.seed, 0),
        sample_times=sample_times, record_events=p["record_events"],
        max_events=p["max_events"],
    )
    if p["record_events"]:
        write_ndjson(out / "events.ndjson", (
            {"t": float(t), "event_kind": EventKind(int(k)).name.lower(), "site": int(s)}
            for t, k, s in zip(traj.event_times, traj.event_kinds, traj.event_sites)
        ))
    write_ndjson(out / "snapshots.ndjson", (
        {"t": float(t), "heights": [int(v) for v in row]}
        for t, row in zip(traj.sample_times, traj.samples)
    ))
    ens = run_ensemble(state, params, p["t_final"], p["n_reps"], sample_times=sample_times)
    rows = []
    for i, t in enumerate(ens.sample_times):
        for site in range(state.size):
            rows.append((float(t), site, float(ens.mean[i, site]), float(ens.variance[i, site])))
    write_csv(out / "ensemble.csv", ["t", "site", "mean", "variance"], rows)


def _run_statmech_table(cfg: RunConfig, out: Path) -> None:
    p = cfg.parameters
    us = np.linspace(p["u_min"], p["u_max"], p["num"])
    rows = []
    for u in us:
        sigma, eta_star = surface_tension(float(u), p["beta"], p=p["p"])
        scaled = (
            scaled_tension_limit(float(u), p["beta"], p["kappa"]) if p["p"] == 2 else float("nan")
        )
        rows.append((float(u), eta_star, sigma, scaled))
    write_csv(out / "table.csv", ["u", "eta_star", "sigma_D", "kappa_scaled"], rows)


def load_trajectory(traj_dir: Path) -> tuple[np.ndarray, list[GridField]]:
    """Read a snap_*.bin sequence (with sidecars) back into fields."""
    paths = sorted(Path(traj_dir).glob("snap_*.bin"))
    if not paths:
        raise FileNotFoundError(f"no snap_*.bin files under {traj_dir}")
    times, fields = [], []
    for path in paths:
        values, t = read_snapshot(path)
        times.append(t)
        fields.append(GridField(values))
    return np.array(times), fields


def _run_spectral_audit(cfg: RunConfig, out: Path) -> None:
    p = cfg.parameters
    times, fields = load_trajectory(Path(p["traj_dir"]))
    results = {}
    for label, s in (("s1", p["s1"]), ("s2", p["s2"])):
        rep = lyapunov_audit(times, fields, s)
        results[label] = {
            "s": float(rep.s), "sigma": float(rep.sigma), "binding": bool(rep.binding),
            "holds": bool(rep.holds), "worst_violation": float(rep.worst_violation),
            "h2_nonincreasing": bool(rep.h2_nonincreasing),
        }
    dec = decay_audit(times, fields, min(p["s1"], p["s2"]), max(p["s1"], p["s2"]))
    results["decay"] = {
        "s1": float(dec.s1), "s2": float(dec.s2),
        "fitted_c": float(dec.fitted_c), "holds": bool(dec.holds),
    }
    write_json(out / "audit.json", results)


def _trend_decreasing(values: list[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _run_compare(cfg: RunConfig, out: Path) -> None:
    p = cfg.parameters
    amp = p["amplitude"]
    initial = {"name": "sine", "amplitude": amp, "wavenumber": 1}
    times = np.linspace(p["t_bar"] / p["n_times"], p["t_bar"], p["n_times"])
    pde_cfg = {"initial": initial, "N_g": p["pde_N_g"]}

    rows: list[tuple[str, float, float]] = []
    meso_final: list[float] = []
    for n in p["meso_ladder"]:
        rep = compare_scales(None, {"N": int(n)}, pde_cfg, times)
        rows.extend(rep.rows)
        meso_final.append(rep.rows[-1][2])
    kmc_final: list[float] = []
    for n, m, n_reps in p["kmc_ladder"]:
        kmc_cfg = {
            "N": int(n), "M": int(m), "n_reps": int(n_reps),
            "beta": p["beta"], "seed": cfg.seed, "time_scale": p["time_scale"],
        }
        rep = compare_scales(kmc_cfg, None, pde_cfg, times)
        rows.extend(rep.rows)
        kmc_final.append(rep.rows[-1][2])

    write_csv(out / "compare.csv", ["pair", "t", "l2_distance"], rows)
    write_json(out / "verdict.json", {
        "meso_vs_pde_final_distances": meso_final,
        "kmc_vs_pde_final_distances": kmc_final,
        "meso_trend_decreasing": _trend_decreasing(meso_final),
        "kmc_trend_decreasing": _trend_decreasing(kmc_final),
    })


_DISPATCH = {
    "pde": _run_pde,
    "h_equation": _run_h_equation,
    "meso": _run_meso,
    "kmc": _run_kmc,
    "statmech_table": _run_statmech_table,
    "spectral_audit": _run_spectral_audit,
    "compare": _run_compare,
}


def run(config: RunConfig) -> Path:
    """Execute one scenario; returns the output directory it populated."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    _DISPATCH[config.scenario](config, out)
    write_manifest(out, config.canonical(), time.perf_counter() - t0)
    return out
