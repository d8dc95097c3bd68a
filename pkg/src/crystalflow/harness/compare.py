"""Cross-scale comparison: coarse-grained KMC vs mesoscale ODE vs continuum PDE.

All three models are aligned on the continuum height h over [0, 1): the KMC
ensemble mean is coarse-grained and hydrodynamically rescaled (heights by
N^-2, time by N^-4 for the quadratic potential), the mesoscale system runs
with beta = 1/2 so its exponential factor matches e^{-lap h}, and the
reference is the spectral h-form solver.  Heights are mean-shifted before the
distance (the comparison is between shapes; the mean has its own dynamics
under deposition).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GridMismatch
from ..grid import fourier_coefficients
from ..kmc import KmcParams, MicroState, run_ensemble
from ..mesoscale import MesoParams, integrate_meso
from ..pde import solve_h_equation
from .profiles import build_profile, lattice_profile


@dataclass
class CompareReport:
    rows: list[tuple[str, float, float]] = field(default_factory=list)  # (pair, time, distance)
    verdicts: dict = field(default_factory=dict)

    def add(self, pair: str, time: float, distance: float) -> None:
        if distance < 0:
            raise ValueError("distances must be nonnegative")
        self.rows.append((pair, float(time), float(distance)))

    def distances(self, pair_prefix: str) -> list[float]:
        return [d for (p, _t, d) in self.rows if p.startswith(pair_prefix)]


def _mean_shifted_l2(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise GridMismatch(f"profile shapes differ: {a.shape} vs {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    return float(np.sqrt(np.mean((da - db) ** 2)))


def _eval_at(field_values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation of periodic grid samples at points x."""
    c = fourier_coefficients(field_values)
    n = c.size
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    phases = np.exp(2.0j * np.pi * np.outer(x, k))
    return (phases @ c).real


def reference_solution(initial: dict, n_g: int, times: np.ndarray):
    """Continuum h-form trajectory used as the comparison reference."""
    h0 = build_profile(initial, n_g)
    t_final = float(times[-1]) if times[-1] > 0 else 1e-8
    dt = min(1e-5, t_final / 10.0)
    sample_dt = t_final / max(len(times) - 1, 1)
    ts, fields = solve_h_equation(h0, t_final, dt=dt, sample_dt=sample_dt)
    # map each requested time to the nearest computed sample
    out = []
    for t in times:
        i = int(np.argmin(np.abs(ts - t)))
        out.append(fields[i].values)
    return out


def compare_scales(
    kmc_cfg: dict | None,
    meso_cfg: dict | None,
    pde_cfg: dict,
    times: np.ndarray,
) -> CompareReport:
    """L2 distances between aligned profiles at each sample time.

    ``pde_cfg`` needs {initial, N_g}; ``meso_cfg`` needs {N}; ``kmc_cfg``
    needs {N, M, n_reps, beta, seed} and optionally time_scale (defaults to
    exp(2*beta), undoing the additive coordination-number offset).
    """
    times = np.asarray(times, dtype=float)
    initial = pde_cfg["initial"]
    n_g = int(pde_cfg["N_g"])
    report = CompareReport()
    reference = reference_solution(initial, n_g, times)

    if meso_cfg is not None:
        n = int(meso_cfg["N"])
        params = MesoParams(hop_coef=1.0, dep_coef=1.0, beta=0.5, N=n)
        h0 = build_profile(initial, n)
        t_final = float(times[-1]) if times[-1] > 0 else 1e-10
        ts, fields = integrate_meso(
            h0, params, t_final,
            dt_ctrl=float(meso_cfg.get("dt_ctrl", 1e-10)),
            sample_dt=t_final / max(len(times) - 1, 1),
        )
        x_meso = np.arange(n) / n
        for t, ref in zip(times, reference):
            i = int(np.argmin(np.abs(ts - t)))
            ref_at_nodes = ref if n == n_g else _eval_at(ref, x_meso)
            report.add(f"meso_vs_pde/N={n}", t, _mean_shifted_l2(fields[i].values, ref_at_nodes))

    if kmc_cfg is not None:
        n = int(kmc_cfg["N"])
        m = int(kmc_cfg["M"])
        beta = float(kmc_cfg["beta"])
        time_scale = float(kmc_cfg.get("time_scale") or np.exp(2.0 * beta))
        heights = lattice_profile(initial, n, q=2.0)
        state = MicroState(heights)
        params = KmcParams(beta=beta, p=2, seed=int(kmc_cfg.get("seed", 0)))
        t_phys = times * n**4 * time_scale
        result = run_ensemble(
            state, params, float(t_phys[-1]), int(kmc_cfg["n_reps"]),
            sample_times=t_phys,
        )
        centers = (np.arange(n // m) * m + 0.5 * (m - 1)) / n
        for idx, (t, ref) in enumerate(zip(times, reference)):
            # box-average the real-valued ensemble mean, then rescale by N^-2
            h_boxes = result.mean[idx].reshape(n // m, m).mean(axis=1) * n**-2.0
            ref_at_centers = _eval_at(ref, centers)
            report.add(f"kmc_vs_pde/N={n}", t, _mean_shifted_l2(h_boxes, ref_at_centers))

    return report
