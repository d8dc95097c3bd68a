"""Run configuration: JSON document, schema-validated before any run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigInvalid

SCENARIOS = (
    "kmc", "meso", "pde", "h_equation", "compare", "spectral_audit", "statmech_table",
)

# per-scenario parameter schema: name -> (type, required, default)
_SCHEMAS: dict[str, dict[str, tuple]] = {
    "pde": {
        "N_g": (int, True, None),
        "epsilon": (float, True, None),
        "alpha": (float, True, None),
        "t_final": (float, True, None),
        "sample_dt": (float, False, None),
        "tol": (float, False, 1e-7),
        "initial": (dict, True, None),
    },
    "h_equation": {
        "N_g": (int, True, None),
        "t_final": (float, True, None),
        "dt": (float, False, 1e-4),
        "sample_dt": (float, False, None),
        "initial": (dict, True, None),
    },
    "meso": {
        "N": (int, True, None),
        "hop_coef": (float, True, None),
        "dep_coef": (float, True, None),
        "beta": (float, True, None),
        "t_final": (float, True, None),
        "dt_ctrl": (float, False, 1e-8),
        "sample_dt": (float, False, None),
        "laplacian_scaling": (str, False, "dx2"),
        "initial": (dict, True, None),
    },
    "kmc": {
        "N": (int, True, None),
        "beta": (float, True, None),
        "p": (int, False, 2),
        "rho_evap": (float, False, 0.0),
        "tau_dep_inv": (float, False, 0.0),
        "mu_dep": (float, False, 0.0),
        "t_final": (float, True, None),
        "n_reps": (int, False, 1),
        "n_samples": (int, False, 11),
        "record_events": (bool, False, False),
        "max_events": (int, False, 1_000_000),
        "initial": (dict, True, None),
    },
    "spectral_audit": {
        "traj_dir": (str, True, None),
        "s1": (float, True, None),
        "s2": (float, True, None),
    },
    "statmech_table": {
        "beta": (float, True, None),
        "p": (int, False, 2),
        "u_min": (float, False, -0.5),
        "u_max": (float, False, 0.5),
        "num": (int, False, 11),
        "kappa": (float, False, 100.0),
    },
    "compare": {
        "beta": (float, False, 0.5),
        "amplitude": (float, False, 0.005),
        "t_bar": (float, False, 1e-6),
        "n_times": (int, False, 3),
        "pde_N_g": (int, False, 256),
        "meso_ladder": (list, False, [64, 128, 256]),
        "kmc_ladder": (list, False, [[64, 8, 50], [128, 16, 100], [256, 16, 200]]),
        "time_scale": (float, False, None),
    },
}


@dataclass
class RunConfig:
    scenario: str
    parameters: dict
    out_dir: str = "out"
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigInvalid("config document must be a JSON object")
        allowed_top = {"scenario", "parameters", "out_dir", "seed"}
        unknown = set(doc) - allowed_top
        if unknown:
            raise ConfigInvalid(f"unknown top-level keys: {sorted(unknown)}")
        scenario = doc.get("scenario")
        if scenario not in SCENARIOS:
            raise ConfigInvalid(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
        params = dict(doc.get("parameters", {}))
        schema = _SCHEMAS[scenario]
        unknown = set(params) - set(schema)
        if unknown:
            raise ConfigInvalid(f"unknown parameters for {scenario}: {sorted(unknown)}")
        for name, (typ, required, default) in schema.items():
            if name not in params:
                if required:
                    raise ConfigInvalid(f"{scenario} requires parameter {name!r}")
                params[name] = default
                continue
            v = params[name]
            if typ is float and isinstance(v, int) and not isinstance(v, bool):
                v = float(v)
                params[name] = v
            if v is not None and not isinstance(v, typ):
                raise ConfigInvalid(f"parameter {name!r} must be {typ.__name__}")
        seed = doc.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigInvalid("seed must be a nonnegative integer")
        return cls(
            scenario=scenario, parameters=params,
            out_dir=str(doc.get("out_dir", "out")), seed=seed, raw=doc,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def canonical(self) -> dict:
        return {
            "scenario": self.scenario,
            "parameters": self.parameters,
            "out_dir": self.out_dir,
            "seed": self.seed,
        }
