"""Named initial profiles shared by all scenarios."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigInvalid
from ..grid import GridField
from .io import read_snapshot


def build_profile(spec: dict, n: int) -> GridField:
    """Materialize an initial profile: named shape or sample file."""
    if "file" in spec:
        values, _t = read_snapshot(Path(spec["file"]))
        if values.size != n:
            raise ConfigInvalid(f"sample file has {values.size} nodes, expected {n}")
        return GridField(values)
    name = spec.get("name")
    x = np.arange(n) / n
    if name == "constant":
        return GridField(np.full(n, float(spec.get("value", 1.0))))
    if name == "sine":
        mean = float(spec.get("mean", 0.0))
        amp = float(spec.get("amplitude", 1.0))
        k = int(spec.get("wavenumber", 1))
        return GridField(mean + amp * np.sin(2.0 * np.pi * k * x))
    if name == "cosine":
        mean = float(spec.get("mean", 0.0))
        amp = float(spec.get("amplitude", 1.0))
        k = int(spec.get("wavenumber", 1))
        return GridField(mean + amp * np.cos(2.0 * np.pi * k * x))
    raise ConfigInvalid(f"unknown initial profile {spec!r}")


def lattice_profile(spec: dict, n: int, q: float = 2.0) -> np.ndarray:
    """Integer heights realizing a continuum profile under the N^q rescaling."""
    f = build_profile(spec, n)
    return np.rint(f.values * n**q).astype(np.int64)
