"""Artifact emission: atomic writes, CSV/NDJSON reports, binary snapshots."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode())


def write_json(path: Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    atomic_write_text(path, buf.getvalue())


def write_ndjson(path: Path, records) -> None:
    atomic_write_text(path, "".join(json.dumps(r) + "\n" for r in records))


def write_snapshot(path: Path, values: np.ndarray, t: float) -> None:
    """Raw little-endian float64 array plus a JSON sidecar {N_g, t}."""
    atomic_write_bytes(path, np.asarray(values, dtype="<f8").tobytes())
    write_json(path.with_suffix(path.suffix + ".json"), {"N_g": int(len(values)), "t": t})


def read_snapshot(path: Path) -> tuple[np.ndarray, float]:
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    values = np.frombuffer(path.read_bytes(), dtype="<f8")
    if values.size != sidecar["N_g"]:
        raise ValueError(f"snapshot {path} length disagrees with its sidecar")
    return values.copy(), float(sidecar["t"])


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def write_manifest(out_dir: Path, config: dict, wall_time_s: float) -> None:
    from .. import __version__

    write_json(out_dir / "manifest.json", {
        "config": config,
        "config_hash": config_hash(config),
        "code_version": __version__,
        "wall_time_s": wall_time_s,
    })
