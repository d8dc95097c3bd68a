import json

import numpy as np
import pytest

from crystalflow.errors import ConfigInvalid
from crystalflow.harness.compare import CompareReport, compare_scales
from crystalflow.harness.config import RunConfig
from crystalflow.harness.io import (
    atomic_write_text,
    config_hash,
    read_snapshot,
    write_snapshot,
)
from crystalflow.harness.profiles import build_profile, lattice_profile
from crystalflow.harness.runner import run


def make_pde_config(tmp_path, **overrides):
    doc = {
        "scenario": "pde",
        "out_dir": str(tmp_path / "out"),
        "seed": 0,
        "parameters": {
            "N_g": 64,
            "epsilon": 0.01,
            "alpha": 0.5,
            "t_final": 0.0005,
            "initial": {"name": "sine", "mean": 1.0, "amplitude": 0.5},
        },
    }
    doc.update(overrides)
    return doc


class TestConfig:
    def test_valid_document(self, tmp_path):
        cfg = RunConfig.from_dict(make_pde_config(tmp_path))
        assert cfg.scenario == "pde"
        assert cfg.parameters["tol"] == 1e-7  # default filled in

    def test_unknown_top_level_key(self, tmp_path):
        with pytest.raises(ConfigInvalid):
            RunConfig.from_dict(make_pde_config(tmp_path, bogus=1))

    def test_unknown_parameter(self, tmp_path):
        doc = make_pde_config(tmp_path)
        doc["parameters"]["mystery"] = 3
        with pytest.raises(ConfigInvalid):
            RunConfig.from_dict(doc)

    def test_missing_required(self, tmp_path):
        doc = make_pde_config(tmp_path)
        del doc["parameters"]["epsilon"]
        with pytest.raises(ConfigInvalid):
            RunConfig.from_dict(doc)

    def test_bad_scenario(self):
        with pytest.raises(ConfigInvalid):
            RunConfig.from_dict({"scenario": "nope", "parameters": {}})

    def test_bad_seed(self, tmp_path):
        with pytest.raises(ConfigInvalid):
            RunConfig.from_dict(make_pde_config(tmp_path, seed=-1))

    def test_from_file_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        with pytest.raises(ConfigInvalid):
            RunConfig.from_file(p)

    def test_config_hash_stable(self, tmp_path):
        a = RunConfig.from_dict(make_pde_config(tmp_path)).canonical()
        b = RunConfig.from_dict(make_pde_config(tmp_path)).canonical()
        assert config_hash(a) == config_hash(b)


class TestIo:
    def test_atomic_write_no_partial_file(self, tmp_path):
        p = tmp_path / "deep" / "file.txt"
        atomic_write_text(p, "hello")
        assert p.read_text() == "hello"
        leftovers = [q for q in p.parent.iterdir() if q.name.startswith(".")]
        assert leftovers == []

    def test_snapshot_round_trip(self, tmp_path):
        values = np.linspace(-1, 1, 32)
        write_snapshot(tmp_path / "s.bin", values, 0.25)
        back, t = read_snapshot(tmp_path / "s.bin")
        assert t == 0.25
        assert np.array_equal(back, values)

    def test_snapshot_sidecar_mismatch(self, tmp_path):
        write_snapshot(tmp_path / "s.bin", np.zeros(16), 0.0)
        sidecar = tmp_path / "s.bin.json"
        doc = json.loads(sidecar.read_text())
        doc["N_g"] = 99
        sidecar.write_text(json.dumps(doc))
        with pytest.raises(ValueError):
            read_snapshot(tmp_path / "s.bin")


class TestProfiles:
    def test_named_profiles(self):
        f = build_profile({"name": "constant", "value": 2.0}, 16)
        assert np.all(f.values == 2.0)
        g = build_profile({"name": "sine", "amplitude": 0.5, "wavenumber": 2}, 64)
        assert np.max(g.values) == pytest.approx(0.5, abs=1e-3)

    def test_unknown_profile(self):
        with pytest.raises(ConfigInvalid):
            build_profile({"name": "sawtooth"}, 16)

    def test_lattice_profile_scaling(self):
        h = lattice_profile({"name": "sine", "amplitude": 0.01}, 32, q=2.0)
        assert h.dtype == np.int64
        assert np.max(h) == round(0.01 * 32**2)

    def test_file_profile(self, tmp_path):
        values = 1.0 + 0.1 * np.sin(2 * np.pi * np.arange(32) / 32)
        write_snapshot(tmp_path / "init.bin", values, 0.0)
        f = build_profile({"file": str(tmp_path / "init.bin")}, 32)
        assert np.array_equal(f.values, values)


class TestRunner:
    def test_pde_constant_initial_gives_zero_energy(self, tmp_path):
        doc = make_pde_config(tmp_path)
        doc["parameters"]["initial"] = {"name": "constant", "value": 1.0}
        out = run(RunConfig.from_dict(doc))
        rows = (out / "report.csv").read_text().strip().split("\n")
        header = rows[0].split(",")
        e_col = header.index("E")
        for row in rows[1:]:
            assert abs(float(row.split(",")[e_col])) < 1e-20
        assert (out / "manifest.json").exists()

    def test_rerun_is_byte_identical(self, tmp_path):
        out1 = run(RunConfig.from_dict(make_pde_config(tmp_path, out_dir=str(tmp_path / "a"))))
        out2 = run(RunConfig.from_dict(make_pde_config(tmp_path, out_dir=str(tmp_path / "b"))))
        assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()
        assert (out1 / "snap_0003.bin").read_bytes() == (out2 / "snap_0003.bin").read_bytes()

    def test_kmc_outputs(self, tmp_path):
        doc = {
            "scenario": "kmc",
            "out_dir": str(tmp_path / "k"),
            "seed": 5,
            "parameters": {
                "N": 16, "beta": 1.0, "t_final": 10.0, "n_reps": 3,
                "record_events": True,
                "initial": {"name": "constant", "value": 0.0},
            },
        }
        out = run(RunConfig.from_dict(doc))
        events = [json.loads(l) for l in (out / "events.ndjson").read_text().splitlines()]
        assert events and {"t", "event_kind", "site"} <= set(events[0])
        snaps = [json.loads(l) for l in (out / "snapshots.ndjson").read_text().splitlines()]
        assert len(snaps[0]["heights"]) == 16
        ens = (out / "ensemble.csv").read_text().splitlines()
        assert ens[0] == "t,site,mean,variance"

    def test_kmc_rerun_reproducible(self, tmp_path):
        doc = {
            "scenario": "kmc",
            "seed": 5,
            "parameters": {
                "N": 16, "beta": 1.0, "t_final": 10.0, "n_reps": 2,
                "initial": {"name": "constant", "value": 0.0},
            },
        }
        doc["out_dir"] = str(tmp_path / "a")
        out1 = run(RunConfig.from_dict(doc))
        doc["out_dir"] = str(tmp_path / "b")
        out2 = run(RunConfig.from_dict(doc))
        assert (out1 / "ensemble.csv").read_bytes() == (out2 / "ensemble.csv").read_bytes()

    def test_statmech_table(self, tmp_path):
        doc = {
            "scenario": "statmech_table",
            "out_dir": str(tmp_path / "t"),
            "parameters": {"beta": 1.0, "num": 5},
        }
        out = run(RunConfig.from_dict(doc))
        rows = (out / "table.csv").read_text().splitlines()
        assert rows[0] == "u,eta_star,sigma_D,kappa_scaled"
        assert len(rows) == 6

    def test_spectral_audit_scenario(self, tmp_path):
        h_doc = {
            "scenario": "h_equation",
            "out_dir": str(tmp_path / "h"),
            "parameters": {
                "N_g": 64, "t_final": 0.001,
                "initial": {"name": "cosine", "amplitude": 0.001},
            },
        }
        traj = run(RunConfig.from_dict(h_doc))
        aud_doc = {
            "scenario": "spectral_audit",
            "out_dir": str(tmp_path / "aud"),
            "parameters": {"traj_dir": str(traj), "s1": 0.0, "s2": 2.0},
        }
        out = run(RunConfig.from_dict(aud_doc))
        audit = json.loads((out / "audit.json").read_text())
        assert audit["s2"]["holds"]
        assert audit["decay"]["holds"]


class TestCompare:
    def test_report_rejects_negative_distance(self):
        rep = CompareReport()
        with pytest.raises(ValueError):
            rep.add("x", 0.0, -1.0)

    def test_flat_profiles_agree(self):
        times = np.array([1e-8, 2e-8])
        pde_cfg = {"initial": {"name": "constant", "value": 0.0}, "N_g": 64}
        rep = compare_scales(
            {"N": 64, "M": 8, "n_reps": 8, "beta": 0.5, "seed": 1},
            {"N": 64},
            pde_cfg,
            times,
        )
        for _, _, d in rep.rows:
            assert d < 1e-4  # Monte Carlo noise only

    def test_meso_vs_pde_small_sine(self):
        times = np.array([5e-7, 1e-6])
        pde_cfg = {"initial": {"name": "sine", "amplitude": 0.005}, "N_g": 64}
        rep = compare_scales(None, {"N": 64}, pde_cfg, times)
        ds = rep.distances("meso_vs_pde")
        assert all(d < 1e-6 for d in ds)
