import json
from pathlib import Path

import numpy as np
import pytest

import lacelab as ll
from lacelab.cli import (ConfigError, RunConfig, load_config, main,
                         parse_kernel_flag, run_all)

GOOD_PARAMS = {"theta": 2.5, "eps": 0.4, "gamma": 0.3, "delta": 0.05,
               "lambda": 2.3}


def srw_config(tmp_path, **overrides):
    raw = {
        "seed": 7,
        "out": str(tmp_path / "out"),
        "kernel": {"d": 1, "L": 1, "include_origin": True},
        "model": {"kind": "simple_random_walk"},
        "params": dict(GOOD_PARAMS),
        "analyses": ["check-d", "run", "critical", "verify", "norms",
                     "gaussian"],
        "run": {"z": 1.0, "horizon": 32, "k_points": "axis:8"},
        "critical": {"M": 256},
        "norms": {"m_values": [1, 2, 4, 8, 16, 32], "resolution": 128},
        "gaussian": {"n_ladder": [64, 128, 256]},
    }
    raw.update(overrides)
    return raw


def write_config(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


class TestLoadConfig:
    def test_reference_parameters_accepted(self, tmp_path):
        cfg = load_config(write_config(tmp_path, srw_config(tmp_path)))
        assert cfg.params.theta == 2.5
        assert cfg.seed == 7

    def test_theta_gate_named(self, tmp_path):
        raw = srw_config(tmp_path)
        raw["params"]["theta"] = 2.0
        with pytest.raises(ConfigError, match="θ > 2"):
            load_config(write_config(tmp_path, raw))

    def test_lambda_gate_named(self, tmp_path):
        raw = srw_config(tmp_path)
        raw["params"]["lambda"] = 2.6
        with pytest.raises(ConfigError, match="λ < θ"):
            load_config(write_config(tmp_path, raw))

    def test_seed_mandatory(self, tmp_path):
        raw = srw_config(tmp_path)
        del raw["seed"]
        with pytest.raises(ConfigError, match="seed"):
            load_config(write_config(tmp_path, raw))

    def test_model_kind_diagnostics(self, tmp_path):
        raw = srw_config(tmp_path)
        raw["model"] = {"kind": "nonsense"}
        with pytest.raises(ConfigError, match="model.kind"):
            load_config(write_config(tmp_path, raw))
        raw["model"] = {"kind": "synthetic_theta"}
        with pytest.raises(ConfigError, match="model.theta"):
            load_config(write_config(tmp_path, raw))

    def test_missing_file_and_bad_json(self, tmp_path):
        with pytest.raises(ConfigError, match="no such config"):
            load_config(tmp_path / "absent.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(bad)

    def test_unknown_analysis(self, tmp_path):
        raw = srw_config(tmp_path, analyses=["run", "plotting"])
        with pytest.raises(ConfigError, match="plotting"):
            load_config(write_config(tmp_path, raw))

    def test_params_required_for_verify(self, tmp_path):
        raw = srw_config(tmp_path)
        del raw["params"]
        with pytest.raises(ConfigError, match="params"):
            load_config(write_config(tmp_path, raw))


class TestKernelFlag:
    def test_parse_variants(self):
        kern = parse_kernel_flag("2:3")
        assert kern.d == 2 and kern.L == 3 and len(kern.masses) == 48
        kern = parse_kernel_flag("1:1:include-origin")
        assert len(kern.masses) == 3

    def test_parse_errors(self):
        with pytest.raises(ConfigError):
            parse_kernel_flag("2")
        with pytest.raises(ConfigError):
            parse_kernel_flag("a:b")
        with pytest.raises(ConfigError):
            parse_kernel_flag("1:1:maybe-origin")


class TestRunAll:
    def test_srw_smoke(self, tmp_path):
        cfg = load_config(write_config(tmp_path, srw_config(tmp_path)))
        assert run_all(cfg) == 0
        out = Path(cfg.out_dir)
        names = {p.name for p in out.iterdir()}
        assert {"check_d.json", "f_table.csv", "f_table.json",
                "critical.json", "verify.json", "verify.txt", "norms.csv",
                "gaussian.csv", "gaussian_summary.json",
                "manifest.json"} <= names
        crit = json.loads((out / "critical.json").read_text())
        assert crit["z_c"] == 1.0 and crit["A"] == 1.0 and crit["v"] == 1.0
        assert crit["seed"] == 7
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["complete"] is True
        assert set(manifest["files"]) == names - {"manifest.json"}

    def test_reruns_are_byte_identical(self, tmp_path):
        raw = srw_config(tmp_path)
        cfg = load_config(write_config(tmp_path, raw))
        run_all(cfg, out_dir=tmp_path / "a")
        run_all(cfg, out_dir=tmp_path / "b")
        for name in ("critical.json", "f_table.csv", "norms.csv",
                     "gaussian.csv", "verify.json", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes(), name

    def test_verify_failure_sets_exit_code(self, tmp_path):
        raw = srw_config(tmp_path,
                         analyses=["run", "verify"],
                         verify={"constants": {"L42": 0.5}})
        cfg = load_config(write_config(tmp_path, raw))
        assert run_all(cfg, out_dir=tmp_path / "vf") == 2
        doc = json.loads((tmp_path / "vf" / "verify.json").read_text())
        assert "L42" in doc["failed"]

    def test_failure_leaves_incomplete_manifest(self, tmp_path):
        raw = srw_config(tmp_path, analyses=["run", "critical"])
        raw["critical"] = {"M": 10 ** 9}  # exceeds model horizon check
        raw["model"] = {"kind": "weakly_saw", "u": 0.2, "n_max": 6}
        raw["run"]["horizon"] = 6
        cfg = load_config(write_config(tmp_path, raw))
        assert run_all(cfg, out_dir=tmp_path / "fail") == 1
        manifest = json.loads((tmp_path / "fail" / "manifest.json").read_text())
        assert manifest["complete"] is False
        assert "critical" in manifest["error"]
        assert "f_table.csv" in manifest["files"]  # partial outputs retained

    def test_sweep_monotone_in_amplitude(self, tmp_path):
        raw = srw_config(tmp_path, analyses=["critical"])
        raw["kernel"] = {"d": 1, "L": 5}
        raw["model"] = {"kind": "synthetic_theta", "theta": 2.5, "beta0": 0.0}
        raw["critical"] = {"M": 4096}
        raw["sweep"] = {"field": "model.beta0",
                        "values": [0.004, 0.01, 0.02]}
        cfg = load_config(write_config(tmp_path, raw))
        assert run_all(cfg, out_dir=tmp_path / "sw") == 0
        gaps = []
        for i in range(3):
            doc = json.loads(
                (tmp_path / "sw" / f"sweep_{i:02d}" / "critical.json").read_text())
            gaps.append(abs(doc["z_c"] - 1.0))
        assert gaps[0] < gaps[1] < gaps[2]


class TestMainEntry:
    def test_single_analysis_via_flags(self, tmp_path):
        rc = main(["--seed", "1", "--kernel", "1:1:include-origin",
                   "--out", str(tmp_path / "kd"), "check-d"])
        assert rc == 0
        doc = json.loads((tmp_path / "kd" / "check_d.json").read_text())
        assert doc["holds_bound3"] is True

    def test_run_subcommand_flags(self, tmp_path):
        kfile = tmp_path / "ks.json"
        kfile.write_text(json.dumps([[0.0], [0.5], [1.0]]))
        rc = main(["--seed", "3", "--kernel", "1:1",
                   "--out", str(tmp_path / "run"), "run",
                   "--z", "0.9", "--horizon", "5", "--k-file", str(kfile)])
        assert rc == 0
        doc = json.loads((tmp_path / "run" / "f_table.json").read_text())
        assert doc["horizon"] == 5 and doc["z"] == 0.9
        assert len(doc["k_points"]) == 3

    def test_config_error_exit(self, tmp_path, capsys):
        rc = main(["--config", str(tmp_path / "none.json"), "all"])
        assert rc == 1
        assert "config error" in capsys.readouterr().err

    def test_extracted_model_from_file(self, tmp_path):
        kern = ll.make_uniform_box(1, 1)
        f = ll.enumerate_weakly_saw(kern, 0.5, 6, np.array([[0.0], [0.7]]), 1.0)
        table = tmp_path / "ftab.json"
        table.write_text(json.dumps({
            "f": f.tolist(), "horizon": 6,
            "k_points": [[0.0], [0.7]], "z": 1.0}))
        raw = {
            "seed": 5, "kernel": {"d": 1, "L": 1},
            "model": {"kind": "extracted", "f_table_file": str(table)},
            "analyses": ["run"],
            "run": {"z": 1.0, "horizon": 6, "k_points": [[0.0], [0.7]]},
        }
        cfg = RunConfig(raw, base_dir=tmp_path)
        assert run_all(cfg, out_dir=tmp_path / "ex") == 0
        doc = json.loads((tmp_path / "ex" / "f_table.json").read_text())
        assert np.abs(np.asarray(doc["f"]) - f).max() <= 1e-10
