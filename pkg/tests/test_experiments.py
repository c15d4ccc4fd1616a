import csv
import io
import json
import subprocess
import sys

import pytest

from unimix.core import ConfigError
from unimix.experiments import build_config, run
from unimix.experiments.cli import main
from unimix.toy_m import MACHINE_SPEC_VERSION


class TestConfig:
    def test_defaults(self):
        cfg = build_config("bound-check")
        assert cfg.horizon == 12 and cfg.backend == "exact"
        assert cfg.params["thetas"] == ["3/10", "1/2", "7/10"]

    def test_precedence(self):
        cfg = build_config("bound-check", {"horizon": 8, "mu": "1/2"}, {"horizon": 6, "seed": None})
        assert cfg.horizon == 6
        assert cfg.params["mu"] == "1/2"

    def test_mode_defaults(self):
        cfg = build_config("bernoulli-mixture", {"mode": "periodic"})
        assert cfg.params["thetas"] == ["1/4", "3/4"] and cfg.horizon == 100
        cfg = build_config("bernoulli-mixture", None, {"mode": "dense"})
        assert cfg.params["dyadic_m"] == 6 and cfg.params["theta0"] == "19/64"

    def test_fractions_canonicalized(self):
        cfg = build_config("bound-check", {"mu": "0.5", "thetas": ["2/4", "0.3", "7/10"]})
        assert cfg.params["mu"] == "1/2"
        assert cfg.params["thetas"] == ["1/2", "3/10", "7/10"]

    @pytest.mark.parametrize("values", [
        {"colour": "red"},
        {"horizon": 0},
        {"horizon": 17},
        {"horizon": "12"},
        {"mu": 0.3},
        {"mu": "three"},
        {"backend": "fast"},
        {"format": "xml"},
        {"experiment": "toy-m"},
        {"seed": -1},
    ])
    def test_rejects(self, values):
        with pytest.raises(ConfigError):
            build_config("bound-check", values)

    def test_hash_ignores_output_location(self):
        a = build_config("toy-m", {"out": "a.json", "format": "csv"})
        b = build_config("toy-m")
        assert a.config_hash == b.config_hash
        assert build_config("toy-m", {"horizon": 16}).config_hash != b.config_hash


class TestRunners:
    def test_bound_check_report(self):
        rep = run(build_config("bound-check", {"horizon": 6}))
        assert rep.passed
        assert rep.columns[:4] == ("t", "h_t", "d_t", "sq_ratio")
        assert len(rep.records) == 6

    def test_membership_is_config_error(self):
        with pytest.raises(ConfigError):
            run(build_config("bound-check", {"mu": "1/3"}))

    def test_gap_must_be_gap(self):
        with pytest.raises(ConfigError):
            run(build_config("bernoulli-mixture", {"thetas": ["1/4", "3/8", "1/2"], "horizon": 10}))

    def test_periodic_exact_values(self):
        rep = run(build_config("bernoulli-mixture", {"mode": "periodic", "horizon": 20}))
        assert rep.summary["odd_step_values"] == ["1/2"]
        assert rep.summary["even_step_values"] == ["3/8"]

    def test_gappy_exact_backend_agrees(self):
        a = run(build_config("bernoulli-mixture", {"horizon": 300, "backend": "exact"}))
        b = run(build_config("bernoulli-mixture", {"horizon": 300}))
        assert a.flags == b.flags
        assert a.summary["deficiency_theta0"] == pytest.approx(b.summary["deficiency_theta0"], rel=1e-9)

    def test_continuous(self):
        rep = run(build_config("diagonalize", {"mode": "continuous", "theta": "1/2", "horizon": 50}))
        assert rep.passed and rep.summary["path"] == "0" * 50

    def test_toy_cap(self):
        with pytest.raises(ConfigError):
            run(build_config("toy-m", {"max_program_bits": 26}))

    def test_flag_failure_is_reported(self):
        rep = run(build_config("bernoulli-mixture", {"mode": "dense", "seeds": 3, "horizon": 200,
                                                     "final_tolerance": "1/1000000"}))
        assert not rep.flags["dense_convergence"]
        assert not rep.passed


class TestCLI:
    def test_json_and_provenance(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert main(["toy-m", "--horizon", "8", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        prov = doc["provenance"]
        assert prov["machine_spec_version"] == MACHINE_SPEC_VERSION
        assert len(prov["config_hash"]) == 64 and prov["seed"] == 0
        assert doc["schema"] == "unimix-report/1" and doc["passed"]

    def test_csv(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["bound-check", "--horizon", "5", "--format", "csv", "--out", str(out)]) == 0
        text = out.read_text()
        assert text.startswith("# schema:")
        body = [l for l in text.splitlines() if not l.startswith("#")]
        rows = list(csv.DictReader(io.StringIO("\n".join(body))))
        assert list(rows[0]) == ["t", "h_t", "d_t", "sq_ratio", "cum_sq_ratio", "cum_hellinger", "cum_kl"]

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"horizon": 4, "format": "csv", "mu": "1/2"}))
        out = tmp_path / "r"
        assert main(["bound-check", "--config", str(cfg), "--horizon", "3", "--out", str(out)]) == 0
        text = out.read_text()
        assert '"horizon": 3' in text and '"mu": "1/2"' in text

    def test_exit_codes(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"unknown": 1}))
        assert main(["toy-m", "--config", str(cfg)]) == 2
        assert "unknown config keys" in capsys.readouterr().err
        cfg.write_text(json.dumps({"seeds": 2, "final_tolerance": "1/1000000"}))
        code = main(["bernoulli-mixture", "--mode", "dense", "--horizon", "100", "--config", str(cfg),
                     "--out", str(tmp_path / "o")])
        assert code == 1
        assert "dense_convergence" in capsys.readouterr().err
        assert main(["bound-check", "--config", str(tmp_path / "missing.json")]) == 2

    def test_stdout(self, capsys):
        assert main(["diagonalize", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["summary"]["partial_mass"] == "20/21"

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "d.json"
        proc = subprocess.run([sys.executable, "-m", "unimix", "diagonalize", "--out", str(out)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert json.loads(out.read_text())["passed"]


@pytest.mark.parametrize("argv", [
    ["divergence", "--horizon", "20000"],
    ["bernoulli-mixture", "--horizon", "500"],
    ["bernoulli-mixture", "--mode", "extended", "--horizon", "400"],
    ["bernoulli-mixture", "--mode", "dense", "--horizon", "300", "--seed", "4"],
    ["bernoulli-mixture", "--mode", "periodic", "--horizon", "30"],
    ["bound-check", "--horizon", "6"],
    ["diagonalize"],
    ["diagonalize", "--mode", "continuous"],
    ["toy-m", "--horizon", "10"],
])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_rerun_byte_identical(argv, fmt, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(argv + ["--format", fmt, "--out", str(a)])
    main(argv + ["--format", fmt, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
