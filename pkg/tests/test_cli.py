"""Command-line interface: exit codes, artifacts, and determinism."""

import json

import numpy as np
import pytest

from biqsp import bilaurent as bl
from biqsp import cli, matops, mqsp_circuit as mc


def run(*argv):
    return cli.main(list(argv))


class TestEstimate:
    def test_weak_preset_writes_table(self, tmp_path):
        assert run("estimate", "--preset", "weak",
                   "--outdir", str(tmp_path)) == 0
        lines = (tmp_path / "benchmark.csv").read_text().splitlines()
        assert lines[0].startswith("method,")
        assert len(lines) == 4  # header + three methods

    def test_output_is_byte_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run("estimate", "--preset", "strong", "--outdir", str(a))
        run("estimate", "--preset", "strong", "--outdir", str(b))
        assert (a / "benchmark.csv").read_bytes() \
            == (b / "benchmark.csv").read_bytes()


class TestTargetBuild:
    def test_writes_target_and_report(self, tmp_path):
        assert run("target-build", "--alphaRT", "2.0", "--betaIT", "0.6",
                   "--r", "2", "--M", "3", "--dR-seg", "8",
                   "--delta", "1e-3", "--outdir", str(tmp_path)) == 0
        assert (tmp_path / "target.json").exists()
        assert (tmp_path / "target_grid.csv").exists()
        report = json.loads((tmp_path / "target_report.json").read_text())
        assert report["bidegree"] == [16, 6]
        assert report["budget_mismatch"] is True

    def test_nonpositive_delta_clamped_with_warning(self, tmp_path,
                                                    capsys):
        assert run("target-build", "--alphaRT", "1.0", "--betaIT", "0.3",
                   "--r", "1", "--M", "2", "--dR-seg", "6",
                   "--delta", "0", "--outdir", str(tmp_path)) == 0
        assert "delta" in capsys.readouterr().err.lower()


class TestAngles:
    @pytest.fixture()
    def circuit_target(self, tmp_path):
        rng = np.random.default_rng(11)
        spec = mc.random_spec(rng, mc.Schedule.from_string("RIRI"))
        P, Q = mc.circuit_polynomials(spec)
        bl.save_json(P, tmp_path / "p.json")
        bl.save_json(Q, tmp_path / "q.json")
        return tmp_path

    def test_circuit_complement_roundtrip(self, circuit_target):
        d = circuit_target
        assert run("angles", "--target", str(d / "p.json"),
                   "--schedule", "RIRI", "--complement", "circuit",
                   "--q-file", str(d / "q.json"), "--delta", "0",
                   "--outdir", str(d)) == 0
        report = json.loads((d / "angles_report.json").read_text())
        assert report["roundtrip_error"] < 1e-8
        assert (d / "circuit.json").exists()
        assert (d / "peel_trace.csv").exists()

    def test_multistart_requires_seed(self, circuit_target):
        d = circuit_target
        assert run("angles", "--target", str(d / "p.json"),
                   "--schedule", "RIRI", "--complement", "circuit",
                   "--q-file", str(d / "q.json"), "--delta", "0",
                   "--multistart", "3", "--outdir", str(d)) == 2

    def test_corrupted_complement_exits_config_error(self, tmp_path):
        rng = np.random.default_rng(12)
        spec = mc.random_spec(rng, mc.Schedule.from_string("RIRI"))
        P, Q = mc.circuit_polynomials(spec)
        bl.save_json(P, tmp_path / "p.json")
        bl.save_json(Q.scale(1.05), tmp_path / "q.json")
        assert run("angles", "--target", str(tmp_path / "p.json"),
                   "--schedule", "RIRI", "--complement", "circuit",
                   "--q-file", str(tmp_path / "q.json"), "--delta", "0",
                   "--outdir", str(tmp_path)) == 2

    def test_phase_twisted_complement_exits_crc(self, tmp_path):
        rng = np.random.default_rng(14)
        spec = mc.random_spec(rng, mc.Schedule.from_string("RIRI"))
        P, Q = mc.circuit_polynomials(spec)
        bl.save_json(P, tmp_path / "p.json")
        # same modulus as Q (norm identity intact) but wrong phases
        bl.save_json(bl.monomial_shift(Q, 0, 1), tmp_path / "q.json")
        assert run("angles", "--target", str(tmp_path / "p.json"),
                   "--schedule", "RIRI", "--complement", "circuit",
                   "--q-file", str(tmp_path / "q.json"), "--delta", "0",
                   "--outdir", str(tmp_path)) == 3


class TestSimulate:
    def test_exact_method_on_benchmark_pair(self, tmp_path):
        assert run("simulate", "--pair", "lindblad", "--method", "exact",
                   "--T", "0.5", "--outdir", str(tmp_path)) == 0
        report = json.loads(
            (tmp_path / "simulate_report.json").read_text())
        import math
        assert report["propagator_norm"] <= math.exp(0.3 * 0.5) + 1e-10
        assert report["beta_I"] == pytest.approx(0.3)

    def test_refuses_large_dimension(self, tmp_path):
        pair = matops.random_pair(np.random.default_rng(13), 65,
                                  alpha=1.0, beta=0.2)
        matops.save_pair(pair, tmp_path / "big.json")
        assert run("simulate", "--pair", str(tmp_path / "big.json"),
                   "--method", "exact", "--T", "0.1",
                   "--outdir", str(tmp_path)) == 2

    def test_midpoint_r_sweep_reports_second_order(self, tmp_path):
        assert run("simulate", "--pair", "lindblad",
                   "--method", "midpoint", "--T", "1.0",
                   "--r-sweep", "4", "8", "16",
                   "--outdir", str(tmp_path)) == 0
        report = json.loads(
            (tmp_path / "simulate_report.json").read_text())
        assert report["r_sweep_slope"] == pytest.approx(-2.0, abs=0.3)
        assert (tmp_path / "convergence.csv").exists()


class TestConfigAndVerify:
    def test_malformed_config_exits_config_error(self, tmp_path):
        bad = tmp_path / "cfg.json"
        bad.write_text("{not json")
        assert run("estimate", "--config", str(bad),
                   "--outdir", str(tmp_path)) == 2

    def test_config_file_supplies_parameters(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"preset": "weak"}))
        assert run("estimate", "--config", str(cfg),
                   "--outdir", str(tmp_path)) == 0

    def test_verify_subset_passes(self, tmp_path, capsys):
        assert run("verify", "--subset", "resources",
                   "--outdir", str(tmp_path)) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out
