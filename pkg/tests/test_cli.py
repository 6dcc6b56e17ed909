import json
import math

import pytest
from click.testing import CliRunner

from eginoe.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _data_lines(output):
    return [ln for ln in output.strip().splitlines() if not ln.startswith("#")]


class TestExact:
    def test_table_normalization(self, runner):
        res = runner.invoke(main, ["exact", "--n", "4", "--tau", "0"])
        assert res.exit_code == 0
        rows = _data_lines(res.output)[1:]
        assert len(rows) == 3
        total = sum(float(r.split(",")[5]) for r in rows)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_header_and_provenance(self, runner):
        res = runner.invoke(main, ["exact", "--n", "2", "--tau", "0.5"])
        assert res.output.startswith("# eginoe")
        header = _data_lines(res.output)[0]
        assert header == "regime,n,tau_or_alpha,m,log_p,p,flags"

    def test_seventeen_digit_roundtrip(self, runner):
        from eginoe.exactprob import EnsembleParams, log_p_nn

        res = runner.invoke(main, ["exact", "--n", "2", "--tau", "0"])
        row = _data_lines(res.output)[1].split(",")
        # text -> float reproduces the in-memory values bit-exactly
        assert float(row[4]) == log_p_nn(EnsembleParams.strong(2, 0.0)).log
        assert float(row[5]) == math.exp(log_p_nn(EnsembleParams.strong(2, 0.0)).log)

    def test_json_format(self, runner):
        res = runner.invoke(main, ["exact", "--n", "2", "--tau", "0", "--format", "json"])
        doc = json.loads(res.output)
        assert doc["rows"][0]["n"] == 2

    def test_usage_empty_grid(self, runner):
        res = runner.invoke(main, ["exact", "--n", "4", "--tau", ""])
        assert res.exit_code == 2

    def test_usage_both_regimes(self, runner):
        res = runner.invoke(main, ["exact", "--n", "4", "--tau", "0", "--alpha", "1"])
        assert res.exit_code == 2

    def test_domain_odd_n(self, runner):
        res = runner.invoke(main, ["exact", "--n", "5", "--tau", "0"])
        assert res.exit_code == 3

    def test_weak_regime_table(self, runner):
        res = runner.invoke(main, ["exact", "--n", "8", "--alpha", "1"])
        assert res.exit_code == 0
        rows = _data_lines(res.output)[1:]
        assert rows[0].startswith("weak,8,1,")
        total = sum(float(r.split(",")[5]) for r in rows)
        assert total == pytest.approx(1.0, abs=1e-8)


class TestAsym:
    def test_degenerate_exit_code(self, runner):
        res = runner.invoke(main, ["asym", "--regime", "weak", "--alpha", "0", "--l", "1", "--n", "100"])
        assert res.exit_code == 3

    def test_missing_grid_is_usage_error(self, runner):
        res = runner.invoke(main, ["asym", "--regime", "strong", "--l", "1", "--n", "100"])
        assert res.exit_code == 2
        res = runner.invoke(main, ["asym", "--regime", "weak", "--tau", "0.5", "--l", "1", "--n", "100"])
        assert res.exit_code == 2

    def test_strong_row(self, runner):
        res = runner.invoke(main, ["asym", "--regime", "strong", "--tau", "0", "--l", "1", "--n", "100"])
        assert res.exit_code == 0
        row = _data_lines(res.output)[1].split(",")
        assert float(row[4]) == pytest.approx(-math.log(2) / 4)


class TestResidualSweep:
    def test_small_sweep(self, runner, tmp_path):
        out = tmp_path / "sweep.csv"
        res = runner.invoke(
            main,
            ["residual-sweep", "--regime", "strong", "--l", "1", "--n", "10,30", "--tau", "0:0.5:0.25",
             "--out", str(out)],
        )
        assert res.exit_code == 0
        lines = out.read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert data[0] == "regime,n,tau_or_alpha,l,log_p,prediction,residual,error"
        assert len(data) == 1 + 2 * 3

    def test_zonal_cap(self, runner):
        res = runner.invoke(main, ["residual-sweep", "--regime", "strong", "--l", "2", "--n", "100", "--tau", "0"])
        assert res.exit_code == 3

    def test_worker_pool_matches_serial(self, runner, tmp_path):
        args = ["residual-sweep", "--regime", "weak", "--l", "1", "--n", "10,20", "--alpha", "1"]
        serial = runner.invoke(main, args)
        pooled = runner.invoke(main, args + ["--workers", "2"])
        assert serial.exit_code == 0 and pooled.exit_code == 0
        assert _data_lines(serial.output) == _data_lines(pooled.output)


class TestMc:
    def test_deterministic_output(self, runner):
        args = ["mc", "--n", "2", "--tau", "0", "--trials", "2000", "--seed", "42"]
        out1 = runner.invoke(main, args).output
        out2 = runner.invoke(main, args).output
        assert out1 == out2

    def test_frequencies(self, runner):
        res = runner.invoke(main, ["mc", "--n", "2", "--tau", "0", "--trials", "5000", "--seed", "1"])
        assert res.exit_code == 0
        rows = [r.split(",") for r in _data_lines(res.output)[1:]]
        freqs = {int(r[1]): float(r[3]) for r in rows}
        assert sum(freqs.values()) == pytest.approx(1.0)
        assert abs(freqs[2] - 1 / math.sqrt(2)) < 0.03


class TestPotential:
    def test_report(self, runner):
        res = runner.invoke(main, ["potential", "--n", "10000", "--tau", "0"])
        assert res.exit_code == 0
        row = _data_lines(res.output)[1].split(",")
        assert float(row[2]) == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-3)
        assert float(row[3]) == pytest.approx(math.log(3.0), abs=1e-2)


class TestCrosscheck:
    def test_small(self, runner):
        res = runner.invoke(main, ["crosscheck", "--n", "2,4", "--tau", "0,0.5"])
        assert res.exit_code == 0
        doc = json.loads(res.output)
        assert doc["worst"] <= 1e-8
        assert all(pt["normalization_defect"] <= 1e-8 for pt in doc["points"])

    def test_numeric_quality_exit_code(self, runner):
        # an unreachable tolerance must trip the numeric-quality exit code
        res = runner.invoke(main, ["crosscheck", "--n", "4", "--tau", "0.5", "--tol", "1e-18"])
        assert res.exit_code == 4

    def test_cap(self, runner):
        res = runner.invoke(main, ["crosscheck", "--n", "44", "--tau", "0"])
        assert res.exit_code == 3


class TestConfigFile:
    def test_defaults_and_override(self, runner, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("n = 4\ntau = 0.5\n")
        res = runner.invoke(main, ["exact", "--config", str(cfg)])
        assert res.exit_code == 0
        assert ",0.5," in _data_lines(res.output)[1]
        # explicit flag wins over the file
        res2 = runner.invoke(main, ["exact", "--config", str(cfg), "--tau", "0"])
        assert res2.exit_code == 0
        rows = _data_lines(res2.output)[1:]
        assert all(r.split(",")[2] == "0" for r in rows)
