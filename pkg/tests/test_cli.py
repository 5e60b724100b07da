import pytest
import sys
import os
import json
from unittest.mock import patch

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from starisac.cli import EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK, build_parser, main
from starisac.experiments import TimingTable

TINY_SCENARIO = {"n_tx": 2, "n_rx": 2, "n_user_antennas": 1, "n_ris_elements": 4, "n_users": 2, "n_targets": 1}


class TestCommandLine:
    """Test subcommands and exit codes"""

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_variants(self, capsys):
        assert main(["variants"]) == EXIT_OK
        output = capsys.readouterr().out
        for name in ("STAR", "cRIS", "NoRIS"):
            assert name in output

    def test_missing_config(self, tmp_path):
        assert main(["solve", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_users": 0}))
        assert main(["solve", "--config", str(path)]) == EXIT_CONFIG

    def test_unknown_variant(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(TINY_SCENARIO))
        assert main(["solve", "--config", str(path), "--variant", "mirror"]) == EXIT_CONFIG

    def test_solve_writes_summary_and_trace(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"scenario": TINY_SCENARIO,
                                    "solver": {"inner_max_iter": 3, "outer_max_iter": 1, "tolerance": 0.0}}))
        out, trace = tmp_path / "summary.json", tmp_path / "trace.csv"

        code = main(["solve", "--config", str(path), "--variant", "noris", "--seed", "2",
                     "--out", str(out), "--trace", str(trace)])

        assert code == EXIT_NOT_CONVERGED
        summary = json.loads(out.read_text())
        assert summary["variant"] == "NoRIS"
        assert summary["seed"] == 2
        assert summary["inner_iterations"] == 3
        assert "sum_secrecy_nats" in summary
        assert trace.read_text().splitlines()[0].startswith("iter,augmented,true")

    def test_sweep_needs_output(self, tmp_path):
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps({"variants": []}))
        assert main(["sweep", "--plan", str(plan), "--quiet"]) == EXIT_CONFIG

    def test_sweep_writes_results(self, tmp_path):
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps({"variants": ["NoRIS"], "n_realizations": 1, "base": TINY_SCENARIO,
                                    "solver": {"inner_max_iter": 3, "outer_max_iter": 1}}))
        out = tmp_path / "out"
        assert main(["sweep", "--plan", str(plan), "--out", str(out), "--quiet", "--freeze-positions"]) == EXIT_OK
        assert (out / "results.csv").exists()
        assert (out / "summary.json").exists()

    @patch('starisac.cli.timing_probe')
    def test_bench(self, mock_timing, tmp_path):
        mock_timing.return_value = TimingTable((128, 256), (0.0011, 0.0021), 1.0, 0.0001, 0.93)
        out = tmp_path / "bench.json"

        assert main(["bench", "--ns", "128,256", "--out", str(out)]) == EXIT_OK

        report = json.loads(out.read_text())
        assert report["slope"] == 1.0
        assert report["rows"][1] == {"n_ris_elements": 256, "median_iteration_s": 0.0021}
        assert report["baseline_iteration_s"] == 0.0001
        assert report["raw_slope"] == 0.93
        assert mock_timing.call_args[0][1] == [128, 256]

    def test_bench_rejects_bad_list(self, tmp_path):
        assert main(["bench", "--ns", "128,abc", "--out", str(tmp_path / "b.json")]) == EXIT_CONFIG

    def test_ill_typed_solver_option(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"scenario": TINY_SCENARIO, "solver": {"inner_max_iter": "5"}}))
        assert main(["solve", "--config", str(path)]) == EXIT_CONFIG

    def test_solver_section_must_be_mapping(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"scenario": TINY_SCENARIO, "solver": [3]}))
        assert main(["solve", "--config", str(path)]) == EXIT_CONFIG

    def test_paper_scale_flag(self, tmp_path):
        parser = build_parser()
        plan = str(tmp_path / "plan.json")
        assert parser.parse_args(["sweep", "--plan", plan, "--paper-scale"]).full_scale
        assert parser.parse_args(["sweep", "--plan", plan, "--full-scale"]).full_scale
        assert not parser.parse_args(["sweep", "--plan", plan]).full_scale
