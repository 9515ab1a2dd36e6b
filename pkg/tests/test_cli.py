import json
from pathlib import Path

import pytest

from robustnd.cli import CSV_HEADER, EXIT_INPUT, EXIT_OK, EXIT_USAGE, main
from robustnd.instance import deserialize_instance, serialize_instance

from helpers import two_parallel_edges_instance

DATA = Path(__file__).parent / "data"


@pytest.fixture()
def tiny_instance_file(tmp_path):
    inst = two_parallel_edges_instance(
        demands=(100.0, 60.0), module_capacity=60.0, costs=((1.0,), (4.0,))
    )
    path = tmp_path / "tiny.json"
    path.write_text(serialize_instance(inst))
    return path


class TestGenerate:
    def test_deterministic_output(self, tmp_path, capsys):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        base = ["generate", "--sndlib", str(DATA / "germany50.txt"), "--periods", "2",
                "--paths", "3", "--bands", "2", "--seed", "7"]
        assert main(base + ["--out", str(out1)]) == EXIT_OK
        assert main(base + ["--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_path_count_capped(self, tmp_path):
        out = tmp_path / "inst.json"
        assert main(["generate", "--sndlib", str(DATA / "germany50.txt"),
                     "--periods", "1", "--paths", "5", "--out", str(out)]) == EXIT_OK
        inst = deserialize_instance(out.read_text())
        assert all(len(p) <= 5 for p in inst.path_set.paths.values())
        assert any(len(p) == 5 for p in inst.path_set.paths.values())

    def test_seed_defaults_to_zero(self, tmp_path):
        with_seed = tmp_path / "s0.json"
        without = tmp_path / "nos.json"
        base = ["generate", "--sndlib", str(DATA / "germany50.txt"), "--periods", "1"]
        assert main(base + ["--seed", "0", "--out", str(with_seed)]) == EXIT_OK
        assert main(base + ["--out", str(without)]) == EXIT_OK
        assert with_seed.read_bytes() == without.read_bytes()

    def test_missing_file_is_input_error(self, tmp_path):
        assert main(["generate", "--sndlib", str(tmp_path / "nope.txt")]) == EXIT_INPUT


class TestSolve:
    def test_exact_closes_gap_on_tiny_instance(self, tiny_instance_file, tmp_path, capsys):
        sol_file = tmp_path / "sol.json"
        code = main(["solve", "--method", "exact", str(tiny_instance_file),
                     "--out", str(sol_file)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        row = out.strip().splitlines()[-1].split(",")
        header = CSV_HEADER.split(",")
        assert float(row[header.index("gap_pct")]) == pytest.approx(0.0, abs=1e-9)
        doc = json.loads(sol_file.read_text())
        assert doc["cost"] == pytest.approx(doc["bound"], rel=1e-9)
        # cross-check the reported cost against full routing enumeration
        from robustnd.model import evaluate_routing
        from oracles import enumerate_routings

        inst = deserialize_instance(tiny_instance_file.read_text())
        best = min(evaluate_routing(inst, r).cost for r in enumerate_routings(inst))
        assert doc["cost"] == pytest.approx(best, rel=1e-9)

    def test_lp_bound_prints_relaxation_value(self, tiny_instance_file, capsys):
        assert main(["solve", "--method", "lp-bound", str(tiny_instance_file)]) == EXIT_OK
        assert "lp-bound:" in capsys.readouterr().out

    def test_aco_rins_writes_solution_and_log(self, tiny_instance_file, tmp_path, capsys):
        sol_file = tmp_path / "sol.json"
        log_file = tmp_path / "log.csv"
        code = main(["solve", "--method", "aco-rins", str(tiny_instance_file),
                     "--time-limit", "1", "--rins-limit", "1", "--seed", "1",
                     "--out", str(sol_file), "--log", str(log_file)])
        assert code == EXIT_OK
        lines = log_file.read_text().splitlines()
        assert lines[0] == "iteration,ant,cost,zbar,best,elapsed_s,event,fixed_vars,submip_nodes,improvement"
        assert any(",rins," in line for line in lines[1:])
        doc = json.loads(sol_file.read_text())
        assert doc["cost"] is not None

    def test_method_required(self, tiny_instance_file):
        assert main(["solve", str(tiny_instance_file)]) == EXIT_USAGE

    def test_unknown_method_is_usage_error(self, tiny_instance_file):
        assert main(["solve", "--method", "sorcery", str(tiny_instance_file)]) == EXIT_USAGE

    def test_nonpositive_time_limit_is_usage_error(self, tiny_instance_file):
        assert main(["solve", "--method", "exact", "--time-limit", "0",
                     str(tiny_instance_file)]) == EXIT_USAGE

    def test_config_file_supplies_defaults_flags_win(self, tiny_instance_file, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"method": "lp-bound", "time-limit": 2}))
        assert main(["--config", str(cfg), "solve", str(tiny_instance_file)]) == EXIT_OK
        assert "lp-bound:" in capsys.readouterr().out
        assert main(["--config", str(cfg), "solve", "--method", "exact",
                     str(tiny_instance_file)]) == EXIT_OK
        assert "exact:" in capsys.readouterr().out


class TestValidate:
    def solved(self, tiny_instance_file, tmp_path):
        sol_file = tmp_path / "sol.json"
        assert main(["solve", "--method", "exact", str(tiny_instance_file),
                     "--out", str(sol_file)]) == EXIT_OK
        return sol_file

    def test_pipeline_solution_validates(self, tiny_instance_file, tmp_path, capsys):
        sol_file = self.solved(tiny_instance_file, tmp_path)
        assert main(["validate", str(tiny_instance_file), str(sol_file)]) == EXIT_OK
        assert "feasible" in capsys.readouterr().out

    def test_corrupted_schedule_fails_with_named_violation(self, tiny_instance_file, tmp_path, capsys):
        sol_file = self.solved(tiny_instance_file, tmp_path)
        doc = json.loads(sol_file.read_text())
        eid = next(iter(doc["schedule"]))
        doc["schedule"][eid] = [0] * len(doc["schedule"][eid])
        sol_file.write_text(json.dumps(doc))
        assert main(["validate", str(tiny_instance_file), str(sol_file)]) == EXIT_INPUT
        assert "capacity" in capsys.readouterr().out

    def test_dropped_assignment_reports_single_path(self, tiny_instance_file, tmp_path, capsys):
        sol_file = self.solved(tiny_instance_file, tmp_path)
        doc = json.loads(sol_file.read_text())
        doc["routing"] = doc["routing"][1:]
        sol_file.write_text(json.dumps(doc))
        assert main(["validate", str(tiny_instance_file), str(sol_file)]) == EXIT_INPUT
        assert "single-path" in capsys.readouterr().out

    def test_solution_for_other_instance_is_dimension_error(self, tiny_instance_file, tmp_path, capsys):
        sol_file = self.solved(tiny_instance_file, tmp_path)
        other = two_parallel_edges_instance(demands=(50.0,), module_capacity=30.0)
        other_file = tmp_path / "other.json"
        other_file.write_text(serialize_instance(other))
        assert main(["validate", str(other_file), str(sol_file)]) == EXIT_INPUT
        assert "dimension" in capsys.readouterr().err


class TestBench:
    def bench_dir(self, tmp_path):
        d = tmp_path / "instances"
        d.mkdir()
        for i, demands in enumerate([(100.0,), (60.0, 40.0)]):
            inst = two_parallel_edges_instance(
                demands=demands, module_capacity=60.0, costs=((1.0,), (3.0,))
            )
            (d / f"case{i}.json").write_text(serialize_instance(inst))
        return d

    def test_rows_per_instance_method_pair(self, tmp_path, capsys):
        d = self.bench_dir(tmp_path)
        out = tmp_path / "bench.csv"
        code = main(["bench", str(d), "--methods", "exact,aco-rins", "--time-limit", "1",
                     "--rins-limit", "1", "--seed", "0", "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().strip().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 5  # header + 2 instances x 2 methods

    def test_rerun_identical_modulo_wall_time(self, tmp_path):
        d = self.bench_dir(tmp_path)
        out1, out2 = tmp_path / "b1.csv", tmp_path / "b2.csv"
        common = ["bench", str(d), "--methods", "exact,aco", "--time-limit", "1",
                  "--seed", "3"]
        assert main(common + ["--out", str(out1)]) == EXIT_OK
        assert main(common + ["--out", str(out2)]) == EXIT_OK

        def strip_wall(text):
            rows = [r.split(",") for r in text.strip().splitlines()]
            idx = CSV_HEADER.split(",").index("wall_s")
            return [r[:idx] + r[idx + 1:] for r in rows]

        assert strip_wall(out1.read_text()) == strip_wall(out2.read_text())

    def test_parallel_jobs_agree_with_serial(self, tmp_path):
        d = self.bench_dir(tmp_path)
        out1, out2 = tmp_path / "serial.csv", tmp_path / "par.csv"
        common = ["bench", str(d), "--methods", "exact", "--seed", "0"]
        assert main(common + ["--out", str(out1), "--jobs", "1"]) == EXIT_OK
        assert main(common + ["--out", str(out2), "--jobs", "2"]) == EXIT_OK

        def strip_wall(text):
            rows = [r.split(",") for r in text.strip().splitlines()]
            idx = CSV_HEADER.split(",").index("wall_s")
            return [r[:idx] + r[idx + 1:] for r in rows]

        assert strip_wall(out1.read_text()) == strip_wall(out2.read_text())

    def test_plot_data_exports_iteration_logs(self, tmp_path):
        d = self.bench_dir(tmp_path)
        plots = tmp_path / "plots"
        assert main(["bench", str(d), "--methods", "aco", "--time-limit", "1",
                     "--out", str(tmp_path / "b.csv"), "--plot-data", str(plots)]) == EXIT_OK
        files = list(plots.glob("*.csv"))
        assert len(files) == 2
        header = files[0].read_text().splitlines()[0]
        assert header.startswith("iteration,ant,cost,zbar,best,elapsed_s")

    def test_empty_directory_is_input_error(self, tmp_path):
        d = tmp_path / "empty"
        d.mkdir()
        assert main(["bench", str(d)]) == EXIT_INPUT

    def test_unknown_method_is_usage_error(self, tmp_path):
        d = self.bench_dir(tmp_path)
        assert main(["bench", str(d), "--methods", "exact,warp"]) == EXIT_USAGE


def test_no_command_is_usage_error():
    assert main([]) == EXIT_USAGE


def test_gap_recomputable_from_csv_row(tiny_instance_file, capsys):
    from robustnd.mip import gap_percent

    assert main(["solve", "--method", "aco", str(tiny_instance_file),
                 "--time-limit", "1", "--seed", "0"]) == EXIT_OK
    row = capsys.readouterr().out.strip().splitlines()[-1].split(",")
    header = CSV_HEADER.split(",")
    cost = float(row[header.index("cost")])
    bound = float(row[header.index("bound")])
    gap = float(row[header.index("gap_pct")])
    assert gap == pytest.approx(gap_percent(cost, bound), abs=1e-9)
