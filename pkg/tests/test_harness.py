import csv
import json
import math

import numpy as np
import pytest

from duelbench.errors import ParamError
from duelbench.harness import (
    ExperimentConfig,
    aggregate,
    bound_curve,
    emit_outputs,
    geometric_checkpoints,
    parse_seeds,
    run_single,
    run_sweep,
)
from duelbench.harness.cli import main
from duelbench.harness.output import AGGREGATE_COLUMNS, TRACE_COLUMNS
from duelbench.harness.runner import SeedFailure, nearest_rank


def cfg(**kw):
    d = {
        "environment": {"kind": "lower_bound", "k": 4, "epsilon": 0.1, "m": 1},
        "policy": {"kind": "dexp3"},
        "horizon": 5000,
        "seeds": [0, 1, 2],
        "checkpoints": 10,
    }
    d.update(kw)
    return ExperimentConfig.from_dict(d)


class TestConfig:
    def test_geometric(self):
        cps = geometric_checkpoints(10**6)
        assert cps[0] == 1 and cps[-1] == 10**6
        assert len(cps) <= 101 and cps == sorted(set(cps))
        assert geometric_checkpoints(5, 0) == []
        assert geometric_checkpoints(3, 100) == [1, 2, 3]

    @pytest.mark.parametrize("spec,want", [
        ([3, 1], [3, 1]), ({"base": 5, "count": 3}, [5, 6, 7]), (4, [4]),
        ("2:5", [2, 3, 4]), ("1,9", [1, 9]),
    ])
    def test_seeds(self, spec, want):
        assert parse_seeds(spec) == want

    def test_bad_seeds(self):
        with pytest.raises(ParamError):
            parse_seeds(True)

    def test_unknown_key(self):
        with pytest.raises(ParamError):
            ExperimentConfig.from_dict({"environment": {"kind": "stationary", "uniform_k": 2},
                                        "policy": {"kind": "uniform"}, "horizon": 5, "extra": 1})

    def test_roundtrip(self):
        c = cfg(output={"dir": "x", "formats": ["csv", "json"]})
        d = c.to_dict()
        assert ExperimentConfig.from_dict(d).to_dict() == d
        json.dumps(d)

    def test_policy_defaults(self):
        assert cfg(policy={"kind": "bcb"}).with_policy_defaults()["delta"] == 0.05
        assert "delta" not in cfg().with_policy_defaults()

    def test_explicit_checkpoints(self):
        assert cfg(checkpoints=[10, 1, 5000]).checkpoint_rounds == [1, 10, 5000]

    def test_load(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg().to_dict()))
        assert ExperimentConfig.load(p).horizon == 5000


class TestRun:
    def test_deterministic(self):
        a = run_single(cfg(), 7)
        b = run_single(cfg(), 7)
        assert a.regret.R_T == b.regret.R_T
        assert a.regret.checkpoints == b.regret.checkpoints
        assert run_single(cfg(), 8).regret.R_T != a.regret.R_T

    def test_uniform_on_ties(self):
        c = cfg(environment={"kind": "stationary", "uniform_k": 5}, policy={"kind": "uniform"})
        assert run_single(c, 0).regret.R_T == 0.0

    def test_bcb_commits_on_easy_instance(self):
        c = cfg(environment={"kind": "stationary",
                             "p": [[0.5, 1.0, 1.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]]},
                policy={"kind": "bcb", "delta": 0.1}, horizon=30000)
        r = run_single(c, 0)
        assert r.committed == 0 and r.commit_round is not None
        assert r.regret.segment_regret == 0.0
        assert r.summary()["committed"] == 1

    def test_diagnostics_attach_snapshot(self):
        r = run_single(cfg(diagnostics=True), 0)
        row = r.regret.checkpoints[-1]
        q = [row.diag[f"diag_q{i}"] for i in range(1, 5)]
        assert sum(q) == pytest.approx(1.0)
        assert row.diag == {f"diag_q{i}": r.final_state["q"][i - 1] for i in range(1, 5)}

    def test_diagnostics_do_not_change_results(self):
        a = run_single(cfg(), 3)
        b = run_single(cfg(diagnostics=True), 3)
        assert a.regret.R_T == b.regret.R_T

    def test_block_size_does_not_change_results(self):
        from duelbench.harness.runner import build, simulate

        c = cfg()
        env, p1 = build(c)
        _, p2 = build(c)
        a = simulate(env, p1, 4, c.checkpoint_rounds)
        b = simulate(env, p2, 4, c.checkpoint_rounds, block=333)
        assert a.regret.R_T == b.regret.R_T


class TestSweep:
    def test_single_seed(self):
        res = run_sweep(cfg(seeds=[4]))
        run = res.runs[4]
        np.testing.assert_array_equal(res.summary.mean_R, [r.R_t for r in run.regret.checkpoints])
        np.testing.assert_array_equal(res.summary.std_R, 0.0)

    def test_permutation(self):
        a = run_sweep(cfg(seeds=[0, 1, 2, 3]))
        b = run_sweep(cfg(seeds=[3, 1, 0, 2]))
        assert a.summary.rows() == b.summary.rows()

    def test_threads(self):
        a = run_sweep(cfg(seeds=list(range(6))), threads=1)
        b = run_sweep(cfg(seeds=list(range(6))), threads=4)
        assert a.summary.rows() == b.summary.rows()

    def test_failure_names_seed(self):
        c = cfg(policy={"kind": "dexp3", "gamma": 1.5})
        with pytest.raises((SeedFailure, ParamError)):
            run_sweep(c)

    def test_bound_column(self):
        res = run_sweep(cfg())
        np.testing.assert_allclose(res.summary.bound,
                                   bound_curve("dexp3", 4, 5000, checkpoints=res.summary.checkpoints))
        assert np.all((res.summary.frac_under_bound >= 0) & (res.summary.frac_under_bound <= 1))

    def test_bcb_bound_uses_certified_gap(self):
        res = run_sweep(cfg(policy={"kind": "bcb"}, seeds=[0]))
        assert res.resolved["bound"]["certified_gap"] == pytest.approx(0.1 * 4 / 3 / 2, abs=1e-12)

    def test_uniform_has_no_bound(self):
        res = run_sweep(cfg(policy={"kind": "uniform"}, seeds=[0]))
        assert np.all(np.isnan(res.summary.bound))


class TestAggregation:
    def test_nearest_rank(self):
        v = np.arange(1, 11, dtype=float)
        assert nearest_rank(v, 10) == 1 and nearest_rank(v, 50) == 5 and nearest_rank(v, 90) == 9
        assert nearest_rank([7.0], 90) == 7.0
        assert nearest_rank([3.0, 1.0, 2.0], 50) == 2.0

    def test_rows(self):
        res = run_sweep(cfg())
        rows = res.summary.rows()
        assert len(rows) == len(res.summary.checkpoints)
        assert list(rows[0]) == AGGREGATE_COLUMNS

    def test_empty(self):
        with pytest.raises(ParamError):
            aggregate([], [], np.empty(0))


class TestBounds:
    def test_dexp3(self):
        v = bound_curve("dexp3", 10, 10**6)[0]
        assert v == pytest.approx(1.707e5, rel=1e-3)
        assert v == pytest.approx(170695.92, abs=0.01)

    def test_bcb(self):
        assert bound_curve("bcb", 10, 10**6, 0.05, 0.2)[0] == pytest.approx(3.169e5, rel=1e-3)

    def test_k2_t1(self):
        assert bound_curve("dexp3", 2, 1)[0] == pytest.approx(6 * (2 * math.log(2)) ** (1 / 3), rel=1e-15)

    def test_hp(self):
        assert bound_curve("dexp3_hp", 10, 10**5, 0.05)[0] == pytest.approx(79466.54, abs=0.01)

    def test_checkpoint_substitution(self):
        v = bound_curve("dexp3", 10, 10**6, checkpoints=[1000, 10**6])
        assert v[1] / v[0] == pytest.approx(100.0)

    def test_errors(self):
        for args in (("uniform", 4, 10), ("bcb", 4, 10, 0.05, None), ("dexp3_hp", 4, 10, None)):
            with pytest.raises(ParamError):
                bound_curve(*args)


class TestOutputs:
    def test_files_and_columns(self, tmp_path):
        c = cfg(output={"formats": ["csv", "json"]}, diagnostics=True)
        res = run_sweep(c)
        paths = emit_outputs(res, c, tmp_path, wall_clock=1.0)
        names = {p.name for p in paths}
        assert {"aggregate.csv", "aggregate.json", "config.resolved.json", "manifest.json",
                "trace_seed0.csv", "trace_seed2.json", "runs.json"} <= names
        with open(tmp_path / "trace_seed0.csv") as f:
            header = next(csv.reader(f))
        assert header[:7] == TRACE_COLUMNS and header[7].startswith("diag_")
        with open(tmp_path / "aggregate.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == AGGREGATE_COLUMNS and len(rows) - 1 == len(c.checkpoint_rounds)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["wall_clock_seconds"] == 1.0 and manifest["software"]["version"]
        resolved = json.loads((tmp_path / "config.resolved.json").read_text())
        assert {"eta", "gamma"} <= set(resolved["policy"])

    def test_empty_checkpoints(self, tmp_path):
        c = cfg(checkpoints=0)
        emit_outputs(run_sweep(c), c, tmp_path)
        assert (tmp_path / "aggregate.csv").read_text() == ",".join(AGGREGATE_COLUMNS) + "\n"
        assert (tmp_path / "trace_seed0.csv").read_text() == ",".join(TRACE_COLUMNS) + "\n"

    def test_byte_stable(self, tmp_path):
        c = cfg(output={"formats": ["csv", "json"]})
        emit_outputs(run_sweep(c), c, tmp_path / "a")
        emit_outputs(run_sweep(c), c, tmp_path / "b")
        for p in (tmp_path / "a").iterdir():
            if p.name != "manifest.json":
                assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes(), p.name

    def test_one_based_items(self, tmp_path):
        c = cfg(policy={"kind": "bcb"}, horizon=500, seeds=[0])
        emit_outputs(run_sweep(c), c, tmp_path)
        with open(tmp_path / "trace_seed0.csv") as f:
            rows = list(csv.DictReader(f))
        assert all(1 <= int(r["x"]) <= 4 and 1 <= int(r["y"]) <= 4 for r in rows)


class TestCli:
    def _config(self, tmp_path, **kw):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg(**kw).to_dict()))
        return str(p)

    def test_sweep(self, tmp_path, capsys):
        rc = main(["sweep", "--config", self._config(tmp_path), "--out", str(tmp_path / "o"),
                   "--seeds", "0:2", "--threads", "2", "--format", "json"])
        assert rc == 0
        assert (tmp_path / "o" / "aggregate.json").exists()
        lines = capsys.readouterr().out.strip().splitlines()
        assert [json.loads(line)["seed"] for line in lines] == [0, 1]

    def test_run(self, tmp_path, capsys):
        rc = main(["run", "--config", self._config(tmp_path), "--out", str(tmp_path / "o"),
                   "--seed", "5", "--checkpoints", "3"])
        assert rc == 0
        assert (tmp_path / "o" / "trace_seed5.csv").exists()

    def test_config_error_exit(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"environment": {"kind": "lower_bound", "k": 10, "epsilon": 0.2},
                                 "policy": {"kind": "bcb"}, "horizon": 10}))
        assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
        p.write_text("{")
        assert main(["run", "--config", str(p)]) == 2

    def test_bounds(self, capsys):
        assert main(["bounds", "--policy", "dexp3", "--k", "10", "--horizon", "1e6"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[1] == "t,bound" and float(out[2].split(",")[1]) == pytest.approx(170695.92, abs=0.01)

    def test_gen_and_validate(self, tmp_path, capsys):
        f = tmp_path / "inst.json"
        assert main(["gen-instance", "--k", "4", "--epsilon", "0.05", "--m", "1",
                     "--out", str(f), "--cycle"]) == 0
        capsys.readouterr()
        assert main(["validate-env", "--env-file", str(f), "--horizon", "100",
                     "--delta", "0.02", "--strict"]) == 0
        cert = json.loads(capsys.readouterr().out)
        assert cert["valid"] and cert["i_star"] == 1
        assert main(["validate-env", "--env-file", str(f), "--horizon", "100",
                     "--delta", "0.5", "--strict"]) == 3
