"""On-disk run layout, record schemas, resume and aggregation."""

import csv
import json
import os
from pathlib import Path

import numpy as np
import pytest

from paretogen import harness
from paretogen.configs import RunConfig
from paretogen.harness import (ENV_OUT, discover_run_dirs, fronts, output_root,
                               run, run_single, summarize)

PROBLEM = {
    "name": "tiny2d",
    "kind": "multiwell",
    "n": 2,
    "d": 2,
    "anchors": [[0.0, 0.0], [1.0, 1.0]],
}

SCHED = {"T": 5}


def img_config(**over):
    base = dict(problem=PROBLEM, algorithm="img", schedule=SCHED,
                img={"N": 4, "M": 2, "tau": 3}, seeds=[0, 1])
    base.update(over)
    return RunConfig(**base)


def egd_config(**over):
    base = dict(problem=PROBLEM, algorithm="egd", schedule=SCHED,
                ea={"P": 4, "generations": 3, "tau": 2}, seeds=[0])
    base.update(over)
    return RunConfig(**base)


def hybrid_config(**over):
    base = dict(problem=PROBLEM, algorithm="hybrid", schedule=SCHED,
                img={"N": 2, "M": 2, "tau": 3},
                hybrid={"P": 4, "ea_steps": 2, "ea_tau": 2}, seeds=[0])
    base.update(over)
    return RunConfig(**base)


@pytest.fixture(scope="module")
def tiny_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny-root")
    manifests = {
        "img": run(img_config(), out_dir=str(root)),
        "egd": run(egd_config(), out_dir=str(root)),
        "hybrid": run(hybrid_config(), out_dir=str(root)),
    }
    return root, manifests


def read_csv(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_layout_and_manifest(tiny_runs):
    root, manifests = tiny_runs
    for alg, seeds in [("img", [0, 1]), ("egd", [0]), ("hybrid", [0])]:
        man = manifests[alg]
        assert man["algorithm"] == alg
        assert man["seeds"] == seeds
        assert man["out_dir"] == str(root)
        for s, d in zip(seeds, man["run_dirs"]):
            run_dir = Path(d)
            assert run_dir == root / alg / f"seed_{s}"
            for fname in ("records.csv", "final_points.csv", "pareto_front.csv",
                          "meta.json", "DONE"):
                assert (run_dir / fname).exists(), f"{alg} missing {fname}"
    assert (root / "img" / "seed_0" / "trajectory.csv").exists()
    assert (root / "hybrid" / "seed_0" / "trajectory.csv").exists()
    assert (root / "egd" / "seed_0" / "ea_log.csv").exists()
    assert not (root / "egd" / "seed_0" / "trajectory.csv").exists()
    assert not (root / "img" / "seed_0" / "ea_log.csv").exists()
    assert (root / "summary.json").exists()


def test_img_records_schema(tiny_runs):
    root, manifests = tiny_runs
    assert manifests["img"]["evaluations_per_seed"] == 24
    header, rows = read_csv(root / "img" / "seed_0" / "records.csv")
    assert header == ["algorithm", "seed", "phase", "evaluations", "hypervolume",
                      "front_size"]
    # tau intermediate rows, then a final row repeating the last batch
    assert [r[2] for r in rows] == ["intermediate"] * 3 + ["final"]
    assert [int(r[3]) for r in rows] == [8, 16, 24, 24]
    assert rows[-1][1] == "0" and rows[-1][0] == "img"
    assert float(rows[-1][4]) == float(rows[-2][4])
    assert int(rows[-1][5]) == int(rows[-2][5])
    for r in rows:
        assert 1 <= int(r[5]) <= 4
        assert float(r[4]) >= 0.0


def test_ea_records_schema(tiny_runs):
    root, _ = tiny_runs
    header, rows = read_csv(root / "egd" / "seed_0" / "records.csv")
    assert [r[2] for r in rows] == ["final"] * 3
    assert [int(r[3]) for r in rows] == [4, 8, 12]
    log_header, log_rows = read_csv(root / "egd" / "seed_0" / "ea_log.csv")
    assert log_header == ["generation", "evaluations", "population_hv",
                          "best_fitness"]
    assert [int(r[0]) for r in log_rows] == [1, 2, 3]
    assert [int(r[1]) for r in log_rows] == [4, 8, 12]
    # population_hv in the log mirrors the records rows
    assert [float(r[2]) for r in log_rows] == [float(r[4]) for r in rows]


def test_hybrid_records_schema(tiny_runs):
    root, manifests = tiny_runs
    assert manifests["hybrid"]["evaluations_per_seed"] == 20
    _, rows = read_csv(root / "hybrid" / "seed_0" / "records.csv")
    phases = [r[2] for r in rows]
    evals = [int(r[3]) for r in rows]
    # two EA generations, then the generator phase on top of that base
    assert phases == ["final", "final", "intermediate", "intermediate",
                      "intermediate", "final"]
    assert evals == [4, 8, 12, 16, 20, 20]


def test_trajectory_schema(tiny_runs):
    root, _ = tiny_runs
    header, rows = read_csv(root / "img" / "seed_0" / "trajectory.csv")
    assert header == ["t", "instance", "buffer_index", "y0", "y1",
                      "log_weight", "c0", "c1"]
    assert len(rows) == 3 * 4
    assert [int(r[0]) for r in rows] == [3] * 4 + [2] * 4 + [1] * 4
    assert [int(r[1]) for r in rows] == [0, 1, 2, 3] * 3
    for r in rows:
        assert 0 <= int(r[2]) < 4 * 2
        assert float(r[3]) <= 0.0 and float(r[4]) <= 0.0
    # greedy selection without replacement keeps indices distinct per step
    for block in range(3):
        idx = [int(r[2]) for r in rows[block * 4:(block + 1) * 4]]
        assert len(set(idx)) == 4


def test_meta_fields(tiny_runs):
    root, _ = tiny_runs
    with open(root / "img" / "seed_1" / "meta.json") as fh:
        meta = json.load(fh)
    assert meta["problem"] == "tiny2d"
    assert meta["algorithm"] == "img"
    assert meta["seed"] == 1
    assert meta["n"] == 2 and meta["d"] == 2
    assert meta["evaluations"] == 24
    assert meta["wall_time_s"] > 0.0
    assert meta["params"]["img"]["N"] == 4
    assert "seeds" not in meta["params"] and "out_dir" not in meta["params"]


def test_final_points_and_front_files(tiny_runs):
    root, _ = tiny_runs
    header, rows = read_csv(root / "img" / "seed_0" / "final_points.csv")
    assert header == ["x0", "x1", "y0", "y1"]
    assert len(rows) == 4
    fheader, frows = read_csv(root / "img" / "seed_0" / "pareto_front.csv")
    assert fheader == header
    assert 1 <= len(frows) <= len(rows)
    final = {tuple(r) for r in rows}
    assert all(tuple(r) in final for r in frows)


def test_reruns_are_byte_identical(tmp_path):
    cfg = img_config(seeds=[0])
    a = run_single(cfg, 0, tmp_path / "a")
    b = run_single(cfg, 0, tmp_path / "b")
    for fname in ("records.csv", "final_points.csv", "pareto_front.csv",
                  "trajectory.csv"):
        assert (a / fname).read_bytes() == (b / fname).read_bytes(), fname


def test_done_marker_skips_rerun(tmp_path):
    cfg = egd_config()
    d = run_single(cfg, 0, tmp_path)
    sentinel = "sentinel: do not recompute\n"
    (d / "records.csv").write_text(sentinel)
    again = run_single(cfg, 0, tmp_path)
    assert again == d
    assert (d / "records.csv").read_text() == sentinel


def test_summarize_default_checkpoints(tiny_runs):
    root, _ = tiny_runs
    out = summarize([str(root)])
    # smallest final budget is the egd run at 12 evaluations
    assert out["checkpoints"] == [1, 3, 6, 12]
    assert out["problem"] == "tiny2d"
    by_key = {(r["algorithm"], r["checkpoint"]): r for r in out["table"]}
    assert by_key[("egd", 12)]["n_runs"] == 1
    assert by_key[("img", 12)]["n_runs"] == 2
    # no img record sits at or below 6 evaluations, so no such row exists
    assert ("img", 6) not in by_key
    row = by_key[("egd", 6)]
    _, rows = read_csv(root / "egd" / "seed_0" / "records.csv")
    assert row["mean_hv"] == float(rows[0][4])


def test_summarize_explicit_checkpoints_and_files(tiny_runs, tmp_path):
    root, _ = tiny_runs
    out_file = tmp_path / "agg" / "summary.json"
    out = summarize([str(root)], out_file=str(out_file), checkpoints=[8, 24])
    assert out["checkpoints"] == [8, 24]
    with open(out_file) as fh:
        assert json.load(fh) == out
    for alg in ("img", "egd", "hybrid"):
        cpath = out_file.parent / f"curve_{alg}.csv"
        header, rows = read_csv(cpath)
        assert header == ["evaluations", "phase", "mean_hv", "std_hv", "n_runs"]
        assert len(rows) >= 1
    # img curve pools both seeds at every shared budget
    _, img_rows = read_csv(out_file.parent / "curve_img.csv")
    assert all(int(r[4]) == 2 for r in img_rows)


def test_summarize_refuses_mixed_problems(tiny_runs, tmp_path):
    root, _ = tiny_runs
    other = dict(PROBLEM, name="other2d")
    run_single(egd_config(problem=other), 0, tmp_path)
    with pytest.raises(ValueError, match="mixed"):
        summarize([str(root / "egd"), str(tmp_path)])


def test_fronts_report(tiny_runs, tmp_path):
    root, _ = tiny_runs
    out_file = tmp_path / "front.csv"
    out = fronts([str(root)], combined=True, out_file=str(out_file))
    assert out["problem"] == "tiny2d"
    assert out["pooled_sizes"] == {"img": 8, "egd": 4, "hybrid": 2}
    assert sum(out["contributions"].values()) == out["front_size"]
    assert out["combined_hv"] > 0.0
    header, rows = read_csv(out_file)
    assert header == ["source", "y0", "y1"]
    assert len(rows) == out["front_size"]
    assert set(r[0] for r in rows) <= {"img", "egd", "hybrid"}


def test_discover_run_dirs(tiny_runs, tmp_path):
    root, _ = tiny_runs
    direct = discover_run_dirs([str(root / "img" / "seed_0")])
    assert direct == [root / "img" / "seed_0"]
    found = discover_run_dirs([str(root)])
    assert len(found) == 4
    with pytest.raises(FileNotFoundError):
        discover_run_dirs([str(tmp_path / "empty")])


def test_output_root_precedence(monkeypatch):
    monkeypatch.setenv(ENV_OUT, "env-root")
    assert output_root("cfg-root", "cli-root") == Path("cli-root")
    assert output_root("cfg-root", None) == Path("cfg-root")
    assert output_root(None, None) == Path("env-root")
    monkeypatch.delenv(ENV_OUT)
    assert output_root(None, None) == Path("runs")
