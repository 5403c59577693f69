"""Config-driven experiment runs, on-disk records and aggregation.

Layout: one directory per (algorithm, seed) under the output root,

    <root>/<algorithm>/seed_<S>/
        records.csv       algorithm,seed,phase,evaluations,hypervolume,front_size
        final_points.csv  point coordinates plus normalized objectives
        pareto_front.csv  non-dominated subset of the final points
        trajectory.csv    per-step selection log (generator runs only)
        ea_log.csv        per-generation log (EA runs only)
        meta.json         problem/params/wall-time sidecar
        DONE              completion marker enabling resume-by-seed

records.csv is byte-reproducible for a fixed config and seed; wall time
lives in meta.json so re-runs stay comparable.  Generator runs log the
hypervolume of every selected intermediate batch with phase
"intermediate" (their last batch repeats with phase "final"); EA runs
log their population each generation with phase "final".
"""

from __future__ import annotations

import csv
import json
import os
import time
from pathlib import Path

import numpy as np

from .baselines import hybrid_egd_img, run_ea, spea2_fitness
from .configs import (EaParams, HybridParams, ImgParams, RunConfig, build_model,
                      build_problem, build_schedule, expected_budget)
from .engine import ImgConfig, img_generate
from .metrics import combined_front_contributions, hypervolume_exact, pareto_front
from .objectives import EvalCounter

ENV_OUT = "PARETOGEN_OUT"

RECORD_FIELDS = ("algorithm", "seed", "phase", "evaluations", "hypervolume",
                 "front_size")


def _hv(Y: np.ndarray) -> float:
    idx = pareto_front(Y)
    return hypervolume_exact(Y[idx])


def _fmt(x: float) -> str:
    return repr(float(x))


def output_root(config_out: str | None, cli_out: str | None) -> Path:
    root = cli_out or config_out or os.environ.get(ENV_OUT) or "runs"
    return Path(root)


def _write_records(path: Path, rows: list[dict]):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RECORD_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "hypervolume": _fmt(r["hypervolume"])})


def _read_records(path: Path) -> list[dict]:
    with open(path, "r", newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["seed"] = int(r["seed"])
        r["evaluations"] = int(r["evaluations"])
        r["hypervolume"] = float(r["hypervolume"])
        r["front_size"] = int(r["front_size"])
    return rows


def _write_points(path: Path, X: np.ndarray, Y: np.ndarray):
    d, n = X.shape[1], Y.shape[1]
    header = [f"x{i}" for i in range(d)] + [f"y{k}" for k in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for xr, yr in zip(X, Y):
            w.writerow([_fmt(v) for v in xr] + [_fmt(v) for v in yr])


def _read_points(path: Path):
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.asarray(rows[1:], dtype=float)
    d = sum(1 for h in header if h.startswith("x"))
    return data[:, :d], data[:, d:]


def run_single(config: RunConfig, seed: int, root: Path) -> Path:
    """Execute one (algorithm, seed) cell; skip if already complete."""
    run_dir = root / config.algorithm / f"seed_{seed}"
    if (run_dir / "DONE").exists():
        return run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    spec = build_problem(config.problem)
    model = build_model(config.model, config.problem.d)
    schedule = build_schedule(config.schedule)
    counter = EvalCounter()
    t0 = time.perf_counter()
    rows: list[dict] = []
    extra_files = {}

    if config.algorithm in ("img", "hybrid"):
        ip = config.img
        img_cfg = ImgConfig(N=ip.N, M=ip.M, tau=ip.tau, selection=ip.selection,
                            preference_source=ip.preference_source, c_mode=ip.c_mode,
                            fixed_c=ip.fixed_c, eps=ip.eps, seed=seed)
        base_evals = 0
        if config.algorithm == "hybrid":
            hp = config.hybrid
            ea_rows = []

            def ea_cb(pop):
                ea_rows.append({
                    "algorithm": config.algorithm, "seed": seed, "phase": "final",
                    "evaluations": pop.generation * hp.P,
                    "hypervolume": _hv(pop.objectives),
                    "front_size": int(pareto_front(pop.objectives).size)})

            result = hybrid_egd_img(model, spec, schedule, img_cfg, P=hp.P,
                                    ea_steps=hp.ea_steps, ea_tau=hp.ea_tau,
                                    counter=counter, ea_callback=ea_cb)
            rows.extend(ea_rows)
            base_evals = hp.ea_steps * hp.P
        else:
            result = img_generate(model, spec, schedule, img_cfg, counter=counter)
        for s, step in enumerate(result.steps):
            rows.append({
                "algorithm": config.algorithm, "seed": seed, "phase": "intermediate",
                "evaluations": base_evals + ip.N * ip.M * (s + 1),
                "hypervolume": _hv(step.y),
                "front_size": int(pareto_front(step.y).size)})
        rows.append({
            "algorithm": config.algorithm, "seed": seed, "phase": "final",
            "evaluations": base_evals + ip.N * ip.M * ip.tau,
            "hypervolume": _hv(result.y),
            "front_size": int(pareto_front(result.y).size)})
        final_x, final_y = result.points, result.y
        traj_rows = []
        for step in result.steps:
            for i in range(ip.N):
                traj_rows.append([step.t, i, int(step.indices[i])]
                                 + [_fmt(v) for v in step.y[i]]
                                 + [_fmt(step.log_weights[i])]
                                 + [_fmt(v) for v in step.c])
        n = spec.n
        traj_header = (["t", "instance", "buffer_index"]
                       + [f"y{k}" for k in range(n)] + ["log_weight"]
                       + [f"c{k}" for k in range(n)])
        extra_files["trajectory.csv"] = (traj_header, traj_rows)
    else:
        ep = config.ea
        ea_log = []

        def cb(pop):
            Y = pop.objectives
            if config.algorithm == "diffsbdd_mean":
                best = float(Y.mean(axis=1).min())
            else:
                best = float(spea2_fitness(Y).min())
            hv = _hv(Y)
            rows.append({
                "algorithm": config.algorithm, "seed": seed, "phase": "final",
                "evaluations": pop.generation * ep.P, "hypervolume": hv,
                "front_size": int(pareto_front(Y).size)})
            ea_log.append([pop.generation, pop.generation * ep.P, _fmt(hv), _fmt(best)])

        pop = run_ea(config.algorithm, model, spec, schedule, P=ep.P,
                     generations=ep.generations, tau=ep.tau, seed=seed,
                     counter=counter, callback=cb)
        final_x, final_y = pop.points, pop.objectives
        extra_files["ea_log.csv"] = (
            ["generation", "evaluations", "population_hv", "best_fitness"], ea_log)

    expected = expected_budget(config)
    if counter.count != expected:
        raise RuntimeError(
            f"evaluation accounting broke: counted {counter.count}, "
            f"expected {expected}")

    _write_records(run_dir / "records.csv", rows)
    _write_points(run_dir / "final_points.csv", final_x, final_y)
    idx = pareto_front(final_y)
    _write_points(run_dir / "pareto_front.csv", final_x[idx], final_y[idx])
    for fname, (header, data_rows) in extra_files.items():
        with open(run_dir / fname, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(data_rows)
    meta = {
        "problem": config.problem.name,
        "algorithm": config.algorithm,
        "seed": seed,
        "n": spec.n,
        "d": spec.d,
        "evaluations": counter.count,
        "wall_time_s": time.perf_counter() - t0,
        "params": json.loads(config.model_dump_json(exclude={"seeds", "out_dir"})),
    }
    with open(run_dir / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    (run_dir / "DONE").write_text("ok\n")
    return run_dir


def run(config: RunConfig, seed: int | None = None,
        out_dir: str | None = None) -> dict:
    """Run every seed of a config; returns a manifest with run dirs."""
    root = output_root(config.out_dir, out_dir)
    seeds = [seed] if seed is not None else list(config.seeds)
    dirs = [run_single(config, s, root) for s in seeds]
    summary = summarize([str(d) for d in dirs],
                        out_file=str(root / "summary.json"))
    return {
        "out_dir": str(root),
        "run_dirs": [str(d) for d in dirs],
        "algorithm": config.algorithm,
        "seeds": seeds,
        "evaluations_per_seed": expected_budget(config),
        "summary": summary,
    }


def discover_run_dirs(paths: list[str]) -> list[Path]:
    """Expand inputs to every directory that holds a records.csv."""
    found = []
    for p in paths:
        base = Path(p)
        if (base / "records.csv").exists():
            found.append(base)
            continue
        found.extend(sorted(q.parent for q in base.rglob("records.csv")))
    if not found:
        raise FileNotFoundError(f"no run records found under {paths}")
    return found


def _load_runs(paths: list[str]):
    runs = []
    problems = set()
    for run_dir in discover_run_dirs(paths):
        with open(run_dir / "meta.json") as fh:
            meta = json.load(fh)
        problems.add(meta["problem"])
        runs.append({"dir": run_dir, "meta": meta,
                     "records": _read_records(run_dir / "records.csv")})
    if len(problems) > 1:
        raise ValueError(f"refusing to aggregate mixed problems: {sorted(problems)}")
    return runs


def summarize(paths: list[str], out_file: str | None = None,
              checkpoints: list[int] | None = None) -> dict:
    """Aggregate runs into a mean/std hypervolume table at budget checkpoints.

    Checkpoints default to halving multiples of the smallest final
    budget among the runs: B/8, B/4, B/2, B.
    """
    runs = _load_runs(paths)
    finals = [max(r["evaluations"] for r in run["records"]) for run in runs]
    if checkpoints is None:
        B = min(finals)
        checkpoints = [B // 8, B // 4, B // 2, B]
        checkpoints = sorted({c for c in checkpoints if c > 0})
    by_alg: dict[str, list] = {}
    for run in runs:
        by_alg.setdefault(run["meta"]["algorithm"], []).append(run)
    table = []
    for alg in sorted(by_alg):
        for cp in checkpoints:
            vals = []
            for run in by_alg[alg]:
                recs = [r for r in run["records"] if r["evaluations"] <= cp]
                if recs:
                    vals.append(recs[-1]["hypervolume"])
            if vals:
                table.append({
                    "algorithm": alg, "checkpoint": int(cp),
                    "mean_hv": float(np.mean(vals)),
                    "std_hv": float(np.std(vals)),
                    "n_runs": len(vals)})
    curves = {}
    for alg, alg_runs in by_alg.items():
        acc: dict[tuple, list] = {}
        for run in alg_runs:
            for r in run["records"]:
                acc.setdefault((r["evaluations"], r["phase"]), []).append(r["hypervolume"])
        curves[alg] = [
            {"evaluations": e, "phase": ph, "mean_hv": float(np.mean(v)),
             "std_hv": float(np.std(v)), "n_runs": len(v)}
            for (e, ph), v in sorted(acc.items())]
    out = {
        "problem": runs[0]["meta"]["problem"],
        "checkpoints": [int(c) for c in checkpoints],
        "table": table,
    }
    if out_file is not None:
        out_path = Path(out_file)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w") as fh:
            json.dump(out, fh, indent=2)
        for alg, rows in curves.items():
            cpath = out_path.parent / f"curve_{alg}.csv"
            with open(cpath, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=["evaluations", "phase", "mean_hv",
                                                   "std_hv", "n_runs"],
                                   lineterminator="\n")
                w.writeheader()
                w.writerows(rows)
    return out


def fronts(paths: list[str], combined: bool = True,
           out_file: str | None = None) -> dict:
    """Combined-front contribution report across algorithms.

    Pools the final points of every run, grouped by algorithm, extracts
    the joint non-dominated front and counts how many of its members
    each algorithm contributed.
    """
    runs = _load_runs(paths)
    labeled_y: dict[str, list] = {}
    for run in runs:
        _, Y = _read_points(run["dir"] / "final_points.csv")
        labeled_y.setdefault(run["meta"]["algorithm"], []).append(Y)
    pooled_y = {alg: np.vstack(blocks) for alg, blocks in labeled_y.items()}
    counts, hv, front_rows = combined_front_contributions(pooled_y)
    out = {
        "problem": runs[0]["meta"]["problem"],
        "pooled_sizes": {alg: int(Y.shape[0]) for alg, Y in pooled_y.items()},
        "front_size": len(front_rows),
        "contributions": {alg: int(c) for alg, c in counts.items()},
        "combined_hv": hv,
    }
    if out_file is not None and combined:
        out_path = Path(out_file)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        n = next(iter(pooled_y.values())).shape[1]
        with open(out_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source"] + [f"y{k}" for k in range(n)])
            for label, y in front_rows:
                w.writerow([label] + [_fmt(v) for v in y])
        out["front_file"] = str(out_path)
    return out
