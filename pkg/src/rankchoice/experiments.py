"""Experiment harness: generate, fit, evaluate, sweep, probe.

These functions are the library side of the CLI subcommands.  Everything is
seeded and file-based: ``generate_bundle`` writes per-instance directories
(ground truth, train/test instances, exact choice vectors), the fit commands
read such a directory and write model/trace/summary files next to it, and
``run_sweep`` drives the full generate -> fit -> evaluate grid, aggregating
per-cell means into a plot-ready CSV.  A fixed master seed reproduces every
file byte for byte.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .distances import DISTANCE_KINDS, make_distance
from .fitting import static_source
from .frank_wolfe import fw_run
from .instance import Instance, mae, predict, vertex
from .mirror_descent import dual_run
from .oracle import export_ip, solve
from .simulate import (
    StreamConfig,
    exact_choice_vector,
    gen_mmnl,
    make_data_source,
    sample_assortments,
)


class ConfigError(ValueError):
    """A bad flag/file combination the user can fix (CLI exit code 2)."""


def _cell_seed(*parts) -> int:
    ints = []
    for p in parts:
        if isinstance(p, str):
            ints.extend(p.encode())
        elif p == math.inf:
            ints.append(0xFFFF)
        else:
            ints.append(int(p))
    return int(np.random.SeedSequence(ints).generate_state(1)[0])


def generate_bundle(
    out_dir,
    n: int = 10,
    k_mix: int = 5,
    intensity: float = 5.0,
    m_train: int = 20,
    m_test: int = 100,
    n_instances: int = 10,
    seed: int = 0,
) -> list[Path]:
    """Write ``n_instances`` instance directories under ``out_dir``.

    Each holds the ground truth, train/test instances over disjoint random
    assortments (``n`` products + no-buy), and the exact train/test choice
    vectors.  Fully determined by ``seed``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dirs = []
    for idx in range(n_instances):
        inst_dir = out / f"instance_{idx:03d}"
        inst_dir.mkdir(exist_ok=True)
        truth = gen_mmnl(n, k_mix, intensity, seed=_cell_seed(seed, idx, "truth"))
        assortments = sample_assortments(
            n, m_train + m_test, seed=_cell_seed(seed, idx, "assort")
        )
        train = Instance(n=n + 1, assortments=tuple(assortments[:m_train]))
        test = Instance(n=n + 1, assortments=tuple(assortments[m_train:]))
        io.save_mixed_mnl(inst_dir / "ground_truth.json", truth)
        io.save_instance(inst_dir / "train_instance.json", train)
        io.save_instance(inst_dir / "test_instance.json", test)
        io.save_choice_vector(inst_dir / "p_train.csv", train, exact_choice_vector(truth, train))
        io.save_choice_vector(inst_dir / "p_test.csv", test, exact_choice_vector(truth, test))
        meta = {
            "index": idx,
            "seed": seed,
            "n_products": n,
            "k_mix": k_mix,
            "intensity": intensity,
            "m_train": m_train,
            "m_test": m_test,
        }
        (inst_dir / "meta.json").write_text(json.dumps(meta, indent=1) + "\n")
        dirs.append(inst_dir)
    return dirs


def _truncate(inst: Instance, p: np.ndarray, m: int | None):
    if m is None or m == inst.m:
        return inst, p
    if not 1 <= m <= inst.m:
        raise ConfigError(f"train_m={m} outside 1..{inst.m}")
    sub = Instance(n=inst.n, assortments=inst.assortments[:m])
    return sub, p[: int(inst.offsets[m])]


def _load_train(instance_dir, train_m=None):
    inst_dir = Path(instance_dir)
    inst = io.load_instance(inst_dir / "train_instance.json")
    p = io.load_choice_vector(inst_dir / "p_train.csv", inst)
    return _truncate(inst, p, train_m)


def _tag(algo, distance, train_m, kappa=None) -> str:
    tag = f"{algo}-{distance}"
    if train_m is not None:
        tag += f"-m{train_m}"
    if kappa is not None:
        tag += "-kinf" if kappa == math.inf else f"-k{int(kappa)}"
    return tag


def _check_fit_config(algo: str, distance: str) -> None:
    if algo not in ("fw", "dual"):
        raise ConfigError(f"unknown algo {algo!r}; choose fw or dual")
    if distance not in DISTANCE_KINDS:
        raise ConfigError(f"unknown distance {distance!r}; choose from {DISTANCE_KINDS}")
    if algo == "fw" and distance != "sql2":
        raise ConfigError(
            f"fw + {distance}: infinite curvature makes Frank-Wolfe inapplicable; use sql2"
        )
    if algo == "dual" and distance not in ("l1", "l2", "linf"):
        raise ConfigError(f"dual + {distance}: the dual solver needs l1, l2, or linf")


def _run_solver(algo, inst, distance, data, iterations, stop_mae):
    dist = make_distance(distance, inst)
    if algo == "fw":
        return fw_run(inst, dist, data, iterations, stop_mae), None
    return dual_run(inst, dist, data, iterations, stop_mae)


def _write_fit(inst_dir: Path, tag: str, result, certificate, summary: dict) -> dict:
    io.save_model(inst_dir / f"{tag}.model.json", result.model)
    if result.trace:
        cols = list(result.trace[0].keys())
        io.write_csv(
            inst_dir / f"{tag}.trace.csv", cols, [[r[c] for c in cols] for r in result.trace]
        )
    summary = dict(summary)
    summary.update(
        train_mae=result.train_mae,
        iterations=result.iterations_used,
        num_rankings=result.model.sparsity,
        stopped_by_rule=int(result.stopped_by_rule),
        certificate=certificate.value if certificate else "",
        certificate_bound=certificate.bound if certificate else "",
    )
    io.write_csv(
        inst_dir / f"{tag}.summary.csv", list(summary.keys()), [list(summary.values())]
    )
    summary["model_file"] = str(inst_dir / f"{tag}.model.json")
    return summary


def fit_static(
    instance_dir,
    algo: str = "dual",
    distance: str = "l2",
    iterations: int = 10_000,
    stop_mae: float | None = 0.001,
    train_m: int | None = None,
) -> dict:
    """Fit the exact train vector of a generated instance directory.

    ``train_m`` restricts training to the first ``train_m`` assortments.
    Writes ``<tag>.model.json``, ``<tag>.trace.csv`` and ``<tag>.summary.csv``
    into the directory and returns the summary row.
    """
    _check_fit_config(algo, distance)
    inst, p = _load_train(instance_dir, train_m)
    t0 = time.perf_counter()
    result, certificate = _run_solver(
        algo, inst, distance, static_source(p), iterations, stop_mae
    )
    wall = time.perf_counter() - t0
    summary = {
        "algo": algo,
        "labels": distance,
        "train_m": inst.m,
        "kappa": "",
        "wall_time_s": round(wall, 3),
        "total_observations": "",
    }
    tag = _tag(algo, distance, inst.m)
    return _write_fit(Path(instance_dir), tag, result, certificate, summary)


def fit_dynamic(
    instance_dir,
    algo: str = "dual",
    distance: str = "l2",
    kappa: float = 50,
    iterations: int = 10_000,
    stop_mae: float | None = 0.001,
    seed: int = 0,
    initial_observations: int = 2000,
    train_m: int | None = None,
    log_observations: bool = False,
) -> dict:
    """Fit against a growing empirical snapshot stream (batch size ``kappa``).

    ``kappa = math.inf`` feeds the exact vector every iteration.  With
    ``log_observations`` the drawn observations are written to
    ``<tag>.observations.csv`` for replay.
    """
    _check_fit_config(algo, distance)
    inst_dir = Path(instance_dir)
    inst, _ = _load_train(instance_dir, train_m)
    truth = io.load_mixed_mnl(inst_dir / "ground_truth.json")
    cfg = StreamConfig(batch=kappa, initial_observations=initial_observations, seed=seed)
    log: list | None = [] if log_observations else None
    data = make_data_source(truth, inst, cfg, log=log)
    t0 = time.perf_counter()
    result, certificate = _run_solver(algo, inst, distance, data, iterations, stop_mae)
    wall = time.perf_counter() - t0
    if kappa == math.inf:
        total_obs = 0
    else:
        total_obs = initial_observations + int(kappa) * (result.data_snapshots_used - 1)
    summary = {
        "algo": algo,
        "labels": distance,
        "train_m": inst.m,
        "kappa": "inf" if kappa == math.inf else int(kappa),
        "wall_time_s": round(wall, 3),
        "total_observations": total_obs,
    }
    tag = _tag(algo, distance, inst.m, kappa)
    if log is not None:
        io.save_observations(inst_dir / f"{tag}.observations.csv", log)
    return _write_fit(inst_dir, tag, result, certificate, summary)


def evaluate(instance_dir, model_file) -> dict:
    """MAE of a fitted model on the held-out test assortments.

    Appends a row to ``results.csv`` in the instance directory and returns it.
    """
    inst_dir = Path(instance_dir)
    test = io.load_instance(inst_dir / "test_instance.json")
    p_test = io.load_choice_vector(inst_dir / "p_test.csv", test)
    model = io.load_model(model_file)
    if model.n != test.n:
        raise ConfigError(
            f"model is over n={model.n} items but the test instance has n={test.n}"
        )
    row = {
        "model_file": Path(model_file).name,
        "MAE_test": mae(predict(test, model), p_test),
        "num_rankings": model.sparsity,
    }
    results = inst_dir / "results.csv"
    header_needed = not results.exists()
    with open(results, "a", newline="") as fh:
        if header_needed:
            fh.write("model_file,MAE_test,num_rankings\n")
        fh.write(f"{row['model_file']},{row['MAE_test']!r},{row['num_rankings']}\n")
    return row


def probe(instance_dir, distance: str, alphas=None, seed: int = 0, out_file=None) -> list[dict]:
    """Curvature-probe ratios at the exact train vector along a random vertex.

    Writes ``alpha,ratio`` CSV rows (to ``probe_<distance>.csv`` in the
    instance directory by default) and returns them.
    """
    from .distances import curvature_probe

    if alphas is None:
        alphas = [1e-1, 1e-2, 1e-3, 1e-4]
    inst, p = _load_train(instance_dir)
    dist = make_distance(distance, inst)
    rng = np.random.default_rng(seed)
    s = p
    while np.array_equal(s, p):
        s = vertex(inst, (rng.permutation(inst.n) + 1).tolist())
    ratios = curvature_probe(dist, p, s, alphas)
    rows = [{"alpha": float(a), "ratio": float(r)} for a, r in zip(alphas, ratios)]
    path = out_file or Path(instance_dir) / f"probe_{distance}.csv"
    io.write_csv(path, ["alpha", "ratio"], [[r["alpha"], r["ratio"]] for r in rows])
    return rows


def oracle_call(instance_file, cost_file, method: str = "bnb", export_path=None) -> dict:
    """Solve one linear subproblem from files; optionally export the IP model."""
    inst = io.load_instance(instance_file)
    c = io.load_cost_vector(cost_file, inst)
    res = solve(inst, c, method=method)
    if export_path is not None:
        export_ip(inst, c, export_path)
    return {"ranking": list(res.ranking), "value": res.value, "nodes": res.nodes}


def _run_cell(cell: dict) -> dict:
    """One sweep cell: fit + evaluate, fully determined by the cell dict."""
    if cell["mode"] == "static":
        summary = fit_static(
            cell["instance_dir"],
            algo=cell["algo"],
            distance=cell["distance"],
            iterations=cell["iterations"],
            stop_mae=cell["stop_mae"],
            train_m=cell["train_m"],
        )
    else:
        summary = fit_dynamic(
            cell["instance_dir"],
            algo=cell["algo"],
            distance=cell["distance"],
            kappa=cell["kappa"],
            iterations=cell["iterations"],
            stop_mae=cell["stop_mae"],
            seed=cell["stream_seed"],
            initial_observations=cell["initial_observations"],
            train_m=cell["train_m"],
        )
    row = evaluate(cell["instance_dir"], summary["model_file"])
    out = dict(summary)
    out["MAE_test"] = row["MAE_test"]
    out["instance"] = cell["instance"]
    return out


_CELL_COLUMNS = [
    "instance",
    "algo",
    "labels",
    "train_m",
    "kappa",
    "train_mae",
    "MAE_test",
    "num_rankings",
    "iterations",
    "stopped_by_rule",
    "certificate",
    "certificate_bound",
    "total_observations",
    "wall_time_s",
]


def run_sweep(
    out_dir,
    mode: str = "static",
    n: int = 10,
    k_mix: int = 5,
    intensity: float = 5.0,
    m_list=(10, 20, 50),
    m_test: int = 100,
    n_instances: int = 10,
    distances=("l1", "l2", "linf"),
    algo: str = "dual",
    kappa_list=(50, 500, math.inf),
    iterations: int = 10_000,
    stop_mae: float | None = 0.001,
    initial_observations: int = 2000,
    seed: int = 0,
    jobs: int = 1,
) -> dict:
    """Generate -> fit -> evaluate over the full grid; aggregate per-cell means.

    Grid cells are (instance, train_m, distance) and additionally kappa in
    dynamic mode.  Instance directories are generated once with the largest
    ``train_m``; smaller cells train on a prefix of the same assortment pool,
    which keeps the comparison across ``m`` paired.  Writes ``cells.csv``
    (one row per fit) and ``sweep.csv`` (aggregated means, columns
    ``labels,train_m,kappa,MAE_test,num_rankings,iterations``), and returns
    ``{"cells": [...], "aggregate": [...]}``.
    """
    if mode not in ("static", "dynamic"):
        raise ConfigError(f"unknown sweep mode {mode!r}")
    for d in distances:
        _check_fit_config(algo, d)
    m_list = sorted(set(int(m) for m in m_list))
    out = Path(out_dir)
    dirs = generate_bundle(
        out / "instances",
        n=n,
        k_mix=k_mix,
        intensity=intensity,
        m_train=max(m_list),
        m_test=m_test,
        n_instances=n_instances,
        seed=seed,
    )
    kappas = list(kappa_list) if mode == "dynamic" else [None]
    cells = []
    for idx, inst_dir in enumerate(dirs):
        for m in m_list:
            for d in distances:
                for kappa in kappas:
                    cells.append(
                        {
                            "mode": mode,
                            "instance": idx,
                            "instance_dir": str(inst_dir),
                            "train_m": m,
                            "distance": d,
                            "algo": algo,
                            "kappa": kappa,
                            "iterations": iterations,
                            "stop_mae": stop_mae,
                            "initial_observations": initial_observations,
                            "stream_seed": _cell_seed(seed, idx, m, d, kappa or 0),
                        }
                    )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    rows.sort(key=lambda r: (r["labels"], r["train_m"], str(r["kappa"]), r["instance"]))
    io.write_csv(out / "cells.csv", _CELL_COLUMNS, [[r[c] for c in _CELL_COLUMNS] for r in rows])
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["labels"], r["train_m"], str(r["kappa"])), []).append(r)
    aggregate = []
    for (label, m, kappa), grp in sorted(groups.items()):
        aggregate.append(
            {
                "labels": label,
                "train_m": m,
                "kappa": kappa,
                "MAE_test": float(np.mean([g["MAE_test"] for g in grp])),
                "num_rankings": float(np.mean([g["num_rankings"] for g in grp])),
                "iterations": float(np.mean([g["iterations"] for g in grp])),
            }
        )
    cols = ["labels", "train_m", "kappa", "MAE_test", "num_rankings", "iterations"]
    io.write_csv(out / "sweep.csv", cols, [[a[c] for c in cols] for a in aggregate])
    return {"cells": rows, "aggregate": aggregate}
