"""Flat-file formats: instances, choice vectors, observations, models.

All formats are plain JSON or CSV.  Choice vectors serialize one row per
(item, assortment) pair in the canonical pair order; floats are written with
``repr`` so values round-trip exactly and reruns produce byte-identical
files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .instance import Instance, SparseModel, build_instance, check_choice_vector
from .simulate import MixedMNL


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def save_instance(path, inst: Instance) -> None:
    payload = {"n": inst.n, "assortments": [list(a) for a in inst.assortments]}
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_instance(path) -> Instance:
    payload = json.loads(Path(path).read_text())
    return build_instance(int(payload["n"]), payload["assortments"])


def save_choice_vector(path, inst: Instance, x) -> None:
    x = check_choice_vector(inst, x)
    rows = []
    for j, a in enumerate(inst.assortments):
        block = x[inst.block(j)]
        for item, prob in zip(a, block):
            rows.append((j + 1, item, prob))
    write_csv(path, ["assortment_id", "item", "prob"], rows)


def load_choice_vector(path, inst: Instance) -> np.ndarray:
    """Read a choice-vector CSV, tolerating row reordering but not gaps."""
    x = np.full(inst.N, np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            k = inst.pair_index(int(row["item"]), int(row["assortment_id"]))
            if not np.isnan(x[k]):
                raise ValueError(f"duplicate row for pair index {k} in {path}")
            x[k] = float(row["prob"])
    if np.any(np.isnan(x)):
        raise ValueError(f"{path} does not cover every (item, assortment) pair")
    return x


def save_observations(path, observations) -> None:
    write_csv(path, ["item", "assortment_id"], observations)


def load_observations(path) -> list[tuple[int, int]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [(int(r["item"]), int(r["assortment_id"])) for r in reader]


def save_model(path, model: SparseModel) -> None:
    payload = {
        "n": model.n,
        "rankings": [list(r) for r in model.rankings],
        "weights": [float(w) for w in model.weights],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_model(path) -> SparseModel:
    payload = json.loads(Path(path).read_text())
    rankings = payload["rankings"]
    if not rankings:
        raise ValueError(f"model file {path} has empty support")
    return SparseModel(
        n=int(payload["n"]),
        rankings=tuple(tuple(r) for r in rankings),
        weights=np.asarray(payload["weights"], dtype=np.float64),
    )


def save_mixed_mnl(path, model: MixedMNL) -> None:
    payload = {
        "weights": [float(w) for w in model.weights],
        "utilities": [[float(u) for u in row] for row in model.utilities],
        "intensity": float(model.intensity),
        "boosted": [[int(i) for i in row] for row in model.boosted],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_mixed_mnl(path) -> MixedMNL:
    payload = json.loads(Path(path).read_text())
    return MixedMNL(
        weights=np.asarray(payload["weights"], dtype=np.float64),
        utilities=np.asarray(payload["utilities"], dtype=np.float64),
        intensity=float(payload["intensity"]),
        boosted=np.asarray(payload["boosted"], dtype=np.int64),
    )


def save_cost_vector(path, inst: Instance, c) -> None:
    c = np.asarray(c, dtype=np.float64)
    rows = []
    for j, a in enumerate(inst.assortments):
        block = c[inst.block(j)]
        for item, cost in zip(a, block):
            rows.append((j + 1, item, cost))
    write_csv(path, ["assortment_id", "item", "cost"], rows)


def load_cost_vector(path, inst: Instance) -> np.ndarray:
    c = np.full(inst.N, np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            k = inst.pair_index(int(row["item"]), int(row["assortment_id"]))
            c[k] = float(row["cost"])
    if np.any(np.isnan(c)):
        raise ValueError(f"{path} does not cover every (item, assortment) pair")
    return c
