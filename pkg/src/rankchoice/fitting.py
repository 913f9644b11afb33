"""Shared fitting plumbing: data sources and the common fit result.

A *data source* is an iterator yielding one ``(p_t, assortment_mask)`` pair
per solver iteration: the empirical (or exact) choice vector to fit against
at step ``t`` and a per-assortment boolean mask of the blocks it actually
covers (``None`` means all).  Static fitting repeats one vector forever;
:func:`rankchoice.simulate.make_data_source` streams growing empirical
snapshots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from numpy.typing import NDArray

from .instance import Instance, SparseModel

DataSource = Iterable[tuple[NDArray[np.float64], NDArray[np.bool_] | None]]


def static_source(p: NDArray[np.float64], mask=None) -> DataSource:
    """A data source that yields the same snapshot every iteration."""
    p = np.asarray(p, dtype=np.float64)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
    return itertools.repeat((p, mask))


def next_snapshot(data_iter: Iterator, t: int, inst: Instance):
    """Pull snapshot ``t`` (1-based) from a data source, with friendly errors."""
    try:
        p_t, amask = next(data_iter)
    except StopIteration:
        if t == 1:
            raise ValueError("data source is empty") from None
        raise ValueError(f"data source exhausted after {t - 1} snapshots") from None
    p_t = np.asarray(p_t, dtype=np.float64)
    if p_t.shape != (inst.N,):
        raise ValueError(f"snapshot has shape {p_t.shape}, expected ({inst.N},)")
    return p_t, inst.coord_mask(amask)


@dataclass(eq=False)
class FitResult:
    """Outcome of a solver run.

    Attributes
    ----------
    model : SparseModel
        The estimated distribution over rankings.
    prediction : ndarray
        ``predict(inst, model)`` on the training instance.
    iterations_used : int
        Solver steps performed (one oracle call each).
    data_snapshots_used : int
        Snapshots consumed from the data source.
    trace : list[dict]
        One row per iteration; keys depend on the solver.
    train_mae : float
        Final stopping-rule value: MAE between the running prediction and the
        average of the snapshots seen, over masked-in coordinates.
    stopped_by_rule : bool
        True when the stopping rule fired before the iteration budget.
    """

    model: SparseModel
    prediction: NDArray[np.float64]
    iterations_used: int
    data_snapshots_used: int
    trace: list[dict] = field(default_factory=list)
    train_mae: float = float("nan")
    stopped_by_rule: bool = False
