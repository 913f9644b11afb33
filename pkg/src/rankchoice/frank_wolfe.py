"""Primal estimation by the Frank-Wolfe method.

Minimizes ``D(x, p)`` over the rankings polytope without ever projecting onto
it: each step asks the exact oracle for the vertex best aligned with the
current (sub)gradient and moves toward it with step size ``2 / (t + 1)``.
The iterate is always an explicit convex combination of at most ``t + 1``
vertices, which is exactly the sparse model returned.

Only distances with finite curvature are accepted -- in this package the
squared Euclidean distance.  Plain norms and the weighted KL divergence have
unbounded curvature (their probe ratios diverge as the step shrinks) and make
the step-size schedule meaningless, so they are rejected at configuration
time.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .distances import Distance
from .fitting import DataSource, FitResult, next_snapshot
from .instance import Instance, Ranking, SparseModel, mae, predict, vertex
from .oracle import solve_bnb


def fw_step(
    inst: Instance,
    x_t: NDArray[np.float64],
    p_t: NDArray[np.float64],
    mask,
    t: int,
    dist: Distance,
) -> tuple[NDArray[np.float64], Ranking]:
    """One Frank-Wolfe step at iteration ``t >= 1``; returns (new iterate, chosen ranking).

    ``mask`` is a flat coordinate mask (or None); masked-out blocks see zero
    gradient and therefore never steer the oracle.
    """
    if t < 1:
        raise ValueError("iteration index starts at 1")
    g = dist.subgradient(x_t, p_t, mask)
    chosen = solve_bnb(inst, g).ranking
    gamma = 2.0 / (t + 1)
    x_next = (1.0 - gamma) * x_t + gamma * vertex(inst, chosen)
    return x_next, chosen


def fw_run(
    inst: Instance,
    dist: Distance,
    data: DataSource,
    iterations: int,
    stop_train_mae: float | None = 0.001,
    init: Ranking | None = None,
) -> FitResult:
    """Run Frank-Wolfe for ``t = 1 .. iterations - 1`` steps or until the stopping rule.

    The stopping rule compares the iterate against the running average of the
    snapshots seen so far: stop once their MAE over masked-in coordinates
    drops to ``stop_train_mae`` (pass None to always exhaust the budget).
    Starts from the vertex of ``init`` (identity ranking by default).  The
    trace records ``(t, objective, sparsity)`` with the objective evaluated
    after the step against the step's snapshot.
    """
    if not dist.supports_fw:
        raise ValueError(
            f"distance {dist.kind!r} has infinite curvature; Frank-Wolfe needs sql2"
        )
    if iterations < 1:
        raise ValueError("iteration budget must be >= 1")
    if stop_train_mae is not None and stop_train_mae <= 0:
        raise ValueError("stop_train_mae must be positive when set")
    order = tuple(range(1, inst.n + 1)) if init is None else tuple(init)
    x = vertex(inst, order)
    weights: dict[Ranking, float] = {order: 1.0}
    p_sum = np.zeros(inst.N)
    data_iter = iter(data)
    trace: list[dict] = []
    steps = 0
    snapshots = 0
    train_mae = float("nan")
    stopped = False
    for t in range(1, iterations):
        p_t, cmask = next_snapshot(data_iter, t, inst)
        x, chosen = fw_step(inst, x, p_t, cmask, t, dist)
        gamma = 2.0 / (t + 1)
        for r in weights:
            weights[r] *= 1.0 - gamma
        weights[chosen] = weights.get(chosen, 0.0) + gamma
        if any(w == 0.0 for w in weights.values()):
            weights = {r: w for r, w in weights.items() if w != 0.0}
        steps = t
        snapshots += 1
        p_sum += p_t
        train_mae = mae(x, p_sum / snapshots, cmask)
        trace.append(
            {
                "t": t,
                "objective": dist.value(x, p_t, cmask),
                "sparsity": len(weights),
            }
        )
        if stop_train_mae is not None and train_mae <= stop_train_mae:
            stopped = True
            break
    model = SparseModel.from_weights(inst.n, weights)
    return FitResult(
        model=model,
        prediction=predict(inst, model),
        iterations_used=steps,
        data_snapshots_used=snapshots,
        trace=trace,
        train_mae=train_mae,
        stopped_by_rule=stopped,
    )
