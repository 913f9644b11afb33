"""Exact linear minimization over rankings.

Given a flat cost vector ``c`` over (item, assortment) pairs, find a ranking
``sigma`` minimizing ``<a(sigma), c> = sum_j c[top_j(sigma), j]`` where
``top_j`` is the highest-ranked member of assortment ``j``.  This is the
linear subproblem both solvers call once per iteration.

Two exact methods are provided: brute-force enumeration (small ``n`` only)
and a depth-first branch-and-bound over preference-order prefixes.  Both
break ties toward the lexicographically smallest optimal ranking, so they
are interchangeable.  ``export_ip`` writes the equivalent 0/1 linear-ordering
program in LP format for external integer-programming solvers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .instance import Instance, Ranking, vertex

# Slack for comparing incrementally accumulated bounds against incumbent
# values; covers float drift from reordered additions.
_EPS = 1e-12

_ENUM_CHUNK = 100_000


@dataclass(frozen=True)
class OracleResult:
    """Outcome of one linear minimization over rankings.

    ``ranking`` is the lexicographically smallest optimal ranking, ``value``
    its objective ``<a(ranking), c>``, and ``nodes`` a method-specific work
    count (permutations scanned, or search nodes visited).
    """

    ranking: Ranking
    value: float
    nodes: int


def _objective(inst: Instance, c: NDArray[np.float64], ranking) -> float:
    """Reported objective: ``<a(ranking), c>`` recomputed from the vertex."""
    return float(np.dot(c, vertex(inst, ranking)))


def _check_cost(inst: Instance, c) -> NDArray[np.float64]:
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (inst.N,):
        raise ValueError(f"cost vector has shape {c.shape}, expected ({inst.N},)")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost vector has non-finite entries")
    return c


def solve_enum(inst: Instance, c, max_n: int = 10) -> OracleResult:
    """Minimize by scanning every ranking; exact but factorial in ``n``.

    Permutations are generated in lexicographic order and compared strictly,
    so the first optimum found is the lexicographically smallest.  Refuses
    instances with ``n > max_n``.
    """
    c = _check_cost(inst, c)
    n = inst.n
    if n > max_n:
        raise ValueError(f"enumeration over {n}! rankings refused (max_n={max_n})")
    best_val = np.inf
    best_rank: Ranking | None = None
    scanned = 0
    perms = itertools.permutations(range(1, n + 1))
    while True:
        chunk = list(itertools.islice(perms, _ENUM_CHUNK))
        if not chunk:
            break
        P = np.asarray(chunk, dtype=np.int64)
        K = P.shape[0]
        pos = np.empty((K, n + 1), dtype=np.int64)
        pos[np.arange(K)[:, None], P] = np.arange(n)[None, :]
        vals = np.zeros(K)
        for j, a in enumerate(inst.assortments):
            block = c[inst.block(j)]
            ranks = pos[:, a]
            vals += block[np.argmin(ranks, axis=1)]
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_rank = tuple(int(i) for i in chunk[k])
        scanned += K
    assert best_rank is not None
    return OracleResult(ranking=best_rank, value=_objective(inst, c, best_rank), nodes=scanned)


def _block_major_value(inst: Instance, cost_ji: list[list[float]], order) -> float:
    """Objective of a full ranking, summed in block order (ties with solve_enum)."""
    pos = [0] * (inst.n + 1)
    for r, i in enumerate(order):
        pos[i] = r
    total = 0.0
    for j, a in enumerate(inst.assortments):
        total += cost_ji[j][min(a, key=pos.__getitem__)]
    return total


def solve_bnb(inst: Instance, c) -> OracleResult:
    """Minimize by branch-and-bound over preference-order prefixes.

    Nodes fix the first ``d`` ranks; children are tried in ascending item
    order.  A node's bound adds, for every assortment whose top choice is not
    yet determined, the cheapest cost among its members; subtrees whose bound
    exceeds the incumbent are cut, and within bound ties only branches that
    could still yield a lexicographically smaller ranking than the incumbent
    are kept.  Placing the no-buy item determines every remaining assortment,
    so the search finishes each branch by appending the unplaced items in
    ascending order.  Returns the same (value, ranking) as :func:`solve_enum`.
    """
    c = _check_cost(inst, c)
    n, m = inst.n, inst.m
    cost_ji: list[list[float]] = [[0.0] * (n + 1) for _ in range(m)]
    for j, a in enumerate(inst.assortments):
        block = c[inst.block(j)]
        row = cost_ji[j]
        for k, i in enumerate(a):
            row[i] = float(block[k])
    blocks_of: list[list[int]] = [[] for _ in range(n + 1)]
    for j, a in enumerate(inst.assortments):
        for i in a:
            blocks_of[i].append(j)
    min_rest = [min(cost_ji[j][i] for i in a) for j, a in enumerate(inst.assortments)]

    best_rank: list[int] = list(range(1, n + 1))
    best_val = _block_major_value(inst, cost_ji, best_rank)
    determined = [False] * m
    used = [False] * (n + 1)
    prefix: list[int] = []
    nodes = 0

    def descend(fixed: float, rest: float, undetermined: int) -> None:
        nonlocal best_val, best_rank, nodes
        depth = len(prefix)
        for i in range(1, n + 1):
            if used[i]:
                continue
            nodes += 1
            df = 0.0
            dr = 0.0
            touched = []
            for j in blocks_of[i]:
                if not determined[j]:
                    df += cost_ji[j][i]
                    dr += min_rest[j]
                    touched.append(j)
            bound = fixed + df + rest - dr
            if bound > best_val + _EPS:
                continue
            prefix.append(i)
            if bound >= best_val - _EPS and prefix > best_rank[: depth + 1]:
                prefix.pop()
                continue
            if len(touched) == undetermined:
                cand = prefix + [k for k in range(1, n + 1) if not used[k] and k != i]
                val = _block_major_value(inst, cost_ji, cand)
                if val < best_val or (val == best_val and cand < best_rank):
                    best_val = val
                    best_rank = list(cand)
            else:
                used[i] = True
                for j in touched:
                    determined[j] = True
                descend(fixed + df, rest - dr, undetermined - len(touched))
                for j in touched:
                    determined[j] = False
                used[i] = False
            prefix.pop()
        return

    descend(0.0, sum(min_rest), m)
    rank = tuple(best_rank)
    return OracleResult(ranking=rank, value=_objective(inst, c, rank), nodes=nodes)


def solve(inst: Instance, c, method: str = "bnb") -> OracleResult:
    """Dispatch to :func:`solve_bnb` (default) or :func:`solve_enum`."""
    if method == "bnb":
        return solve_bnb(inst, c)
    if method == "enum":
        return solve_enum(inst, c)
    raise ValueError(f"unknown oracle method {method!r}; choose 'bnb' or 'enum'")


def _ip_formulation(inst: Instance, c) -> dict:
    """Linear-ordering 0/1 program whose optimum equals the oracle value.

    Variables ``x_i_k`` (item ``i`` precedes item ``k``) for every ordered
    pair, and ``t_i_j`` (item ``i`` is the top choice of assortment ``j``,
    1-based) for every pair coordinate.  Constraints: antisymmetry,
    transitivity over all ordered triples, exactly one top choice per
    assortment, and ``t_i_j <= x_i_k`` linking tops to precedence.
    """
    c = _check_cost(inst, c)
    n = inst.n
    prec = [f"x_{i}_{k}" for i in range(1, n + 1) for k in range(1, n + 1) if i != k]
    tops = []
    objective: dict[str, float] = {}
    for j, a in enumerate(inst.assortments):
        block = c[inst.block(j)]
        for k, i in enumerate(a):
            name = f"t_{i}_{j + 1}"
            tops.append(name)
            objective[name] = float(block[k])
    equalities: list[tuple[dict[str, float], float]] = []
    inequalities: list[tuple[dict[str, float], float]] = []
    for i in range(1, n + 1):
        for k in range(i + 1, n + 1):
            equalities.append(({f"x_{i}_{k}": 1.0, f"x_{k}_{i}": 1.0}, 1.0))
    for i, k, l in itertools.permutations(range(1, n + 1), 3):
        inequalities.append(({f"x_{i}_{k}": 1.0, f"x_{k}_{l}": 1.0, f"x_{i}_{l}": -1.0}, 1.0))
    for j, a in enumerate(inst.assortments):
        equalities.append(({f"t_{i}_{j + 1}": 1.0 for i in a}, 1.0))
        for i in a:
            for k in a:
                if k != i:
                    inequalities.append(({f"t_{i}_{j + 1}": 1.0, f"x_{i}_{k}": -1.0}, 0.0))
    return {
        "variables": prec + tops,
        "objective": objective,
        "equalities": equalities,
        "inequalities": inequalities,
    }


def _lp_terms(coefs: dict[str, float]) -> str:
    parts = []
    for name, coef in coefs.items():
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {abs(coef):.12g} {name}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export_ip(inst: Instance, c, path) -> dict:
    """Write the linear-ordering program for ``(inst, c)`` to ``path`` in LP format.

    The file uses the CPLEX LP text dialect (Minimize / Subject To / Binary /
    End) and can be handed to any exact IP solver; its optimal objective
    equals the oracle value.  Returns the formulation dictionary.
    """
    form = _ip_formulation(inst, c)
    lines = [
        f"\\ top-choice linear ordering: n={inst.n} items, m={inst.m} assortments",
        "Minimize",
        f" obj: {_lp_terms(form['objective'])}",
        "Subject To",
    ]
    row = 0
    for coefs, rhs in form["equalities"]:
        row += 1
        lines.append(f" e{row}: {_lp_terms(coefs)} = {rhs:.12g}")
    row = 0
    for coefs, rhs in form["inequalities"]:
        row += 1
        lines.append(f" i{row}: {_lp_terms(coefs)} <= {rhs:.12g}")
    lines.append("Binary")
    for name in form["variables"]:
        lines.append(f" {name}")
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return form
