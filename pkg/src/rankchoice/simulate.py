"""Synthetic ground truth and observation streams for experiments.

The generator follows a mixed multinomial-logit (MNL) recipe: ``K`` consumer
segments with mixing weights ``w`` drawn uniformly from the simplex; each
segment assigns every option a base utility ``q / 10`` with ``q ~ U(0, 1)``,
except for four randomly chosen options boosted to ``L * q`` (the intensity
``L`` controls how spiky preferences are).  Facing assortment ``A`` a
consumer picks option ``i`` with probability

    P[i | A] = sum_k w_k * u_{i,k} / (u_{0,k} + sum_{i' in A} u_{i',k})

where index 0 is the walk-away (no-buy) option.

Index mapping: this module speaks the product indexing 0..n (0 = no-buy)
when describing utilities, and converts to the package's internal item ids
1..n+1 (no-buy = item 1) whenever instances are involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from .instance import EmpiricalStats, Instance, empirical_probs

_BOOSTED = 4


@dataclass(eq=False)
class MixedMNL:
    """A mixture of MNL segments over ``n_products`` products plus no-buy.

    ``utilities[k, i]`` is segment ``k``'s utility for option ``i`` in the
    0-based product indexing (column 0 = no-buy).  ``boosted[k]`` records
    which four options carry the ``L * q`` boost in segment ``k``.
    """

    weights: NDArray[np.float64]
    utilities: NDArray[np.float64]
    intensity: float
    boosted: NDArray[np.int64]

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.utilities = np.asarray(self.utilities, dtype=np.float64)
        self.boosted = np.asarray(self.boosted, dtype=np.int64)
        k = self.weights.shape[0]
        if self.utilities.ndim != 2 or self.utilities.shape[0] != k:
            raise ValueError("need one utility row per segment")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9 or np.any(self.weights < 0):
            raise ValueError("mixing weights must lie on the simplex")
        if np.any(self.utilities <= 0):
            raise ValueError("utilities must be strictly positive")
        if self.boosted.shape != (k, _BOOSTED):
            raise ValueError(f"boosted must have shape ({k}, {_BOOSTED})")

    @property
    def k_mix(self) -> int:
        return len(self.weights)

    @property
    def n_products(self) -> int:
        return self.utilities.shape[1] - 1


def gen_mmnl(n: int, k_mix: int, intensity: float, seed) -> MixedMNL:
    """Draw a random mixed-MNL ground truth over ``n`` products.

    ``seed`` is anything ``numpy.random.default_rng`` accepts.  Raises when
    fewer than four options exist (``n + 1 < 4``), ``k_mix < 1`` or
    ``intensity <= 0``.
    """
    if n < 2:
        raise ValueError(f"need at least 2 products (got n={n})")
    if n + 1 < _BOOSTED:
        raise ValueError(f"cannot boost {_BOOSTED} of {n + 1} options")
    if k_mix < 1:
        raise ValueError("k_mix must be >= 1")
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    rng = np.random.default_rng(seed)
    q = rng.uniform(size=(k_mix, n + 1))
    boosted = np.stack(
        [rng.choice(n + 1, size=_BOOSTED, replace=False) for _ in range(k_mix)]
    )
    u = q / 10.0
    rows = np.arange(k_mix)[:, None]
    u[rows, boosted] = intensity * q[rows, boosted]
    w = rng.exponential(size=k_mix)
    return MixedMNL(
        weights=w / w.sum(), utilities=u, intensity=float(intensity), boosted=boosted
    )


def mmnl_probs(model: MixedMNL, products: Iterable[int]) -> NDArray[np.float64]:
    """Choice probabilities over ``[no-buy] + sorted(products)``.

    ``products`` are 1-based product indices (paper indexing; internal item
    ``i`` corresponds to product ``i - 1``).  The result sums to 1: the
    no-buy probability absorbs the rest of the mass.
    """
    prods = sorted(int(i) for i in products)
    if len(set(prods)) != len(prods):
        raise ValueError("duplicate products in assortment")
    if any(i < 1 or i > model.n_products for i in prods):
        raise ValueError(f"products must lie in 1..{model.n_products}, got {prods}")
    cols = [0] + prods
    u = model.utilities[:, cols]
    denom = u.sum(axis=1)
    return (model.weights[:, None] * u / denom[:, None]).sum(axis=0)


def sample_assortments(
    n: int, count: int, seed, size_law: str = "uniform-size"
) -> list[tuple[int, ...]]:
    """Draw ``count`` distinct random assortments over ``n`` products.

    Each assortment takes a product-subset size ``s`` from ``1..n//2``
    (``uniform-size``: uniform over sizes; ``uniform-subset``: proportional
    to the number of subsets of that size), then ``s`` distinct products
    uniformly, and adds the no-buy option.  Duplicates are redrawn.  Returns
    internal-id tuples ``(1, product+1, ...)`` ready for
    :func:`rankchoice.instance.build_instance` with ``n + 1`` items.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    smax = n // 2
    if smax < 1:
        raise ValueError(f"n={n} leaves no admissible subset size")
    available = sum(math.comb(n, s) for s in range(1, smax + 1))
    if count > available:
        raise ValueError(f"only {available} distinct assortments exist, asked for {count}")
    if size_law == "uniform-size":
        size_p = None
    elif size_law == "uniform-subset":
        counts = np.array([math.comb(n, s) for s in range(1, smax + 1)], dtype=np.float64)
        size_p = counts / counts.sum()
    else:
        raise ValueError(f"unknown size_law {size_law!r}")
    rng = np.random.default_rng(seed)
    sizes = np.arange(1, smax + 1)
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[int, ...]] = []
    while len(out) < count:
        s = int(rng.choice(sizes, p=size_p))
        prods = tuple(sorted(int(i) + 1 for i in rng.choice(n, size=s, replace=False)))
        if prods in seen:
            continue
        seen.add(prods)
        out.append((1,) + tuple(p + 1 for p in prods))
    return out


def exact_choice_vector(model: MixedMNL, inst: Instance) -> NDArray[np.float64]:
    """Ground-truth choice probabilities for every (item, assortment) pair."""
    if inst.n != model.n_products + 1:
        raise ValueError(
            f"instance has n={inst.n} items, model covers {model.n_products + 1}"
        )
    blocks = [mmnl_probs(model, [i - 1 for i in a[1:]]) for a in inst.assortments]
    return np.concatenate(blocks)


class _AssortmentSampler:
    """Cached inverse-CDF sampling of (assortment, item) observations."""

    def __init__(self, model: MixedMNL, inst: Instance, assortment_weights=None):
        self.inst = inst
        self.cums = [
            np.cumsum(mmnl_probs(model, [i - 1 for i in a[1:]]))
            for a in inst.assortments
        ]
        if assortment_weights is None:
            self.w_cum = None
        else:
            w = np.asarray(assortment_weights, dtype=np.float64)
            if w.shape != (inst.m,) or np.any(w < 0) or w.sum() <= 0:
                raise ValueError("assortment weights must be m non-negative numbers")
            self.w_cum = np.cumsum(w / w.sum())

    def draw(self, rng: np.random.Generator) -> tuple[int, int, int]:
        """One observation: (item, 1-based assortment id, flat coordinate)."""
        if self.w_cum is None:
            j = int(rng.integers(self.inst.m))
        else:
            j = int(np.searchsorted(self.w_cum, rng.random(), side="right"))
            j = min(j, self.inst.m - 1)
        k = int(np.searchsorted(self.cums[j], rng.random(), side="right"))
        k = min(k, len(self.inst.assortments[j]) - 1)
        item = self.inst.assortments[j][k]
        return item, j + 1, int(self.inst.offsets[j]) + k


def draw_observation(
    model: MixedMNL, inst: Instance, rng: np.random.Generator
) -> tuple[int, int]:
    """Draw one (chosen item, 1-based assortment id): uniform display, MNL choice."""
    item, j1, _ = _AssortmentSampler(model, inst).draw(rng)
    return item, j1


@dataclass
class StreamConfig:
    """How an observation stream feeds the dynamic solvers.

    ``batch`` is the number of fresh observations folded in before each
    snapshot after the first (``math.inf`` means "skip sampling entirely and
    hand the solver the exact vector every iteration").  The display
    distribution over assortments is uniform unless ``assortment_weights``
    is given.
    """

    batch: float
    initial_observations: int = 2000
    seed: int | None = None
    assortment_weights: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        if self.initial_observations < 0:
            raise ValueError("initial_observations must be >= 0")
        if self.batch != math.inf:
            if self.batch != int(self.batch) or self.batch < 1:
                raise ValueError("batch must be a positive integer or math.inf")
            self.batch = int(self.batch)


def make_data_source(
    model: MixedMNL,
    inst: Instance,
    cfg: StreamConfig,
    log: list[tuple[int, int]] | None = None,
):
    """Infinite snapshot stream for the dynamic solvers.

    With finite ``cfg.batch``, snapshot ``t`` reflects
    ``initial_observations + batch * (t - 1)`` i.i.d. observations; blocks
    never observed are masked out.  With ``batch = inf`` every snapshot is
    the exact choice vector (mask None).  Drawn observations are appended to
    ``log`` when given, as (item, 1-based assortment id) pairs, so a run can
    be audited or replayed via :func:`replayed_source`.
    """
    if cfg.batch == math.inf:
        exact = exact_choice_vector(model, inst)
        while True:
            yield exact.copy(), None
    sampler = _AssortmentSampler(model, inst, cfg.assortment_weights)
    rng = np.random.default_rng(cfg.seed)
    stats = EmpiricalStats(inst)

    def fold(count: int) -> None:
        for _ in range(count):
            item, j1, coord = sampler.draw(rng)
            stats.counts_pair[coord] += 1
            stats.counts_assort[j1 - 1] += 1
            stats.total += 1
            if log is not None:
                log.append((item, j1))

    fold(cfg.initial_observations)
    if stats.total == 0:
        fold(cfg.batch)
    while True:
        yield empirical_probs(stats)
        fold(cfg.batch)


def replayed_source(
    inst: Instance,
    observations: Iterable[tuple[int, int]],
    initial_observations: int = 2000,
    batch: int = 1,
):
    """Rebuild the snapshot stream from recorded observations.

    Follows the same protocol as :func:`make_data_source`: the first snapshot
    after ``initial_observations`` recorded pairs, one more per full
    ``batch``; stops when the observations run out (a trailing partial batch
    yields nothing).  Observations are validated against the instance.
    """
    from .instance import record_observations

    stats = EmpiricalStats(inst)
    pending: list[tuple[int, int]] = []
    need = max(initial_observations, 1)
    for obs in observations:
        pending.append(obs)
        if len(pending) == need:
            record_observations(stats, pending)
            pending = []
            yield empirical_probs(stats)
            need = batch
