"""Problem instances for rank-based choice modeling.

Conventions used throughout the package:

* Items are labeled ``1..n``.  Item ``1`` is the no-purchase option and is a
  member of every assortment (a consumer can always walk away).
* An *assortment* is a set of items offered together.  An instance holds ``m``
  distinct assortments, each stored as a sorted tuple.
* Choice data lives in flat vectors of length ``N = sum(len(A_j))`` indexed
  assortment-major, item-ascending within an assortment ("pair order").
  Flat coordinates are 0-based; assortment ids in public APIs and file
  formats are 1-based.
* A *ranking* is a full preference order over the ``n`` items, most preferred
  first, represented as a tuple.  Facing assortment ``A`` a consumer with
  ranking ``sigma`` picks the member of ``A`` ranked highest by ``sigma``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

Ranking = tuple[int, ...]

NO_BUY = 1


def validate_ranking(n: int, order: Sequence[int]) -> Ranking:
    """Check that ``order`` is a permutation of ``1..n`` and return it as a tuple."""
    order = tuple(int(i) for i in order)
    if len(order) != n or sorted(order) != list(range(1, n + 1)):
        raise ValueError(f"ranking {order} is not a permutation of 1..{n}")
    return order


@dataclass(frozen=True, eq=False)
class Instance:
    """A choice-modeling instance: ``n`` items and ``m`` distinct assortments.

    Use :func:`build_instance` to construct one from raw item sets; the
    constructor itself requires canonical data (each assortment sorted,
    containing the no-buy item, no duplicates).

    Attributes
    ----------
    n : int
        Number of items, including the no-buy item ``1``.
    assortments : tuple[tuple[int, ...], ...]
        The ``m`` assortments, each a sorted tuple containing item 1.
    N : int
        Total number of (item, assortment) pairs; the length of choice vectors.
    offsets : ndarray of shape (m + 1,)
        ``offsets[j]`` is the flat index where block ``j`` (0-based) starts.
    items : ndarray of shape (N,)
        The item at each flat coordinate.
    assort_of : ndarray of shape (N,)
        The 0-based assortment index of each flat coordinate.
    """

    n: int
    assortments: tuple[Ranking, ...]
    N: int = field(init=False)
    offsets: NDArray[np.int64] = field(init=False, repr=False)
    items: NDArray[np.int64] = field(init=False, repr=False)
    assort_of: NDArray[np.int64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need n >= 2 items (got n={self.n})")
        if not self.assortments:
            raise ValueError("instance needs at least one assortment")
        seen = set()
        for a in self.assortments:
            if not a or list(a) != sorted(set(a)):
                raise ValueError(f"assortment {a} is not a sorted duplicate-free tuple")
            if a[0] != NO_BUY:
                raise ValueError(f"assortment {a} does not contain the no-buy item {NO_BUY}")
            if a[-1] > self.n:
                raise ValueError(f"assortment {a} mentions an item above n={self.n}")
            if a in seen:
                raise ValueError(f"duplicate assortment {a}")
            seen.add(a)
        sizes = [len(a) for a in self.assortments]
        offsets = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
        items = np.fromiter((i for a in self.assortments for i in a), dtype=np.int64)
        assort_of = np.repeat(np.arange(len(self.assortments), dtype=np.int64), sizes)
        object.__setattr__(self, "N", int(offsets[-1]))
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "assort_of", assort_of)

    @property
    def m(self) -> int:
        return len(self.assortments)

    def block(self, j: int) -> slice:
        """Flat-coordinate slice of 0-based assortment ``j``."""
        return slice(int(self.offsets[j]), int(self.offsets[j + 1]))

    def pair_index(self, item: int, assortment_id: int) -> int:
        """Flat coordinate of ``(item, assortment_id)`` with a 1-based assortment id."""
        j = assortment_id - 1
        if not 0 <= j < self.m:
            raise ValueError(f"assortment id {assortment_id} out of range 1..{self.m}")
        a = self.assortments[j]
        try:
            k = a.index(item)
        except ValueError:
            raise ValueError(f"item {item} is not in assortment {assortment_id} = {a}") from None
        return int(self.offsets[j]) + k

    def coord_mask(self, assort_mask: NDArray[np.bool_] | None) -> NDArray[np.bool_] | None:
        """Expand a per-assortment boolean mask to flat coordinates (None passes through)."""
        if assort_mask is None:
            return None
        assort_mask = np.asarray(assort_mask, dtype=bool)
        if assort_mask.shape != (self.m,):
            raise ValueError(f"mask must have shape ({self.m},)")
        return assort_mask[self.assort_of]


def build_instance(n: int, assortments: Iterable[Iterable[int]]) -> Instance:
    """Build an :class:`Instance` from raw item sets.

    Each set is sorted; the no-buy item 1 is inserted with a warning when
    missing.  Raises ``ValueError`` for items outside ``1..n``, duplicate
    assortments (as sets), an empty collection, or ``n < 2``.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 items (got n={n})")
    canonical = []
    for raw in assortments:
        a = sorted({int(i) for i in raw})
        if any(i < 1 or i > n for i in a):
            raise ValueError(f"assortment {a} has items outside 1..{n}")
        if NO_BUY not in a:
            warnings.warn(f"assortment {a} lacked the no-buy item {NO_BUY}; inserted")
            a = [NO_BUY] + a
        canonical.append(tuple(a))
    return Instance(n=n, assortments=tuple(canonical))


def check_choice_vector(
    inst: Instance,
    x: NDArray[np.float64],
    require_stochastic: bool = False,
    atol: float = 1e-9,
) -> NDArray[np.float64]:
    """Validate a flat choice vector against an instance.

    Checks shape ``(N,)``, finiteness and non-negativity; with
    ``require_stochastic=True`` additionally checks that every assortment
    block sums to 1 within ``atol``.  Returns the vector as float64.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (inst.N,):
        raise ValueError(f"choice vector has shape {x.shape}, expected ({inst.N},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("choice vector has non-finite entries")
    if np.any(x < -atol):
        raise ValueError("choice vector has negative entries")
    if require_stochastic:
        sums = np.add.reduceat(x, inst.offsets[:-1])
        bad = np.where(np.abs(sums - 1.0) > atol)[0]
        if bad.size:
            raise ValueError(
                f"assortment block {bad[0] + 1} sums to {sums[bad[0]]:.12f}, expected 1"
            )
    return x


def vertex(inst: Instance, order: Sequence[int]) -> NDArray[np.float64]:
    """0/1 choice vector of a single ranking: one 1 per assortment block.

    Coordinate ``(i, j)`` is 1 exactly when item ``i`` is the highest-ranked
    member of assortment ``j`` under ``order``.
    """
    order = validate_ranking(inst.n, order)
    pos = np.empty(inst.n + 1, dtype=np.int64)
    pos[np.asarray(order)] = np.arange(inst.n)
    ranks = pos[inst.items]
    best = np.minimum.reduceat(ranks, inst.offsets[:-1])
    return (ranks == best[inst.assort_of]).astype(np.float64)


@dataclass(eq=False)
class SparseModel:
    """A finitely supported distribution over rankings.

    Attributes
    ----------
    n : int
        Number of items the rankings order.
    rankings : tuple[Ranking, ...]
        Distinct support rankings.
    weights : ndarray
        Matching positive weights summing to 1.
    """

    n: int
    rankings: tuple[Ranking, ...]
    weights: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.rankings = tuple(validate_ranking(self.n, r) for r in self.rankings)
        if len(set(self.rankings)) != len(self.rankings):
            raise ValueError("support rankings must be distinct")
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (len(self.rankings),):
            raise ValueError("need one weight per ranking")
        if len(self.rankings) == 0:
            raise ValueError("model support is empty")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {self.weights.sum()!r}, expected 1")

    @property
    def sparsity(self) -> int:
        """Number of rankings in the support."""
        return len(self.rankings)

    @staticmethod
    def single(n: int, order: Sequence[int]) -> "SparseModel":
        """The deterministic model concentrated on one ranking."""
        return SparseModel(n=n, rankings=(tuple(order),), weights=np.array([1.0]))

    @staticmethod
    def from_weights(n: int, weighted: dict[Ranking, float]) -> "SparseModel":
        """Build a model from a ranking -> weight map, dropping zeros and normalizing."""
        items = sorted((r, w) for r, w in weighted.items() if w > 0)
        if not items:
            raise ValueError("no positive weights")
        rankings = tuple(r for r, _ in items)
        weights = np.array([w for _, w in items], dtype=np.float64)
        return SparseModel(n=n, rankings=rankings, weights=weights / weights.sum())


def predict(inst: Instance, model: SparseModel) -> NDArray[np.float64]:
    """Choice vector of a sparse model on an instance: the weighted vertex mix."""
    if model.n != inst.n:
        raise ValueError(f"model is over n={model.n} items, instance has n={inst.n}")
    x = np.zeros(inst.N)
    for order, w in zip(model.rankings, model.weights):
        x += w * vertex(inst, order)
    return x


def mae(x: NDArray[np.float64], y: NDArray[np.float64], coord_mask=None) -> float:
    """Mean absolute difference of two flat vectors.

    With ``coord_mask`` the mean runs over the masked-in coordinates only.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    d = np.abs(x - y)
    if coord_mask is not None:
        d = d[np.asarray(coord_mask, dtype=bool)]
        if d.size == 0:
            raise ValueError("mask selects no coordinates")
    return float(d.mean())


@dataclass(eq=False)
class EmpiricalStats:
    """Running choice counts over an instance's assortments.

    ``counts_pair[k]`` counts observations of the pair at flat coordinate
    ``k``; ``counts_assort[j]`` counts observations of 0-based assortment
    ``j``; ``total`` is the overall observation count.
    """

    inst: Instance
    counts_pair: NDArray[np.int64] = field(init=False)
    counts_assort: NDArray[np.int64] = field(init=False)
    total: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.counts_pair = np.zeros(self.inst.N, dtype=np.int64)
        self.counts_assort = np.zeros(self.inst.m, dtype=np.int64)


def record_observations(
    stats: EmpiricalStats, observations: Iterable[tuple[int, int]]
) -> EmpiricalStats:
    """Fold ``(chosen item, 1-based assortment id)`` pairs into the counts.

    Raises ``ValueError`` when an item is not a member of its assortment or
    the assortment id is out of range.  Returns ``stats`` for chaining.
    """
    inst = stats.inst
    for item, assortment_id in observations:
        k = inst.pair_index(item, assortment_id)
        stats.counts_pair[k] += 1
        stats.counts_assort[assortment_id - 1] += 1
        stats.total += 1
    return stats


def empirical_probs(stats: EmpiricalStats) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Per-assortment empirical choice frequencies and the observed-block mask.

    Returns ``(p, mask)`` where ``p`` is a flat vector with block ``j`` equal
    to ``counts_pair / counts_assort[j]`` when assortment ``j`` has been
    observed and all zeros otherwise, and ``mask`` marks observed assortments.
    Raises ``ValueError`` when no observations have been recorded at all.
    """
    if stats.total == 0:
        raise ValueError("no observations recorded")
    inst = stats.inst
    mask = stats.counts_assort > 0
    denom = stats.counts_assort[inst.assort_of].astype(np.float64)
    p = np.zeros(inst.N)
    seen = denom > 0
    p[seen] = stats.counts_pair[seen] / denom[seen]
    return p, mask
