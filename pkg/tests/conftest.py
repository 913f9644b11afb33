import numpy as np
import pytest

from rankchoice import SparseModel, build_instance


@pytest.fixture
def tiny():
    """n=3 items, two assortments {1,2} and {1,2,3}; N=5, pairs in
    assortment-major item-ascending order."""
    return build_instance(3, [[1, 2], [1, 2, 3]])


def random_sparse_model(n: int, k: int, rng: np.random.Generator) -> SparseModel:
    support = {}
    while len(support) < k:
        support[tuple((rng.permutation(n) + 1).tolist())] = None
    w = rng.exponential(size=k)
    return SparseModel(n=n, rankings=tuple(support), weights=w / w.sum())
