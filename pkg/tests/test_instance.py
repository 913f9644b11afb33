import numpy as np
import pytest

from rankchoice import (
    EmpiricalStats,
    SparseModel,
    build_instance,
    check_choice_vector,
    empirical_probs,
    mae,
    predict,
    record_observations,
    validate_ranking,
    vertex,
)
from conftest import random_sparse_model


def test_layout(tiny):
    assert tiny.n == 3
    assert tiny.m == 2
    assert tiny.N == 5
    assert list(tiny.offsets) == [0, 2, 5]
    assert list(tiny.items) == [1, 2, 1, 2, 3]
    assert tiny.block(0) == slice(0, 2)
    assert tiny.block(1) == slice(2, 5)
    assert tiny.pair_index(2, 1) == 1
    assert tiny.pair_index(3, 2) == 4


def test_pair_index_rejects_non_member(tiny):
    with pytest.raises(ValueError):
        tiny.pair_index(3, 1)


def test_build_normalizes_and_inserts_no_buy():
    with pytest.warns(UserWarning):
        inst = build_instance(4, [[3, 2], [2, 1]])
    assert inst.assortments == ((1, 2, 3), (1, 2))


def test_build_rejects_bad_input():
    with pytest.raises(ValueError):
        build_instance(3, [[1, 2], [1, 2]])  # duplicate assortment
    with pytest.raises(ValueError):
        build_instance(3, [[1, 4]])  # item out of range
    with pytest.raises(ValueError):
        build_instance(1, [[1]])  # need at least one product
    with pytest.raises(ValueError):
        build_instance(3, [])  # no assortments


def test_validate_ranking():
    assert validate_ranking(3, [2, 3, 1]) == (2, 3, 1)
    with pytest.raises(ValueError):
        validate_ranking(3, [1, 2])
    with pytest.raises(ValueError):
        validate_ranking(3, [1, 2, 2])
    with pytest.raises(ValueError):
        validate_ranking(3, [0, 1, 2])


def test_vertex_hand_values(tiny):
    # top choice per assortment, worked by hand for three rankings
    assert vertex(tiny, (1, 2, 3)).tolist() == [1, 0, 1, 0, 0]
    assert vertex(tiny, (2, 1, 3)).tolist() == [0, 1, 0, 1, 0]
    assert vertex(tiny, (3, 2, 1)).tolist() == [0, 1, 0, 0, 1]
    assert vertex(tiny, (3, 1, 2)).tolist() == [1, 0, 0, 0, 1]


def test_vertex_one_top_choice_per_block(tiny):
    import itertools

    for order in itertools.permutations((1, 2, 3)):
        v = vertex(tiny, order)
        for j in range(tiny.m):
            assert v[tiny.block(j)].sum() == 1.0


def test_vertex_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 11))
        m = int(rng.integers(1, min(8, 2 ** (n - 1))))
        assorts, seen = [], set()
        while len(assorts) < m:
            size = int(rng.integers(1, n))
            a = tuple(sorted({1} | set(rng.choice(np.arange(2, n + 1), size=size).tolist())))
            if a not in seen:
                seen.add(a)
                assorts.append(a)
        inst = build_instance(n, assorts)
        order = (rng.permutation(n) + 1).tolist()
        pos = {i: r for r, i in enumerate(order)}
        v = vertex(inst, order)
        for j, a in enumerate(inst.assortments):
            block = v[inst.block(j)]
            assert block.sum() == 1.0
            top = min(a, key=pos.get)
            assert v[inst.pair_index(top, j + 1)] == 1.0


def test_sparse_model_validation():
    m = SparseModel.single(3, (2, 1, 3))
    assert m.sparsity == 1 and m.weights.tolist() == [1.0]
    with pytest.raises(ValueError):
        SparseModel(n=3, rankings=((1, 2, 3), (1, 2, 3)), weights=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        SparseModel(n=3, rankings=((1, 2, 3),), weights=np.array([0.5]))
    with pytest.raises(ValueError):
        SparseModel(n=3, rankings=((1, 2, 3), (2, 1, 3)), weights=np.array([1.0, -0.0001]))


def test_from_weights_drops_zeros_and_normalizes():
    m = SparseModel.from_weights(3, {(1, 2, 3): 3.0, (2, 1, 3): 1.0, (3, 2, 1): 0.0})
    assert m.sparsity == 2
    assert m.rankings == ((1, 2, 3), (2, 1, 3))
    assert np.allclose(m.weights, [0.75, 0.25])
    with pytest.raises(ValueError):
        SparseModel.from_weights(3, {(1, 2, 3): 0.0})


def test_predict_hand_value(tiny):
    model = SparseModel.from_weights(3, {(1, 2, 3): 0.5, (3, 2, 1): 0.5})
    assert predict(tiny, model).tolist() == [0.5, 0.5, 0.5, 0.0, 0.5]


def test_predict_is_linear_in_weights(tiny):
    rng = np.random.default_rng(1)
    for _ in range(50):
        model = random_sparse_model(3, 3, rng)
        manual = sum(
            w * vertex(tiny, r) for r, w in zip(model.rankings, model.weights)
        )
        assert np.max(np.abs(predict(tiny, model) - manual)) <= 1e-12


def test_check_choice_vector(tiny):
    check_choice_vector(tiny, np.array([0.5, 0.5, 0.2, 0.3, 0.5]), require_stochastic=True)
    with pytest.raises(ValueError):
        check_choice_vector(tiny, np.array([0.5, 0.6, 0.2, 0.3, 0.5]), require_stochastic=True)
    with pytest.raises(ValueError):
        check_choice_vector(tiny, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        check_choice_vector(tiny, np.array([0.5, 0.5, 0.2, -0.1, 0.9]), require_stochastic=True)


def test_record_and_empirical(tiny):
    stats = EmpiricalStats(tiny)
    record_observations(stats, [(1, 1), (2, 1), (2, 1), (3, 2)])
    assert stats.total == 4
    assert stats.counts_assort.tolist() == [3, 1]
    p, seen = empirical_probs(stats)
    # hand counts: assortment 1 saw 1,2,2; assortment 2 saw item 3 once
    assert np.allclose(p, [1 / 3, 2 / 3, 0.0, 0.0, 1.0])
    assert seen.tolist() == [True, True]


def test_record_rejects_non_member(tiny):
    stats = EmpiricalStats(tiny)
    with pytest.raises(ValueError):
        record_observations(stats, [(3, 1)])
    with pytest.raises(ValueError):
        record_observations(stats, [(1, 3)])


def test_empirical_requires_observations(tiny):
    with pytest.raises(ValueError):
        empirical_probs(EmpiricalStats(tiny))


def test_empirical_counts_invariant(tiny):
    rng = np.random.default_rng(2)
    stats = EmpiricalStats(tiny)
    obs = []
    for _ in range(500):
        j = int(rng.integers(1, 3))
        a = tiny.assortments[j - 1]
        obs.append((int(rng.choice(a)), j))
    record_observations(stats, obs)
    for j in range(tiny.m):
        assert stats.counts_pair[tiny.block(j)].sum() == stats.counts_assort[j]
    assert stats.counts_assort.sum() == stats.total == 500


def test_mae_values():
    assert mae(np.array([0.1, 0.5]), np.array([0.3, 0.9])) == pytest.approx(0.3)
    assert mae(np.zeros(4), np.ones(4)) == 1.0
    x = np.array([0.2, 0.4, 0.6])
    assert mae(x, x) == 0.0
    # symmetry and masking
    y = np.array([0.5, 0.1, 0.0])
    assert mae(x, y) == mae(y, x)
    m = np.array([True, False, True])
    assert mae(x, y, coord_mask=m) == pytest.approx((0.3 + 0.6) / 2)
