import numpy as np
import pytest

from rankchoice import (
    SparseModel,
    build_instance,
    gen_mmnl,
    load_choice_vector,
    load_cost_vector,
    load_instance,
    load_mixed_mnl,
    load_model,
    load_observations,
    predict,
    save_choice_vector,
    save_cost_vector,
    save_instance,
    save_mixed_mnl,
    save_model,
    save_observations,
    write_csv,
)
from conftest import random_sparse_model


def test_instance_round_trip(tiny, tmp_path):
    path = tmp_path / "instance.json"
    save_instance(path, tiny)
    back = load_instance(path)
    assert back.n == tiny.n
    assert back.assortments == tiny.assortments
    assert back.N == tiny.N


def test_choice_vector_round_trip_is_exact(tiny, tmp_path):
    rng = np.random.default_rng(60)
    p = predict(tiny, random_sparse_model(3, 3, rng))
    path = tmp_path / "p.csv"
    save_choice_vector(path, tiny, p)
    back = load_choice_vector(path, tiny)
    assert np.array_equal(back, p)  # repr round-trips floats bit-exactly


def test_choice_vector_rewrite_is_byte_identical(tiny, tmp_path):
    rng = np.random.default_rng(61)
    p = predict(tiny, random_sparse_model(3, 2, rng))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    save_choice_vector(a, tiny, p)
    save_choice_vector(b, tiny, load_choice_vector(a, tiny))
    assert a.read_bytes() == b.read_bytes()


def test_choice_vector_tolerates_shuffled_rows(tiny, tmp_path):
    p = np.array([0.25, 0.75, 0.5, 0.25, 0.25])
    path = tmp_path / "p.csv"
    save_choice_vector(path, tiny, p)
    lines = path.read_text().splitlines()
    shuffled = [lines[0]] + lines[1:][::-1]
    path.write_text("\n".join(shuffled) + "\n")
    assert np.array_equal(load_choice_vector(path, tiny), p)


def test_choice_vector_rejects_gaps_and_duplicates(tiny, tmp_path):
    p = np.array([0.25, 0.75, 0.5, 0.25, 0.25])
    path = tmp_path / "p.csv"
    save_choice_vector(path, tiny, p)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")  # drop one pair
    with pytest.raises(ValueError, match="every"):
        load_choice_vector(path, tiny)
    path.write_text("\n".join(lines + [lines[-1]]) + "\n")  # write one twice
    with pytest.raises(ValueError, match="duplicate"):
        load_choice_vector(path, tiny)


def test_choice_vector_save_validates(tiny, tmp_path):
    with pytest.raises(ValueError, match="negative"):
        save_choice_vector(tmp_path / "bad.csv", tiny, np.array([0.5, -0.5, 1, 0, 0]))
    with pytest.raises(ValueError, match="shape"):
        save_choice_vector(tmp_path / "bad.csv", tiny, np.zeros(4))
    # partially observed snapshots (all-zero blocks) are fine to persist
    save_choice_vector(tmp_path / "ok.csv", tiny, np.array([0.5, 0.5, 0, 0, 0]))


def test_observations_round_trip(tmp_path):
    obs = [(1, 1), (2, 1), (3, 2), (1, 2), (1, 1)]
    path = tmp_path / "obs.csv"
    save_observations(path, obs)
    assert load_observations(path) == obs
    text = path.read_text().splitlines()
    assert text[0] == "item,assortment_id"
    assert len(text) == 6


def test_model_round_trip(tmp_path):
    model = SparseModel(
        n=3,
        rankings=((2, 1, 3), (3, 2, 1)),
        weights=np.array([0.125, 0.875]),
    )
    path = tmp_path / "model.json"
    save_model(path, model)
    back = load_model(path)
    assert back.n == 3
    assert back.rankings == model.rankings
    assert np.array_equal(back.weights, model.weights)


def test_model_load_rejects_empty_support(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"n": 3, "rankings": [], "weights": []}\n')
    with pytest.raises(ValueError, match="empty support"):
        load_model(path)


def test_mixed_mnl_round_trip(tmp_path):
    model = gen_mmnl(6, 3, 5.0, seed=9)
    path = tmp_path / "truth.json"
    save_mixed_mnl(path, model)
    back = load_mixed_mnl(path)
    assert np.array_equal(back.weights, model.weights)
    assert np.array_equal(back.utilities, model.utilities)
    assert np.array_equal(back.boosted, model.boosted)
    assert back.intensity == model.intensity


def test_cost_vector_round_trip(tiny, tmp_path):
    c = np.array([0.5, -0.25, 1e-17, 3.0, -2.5])
    path = tmp_path / "cost.csv"
    save_cost_vector(path, tiny, c)
    assert np.array_equal(load_cost_vector(path, tiny), c)
    header = path.read_text().splitlines()[0]
    assert header == "assortment_id,item,cost"
    short = build_instance(3, [[1, 2]])
    with pytest.raises(ValueError):
        load_cost_vector(path, short)  # rows name an assortment it lacks


def test_write_csv_formats_scalars(tmp_path):
    path = tmp_path / "rows.csv"
    write_csv(path, ["a", "b"], [(np.float64(0.1), np.int64(3)), (0.5, "x")])
    assert path.read_text() == "a,b\n0.1,3\n0.5,x\n"
