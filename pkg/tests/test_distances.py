import numpy as np
import pytest

from rankchoice import (
    DISTANCE_KINDS,
    build_instance,
    curvature_probe,
    make_distance,
    predict,
    project_l1_ball,
    vertex,
)
from conftest import random_sparse_model

D = np.array([0.3, -0.3, 0.2, 0.0, -0.2])
P = np.array([0.5, 0.5, 0.5, 0.5, 0.0])
X = P + D

NORM_KINDS = ("l1", "l2", "linf")


def test_values_hand_computed(tiny):
    assert make_distance("l1").value(X, P) == pytest.approx(1.0, abs=1e-15)
    assert make_distance("l2").value(X, P) == pytest.approx(0.5099019513592785, abs=1e-15)
    assert make_distance("linf").value(X, P) == pytest.approx(0.3, abs=1e-15)
    assert make_distance("sql2").value(X, P) == pytest.approx(0.13, abs=1e-15)
    wkl = make_distance("wkl", inst=tiny)
    x = np.array([0.25, 0.75, 0.5, 0.25, 0.25])
    # uniform assortment weights; per-block relative entropy worked by hand
    assert wkl.value(x, P) == pytest.approx(0.24520731325293155, rel=1e-12)


def test_identity_of_indiscernibles():
    for kind in NORM_KINDS + ("sql2",):
        assert make_distance(kind).value(P, P) == 0.0


def test_wkl_infinite_when_support_not_covered(tiny):
    wkl = make_distance("wkl", inst=tiny)
    x = np.array([0.0, 1.0, 0.5, 0.25, 0.25])  # zero where P is positive
    assert wkl.value(x, P) == np.inf
    with pytest.raises(ValueError):
        wkl.subgradient(x, P)


def test_subgradients_hand_computed():
    assert make_distance("l1").subgradient(X, P).tolist() == [1, -1, 1, 0, -1]
    g2 = make_distance("l2").subgradient(X, P)
    assert np.allclose(g2, D / 0.5099019513592785, atol=1e-15)
    # largest |coordinate| wins; first index on ties
    gi = make_distance("linf").subgradient(P + np.array([0.2, -0.5, 0.1, 0.0, 0.0]), P)
    assert gi.tolist() == [0, -1, 0, 0, 0]
    assert np.allclose(make_distance("sql2").subgradient(X, P), D, atol=1e-15)


def test_subgradient_inequality():
    # D(x', p) >= D(x, p) + <g, x' - x> for convex D
    rng = np.random.default_rng(3)
    tiny = build_instance(3, [[1, 2], [1, 2, 3]])
    kinds = [make_distance(k) for k in ("l1", "l2", "linf", "sql2")]
    kinds.append(make_distance("wkl", inst=tiny))
    for _ in range(200):
        p = predict(tiny, random_sparse_model(3, 2, rng))
        x = predict(tiny, random_sparse_model(3, 3, rng))
        x2 = predict(tiny, random_sparse_model(3, 2, rng))
        for dist in kinds:
            v = dist.value(x, p)
            if not np.isfinite(v):
                continue
            g = dist.subgradient(x, p)
            lhs = dist.value(x2, p)
            assert lhs >= v + float(g @ (x2 - x)) - 1e-9


def test_subgradient_dual_norm_at_most_one():
    rng = np.random.default_rng(4)
    for _ in range(200):
        x = rng.random(7)
        p = rng.random(7)
        for kind in NORM_KINDS:
            dist = make_distance(kind)
            g = dist.subgradient(x, p)
            assert dist.dual_norm(g) <= 1.0 + 1e-9


def test_finite_difference_agreement(tiny):
    # directional finite differences at 100 smooth points per kind
    rng = np.random.default_rng(5)
    h = 1e-6
    wkl = make_distance("wkl", inst=tiny)
    checked = {k: 0 for k in ("l1", "l2", "linf", "sql2", "wkl")}
    while min(checked.values()) < 100:
        x = 0.2 + 0.6 * rng.random(5)
        p = 0.2 + 0.6 * rng.random(5)
        d = x - p
        for kind in ("l1", "l2", "linf", "sql2", "wkl"):
            if kind == "l1" and np.min(np.abs(d)) < 1e-3:
                continue  # kink at zero coordinates
            if kind == "linf":
                s = np.sort(np.abs(d))
                if s[-1] - s[-2] < 1e-3:
                    continue  # kink at tied maxima
            dist = wkl if kind == "wkl" else make_distance(kind)
            g = dist.subgradient(x, p)
            v = rng.normal(size=5)
            v /= np.linalg.norm(v)
            fd = (dist.value(x + h * v, p) - dist.value(x - h * v, p)) / (2 * h)
            assert fd == pytest.approx(float(g @ v), rel=1e-5, abs=1e-8)
            checked[kind] += 1


def test_conjugate_linear_on_dual_ball(tiny):
    dist = make_distance("l1")
    y = np.ones(5)
    assert dist.conjugate(y, P) == pytest.approx(2.0, abs=1e-15)  # <1, P>
    with pytest.raises(ValueError):
        dist.conjugate(1.5 * np.ones(5), P)  # outside the dual ball


def test_value_equals_subgradient_pairing():
    # norms satisfy ||d|| = <g, d> exactly for g in the subdifferential
    rng = np.random.default_rng(6)
    for _ in range(100):
        x = rng.random(6)
        p = rng.random(6)
        for kind in NORM_KINDS:
            dist = make_distance(kind)
            g = dist.subgradient(x, p)
            assert abs(dist.value(x, p) - float(g @ (x - p))) <= 1e-12


def test_dual_projections_hand_computed():
    l2 = make_distance("l2")
    assert l2.project_dual(np.array([2.0, 0.0])).tolist() == [1.0, 0.0]
    assert l2.project_dual(np.array([0.3, -0.4])).tolist() == [0.3, -0.4]
    l1 = make_distance("l1")
    assert l1.project_dual(np.array([1.5, -0.3])).tolist() == [1.0, -0.3]
    li = make_distance("linf")
    assert np.allclose(li.project_dual(np.array([0.8, 0.6])), [0.6, 0.4], atol=1e-12)
    assert li.project_dual(np.array([0.3, -0.4])).tolist() == [0.3, -0.4]


def test_l1_ball_projection_against_qp():
    from scipy.optimize import LinearConstraint, milp  # noqa: F401  (scipy present)
    from scipy.optimize import minimize

    rng = np.random.default_rng(7)
    for _ in range(50):
        y = rng.normal(scale=1.5, size=6)
        z = project_l1_ball(y)
        assert np.abs(z).sum() <= 1.0 + 1e-9
        # cross-check against a generic solver on the split-variable QP
        def obj(u):
            w = u[:6] - u[6:]
            return 0.5 * np.sum((w - y) ** 2)

        cons = LinearConstraint(np.ones(12), -np.inf, 1.0)
        res = minimize(obj, np.zeros(12), constraints=[cons], bounds=[(0, None)] * 12)
        w = res.x[:6] - res.x[6:]
        assert 0.5 * np.sum((z - y) ** 2) <= 0.5 * np.sum((w - y) ** 2) + 1e-8


def test_set_widths(tiny):
    assert make_distance("l1").set_width(tiny.N) == tiny.N / 2
    assert make_distance("l2").set_width(tiny.N) == 0.5
    assert make_distance("linf").set_width(tiny.N) == 0.5


def test_masking_restricts_coordinates(tiny):
    mask = np.array([True, True, False, False, False])
    dist = make_distance("l1")
    assert dist.value(X, P, mask) == pytest.approx(0.6, abs=1e-15)
    g = dist.subgradient(X, P, mask)
    assert g.tolist() == [1, -1, 0, 0, 0]


def test_curvature_probe_norm_grows_per_decade(tiny):
    # second-difference ratio of l1 grows like 1/alpha: x10 per decade
    p = predict(tiny, random_sparse_model(3, 2, np.random.default_rng(8)))
    s = vertex(tiny, (3, 2, 1))
    if np.array_equal(s, p):
        s = vertex(tiny, (1, 2, 3))
    alphas = [1e-1, 1e-2, 1e-3, 1e-4]
    ratios = curvature_probe(make_distance("l1"), p, s, alphas)
    for a, b in zip(ratios, ratios[1:]):
        assert b / a == pytest.approx(10.0, rel=1e-6)
    # squared distance has a bounded ratio instead
    flat = curvature_probe(make_distance("sql2"), p, s, alphas)
    assert max(flat) / min(flat) == pytest.approx(1.0, rel=1e-6)


def test_probe_rejects_bad_alpha(tiny):
    p = vertex(tiny, (1, 2, 3))
    s = vertex(tiny, (3, 2, 1))
    with pytest.raises(ValueError):
        curvature_probe(make_distance("l1"), p, s, [0.0])
    with pytest.raises(ValueError):
        curvature_probe(make_distance("l1"), p, s, [1.5])


def test_make_distance_dispatch(tiny):
    assert set(DISTANCE_KINDS) == {"l1", "l2", "linf", "sql2", "wkl"}
    for kind in DISTANCE_KINDS:
        dist = make_distance(kind, inst=tiny)
        assert dist.kind == kind
    with pytest.raises(ValueError):
        make_distance("l3")
    with pytest.raises(ValueError):
        make_distance("wkl")  # needs the instance for block weights


def test_support_flags():
    assert make_distance("sql2").supports_fw
    for kind in NORM_KINDS:
        dist = make_distance(kind)
        assert dist.supports_dual and not dist.supports_fw
