import math

import numpy as np
import pytest

import interp_lab as il
from interp_lab.couples import DimensionMismatchError, as_element

INF = math.inf


def test_norm_examples():
    s = il.SpaceSpec(2.0, np.ones(3))
    assert s.norm([0.0, 0.0, 0.0]) == 0.0
    assert s.norm(np.zeros(3)) == 0.0
    assert il.SpaceSpec(2.0, np.ones(2)).norm([3.0, -4.0]) == pytest.approx(5.0, abs=0)
    # max(2*1, 1*2) = 2
    assert il.SpaceSpec(INF, np.array([2.0, 1.0])).norm([1.0, 2.0]) == 2.0


def test_intersection_and_sum_examples():
    c = il.l1_linf_couple(2)
    assert il.intersection_norm(np.zeros(2), c) == 0.0
    assert il.intersection_norm(np.array([1.0, 1.0]), c) == 2.0
    assert il.sum_norm(np.array([3.0, 1.0]), c) == pytest.approx(3.0, rel=1e-12)
    d = il.degenerate_couple(2.0, np.ones(2))
    x = np.array([1.0, 2.0])
    assert il.sum_norm(x, d) == pytest.approx(d.norm0(x), rel=1e-12)
    assert il.intersection_norm(x, d) == d.norm0(x)


def test_element_validation():
    with pytest.raises(ValueError):
        as_element([1.0, float("nan")])
    with pytest.raises(ValueError):
        as_element([1.0, float("inf")])
    with pytest.raises(ValueError):
        as_element([[1.0, 2.0]])
    with pytest.raises(DimensionMismatchError):
        as_element([1.0, 2.0], dim=3)
    s = il.SpaceSpec(1.0, np.ones(2))
    with pytest.raises(DimensionMismatchError):
        s.norm([1.0, 2.0, 3.0])


def test_space_validation():
    with pytest.raises(ValueError):
        il.SpaceSpec(0.5, np.ones(2))
    with pytest.raises(ValueError):
        il.SpaceSpec(2.0, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        il.SpaceSpec(2.0, np.array([1.0, -1.0]))
    with pytest.raises(DimensionMismatchError):
        il.CoupleSpec(il.unit_space(1.0, 2), il.unit_space(2.0, 3))


def test_norm_ordering_random(rng, weighted_couples):
    # sum <= min(n0, n1) <= max = intersection, and sum <= n0, on many vectors
    for c in weighted_couples:
        X = rng.standard_normal((1000, c.dim)) * 2.0
        n0 = c.space0.norm_batch(X)
        n1 = c.space1.norm_batch(X)
        for i in range(0, 1000, 97):  # sum_norm solve per vector is the slow part
            s = il.sum_norm(X[i], c, tol=1e-9)
            assert s <= min(n0[i], n1[i]) * (1 + 1e-9)
            assert s <= n0[i] * (1 + 1e-9)
        inter = np.maximum(n0, n1)
        assert np.all(np.minimum(n0, n1) <= inter)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.5, INF])
def test_norm_homogeneous_and_triangle(rng, p):
    w = np.exp(rng.uniform(-1, 1, 7))
    s = il.SpaceSpec(p, w)
    for _ in range(200):
        x = rng.standard_normal(7) * 3
        y = rng.standard_normal(7) * 3
        lam = rng.uniform(-4, 4)
        assert s.norm(lam * x) == pytest.approx(abs(lam) * s.norm(x), rel=1e-12, abs=1e-300)
        assert s.norm(x + y) <= (s.norm(x) + s.norm(y)) * (1 + 1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_norm_monotone_in_weights(rng, p):
    for _ in range(100):
        w = np.exp(rng.uniform(-1, 1, 5))
        x = rng.standard_normal(5)
        i = int(rng.integers(5))
        w2 = w.copy()
        w2[i] *= 1.0 + rng.uniform(0.0, 2.0)
        assert il.SpaceSpec(p, w2).norm(x) >= il.SpaceSpec(p, w).norm(x) * (1 - 1e-15)


def test_embedding_certificate():
    assert il.l1_linf_couple(4).norm1_le_norm0
    c = il.CoupleSpec(il.unit_space(2.0, 4), il.unit_space(1.0, 4))
    assert not c.norm1_le_norm0
    with pytest.raises(ValueError):
        il.source_couple(il.unit_space(2.0, 4), il.unit_space(1.0, 4))
    # heavier weights upstairs break the basis-vector check
    c2 = il.CoupleSpec(il.unit_space(1.0, 4), il.SpaceSpec(INF, 2.0 * np.ones(4)))
    assert not c2.norm1_le_norm0
    src = il.source_couple(il.unit_space(1.0, 4), il.unit_space(INF, 4))
    # certificate is honest: check on random vectors
    rng = np.random.default_rng(5)
    X = rng.standard_normal((500, 4))
    assert np.all(src.space1.norm_batch(X) <= src.space0.norm_batch(X) * (1 + 1e-12))


def test_degenerate_flag():
    assert il.degenerate_couple(2.0, np.ones(3)).degenerate
    assert not il.l1_linf_couple(3).degenerate


def test_couple_json_roundtrip():
    c = il.CoupleSpec(
        il.SpaceSpec(1.0, np.array([1.0, 2.0])), il.SpaceSpec(INF, np.array([0.5, 0.25]))
    )
    obj = c.to_json()
    assert obj == {
        "dim": 2,
        "space0": {"p": 1.0, "weights": [1.0, 2.0]},
        "space1": {"p": "inf", "weights": [0.5, 0.25]},
    }
    c2 = il.CoupleSpec.from_json(obj)
    assert c2.space0.same_as(c.space0) and c2.space1.same_as(c.space1)
    with pytest.raises(ValueError):
        il.CoupleSpec.from_json({**obj, "dim": 5})
