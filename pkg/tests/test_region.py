import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from icregion.channel_model import InterferencePattern, ProductDistribution, random_conforming_instance
from icregion.conditions import PAPER_CASE1, PAPER_CASE2, paper_case
from icregion.errors import ConditionError, EmptySliceError, ScaleError, ValidationError
from icregion.region import (
    HalfSpace,
    RatePolytope,
    capacity_polytope,
    contains,
    dmic_sampled_hull,
    hausdorff,
    max_weighted_sum,
    reference_3user_system,
    reference_for_pattern,
    same_constraint_set,
    slice2d,
    strong_interference_2user,
    vertices,
)
from icregion import presets

LOG2_3 = math.log2(3)


def lp_max(p, w):
    a, b = p.constraint_matrix()
    res = linprog(-np.asarray(w, float), A_ub=a, b_ub=b, bounds=[(None, None)] * p.dim, method="highs")
    assert res.status == 0
    return -res.fun


def qhull_vertices(p):
    a, b = p.constraint_matrix()
    # interior point: small positive rates
    interior = np.full(p.dim, 1e-3)
    hs = HalfspaceIntersection(np.hstack([a, -b[:, None]]), interior)
    return hs.intersections


def test_sym3_golden(sym3):
    p = capacity_polytope(sym3, PAPER_CASE1)
    assert p.note == "capacity region"
    m = p.merged()
    assert m == pytest.approx({(0,): 1.0, (1,): 1.0, (2,): 1.0,
                               (0, 1): LOG2_3, (1, 2): LOG2_3, (0, 2): LOG2_3}, abs=1e-12)
    value, point = max_weighted_sum(p, [1, 1, 1])
    assert value == pytest.approx(1.5 * LOG2_3, abs=1e-9)
    np.testing.assert_allclose(point, [LOG2_3 / 2] * 3, atol=1e-9)


def test_case2_min_structure(case2):
    p = capacity_polytope(case2, PAPER_CASE2)
    pair12 = [h for h in p.halfspaces if h.users == (0, 1)]
    assert sorted(h.source.receiver for h in pair12) == [0, 1]
    assert same_constraint_set(p, reference_3user_system(case2, 2, (0, 1, 2)))


def test_condition_error(sym3):
    broken = sym3.with_gain(1, 0, 0.5)
    with pytest.raises(ConditionError):
        capacity_polytope(broken, PAPER_CASE1)
    assert capacity_polytope(broken, PAPER_CASE1, force=True).note.startswith("forced")


def test_dmic_note(adder3):
    dist = ProductDistribution.uniform(adder3.input_sizes)
    p = capacity_polytope(adder3, presets.adder3_pattern(), dist)
    assert "distribution" in p.note
    assert p.merged() == pytest.approx({(0,): 1, (1,): 1, (2,): 1, (0, 1): 2, (1, 2): 2, (0, 2): 2})


@pytest.mark.parametrize("k", [3, 4, 5])
def test_vertices_against_qhull(k):
    for seed in range(5):
        inst = random_conforming_instance(k, seed)
        p = capacity_polytope(inst.ic, inst.pattern)
        ours = vertices(p)
        theirs = qhull_vertices(p)
        assert hausdorff(ours, theirs) <= 1e-9
        assert len(ours) == len(np.unique(np.round(theirs, 8), axis=0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 5))
def test_weighted_sum_against_lp(seed, k):
    inst = random_conforming_instance(k, seed)
    p = capacity_polytope(inst.ic, inst.pattern)
    w = np.random.default_rng(seed).uniform(0, 1, k) + 1e-3
    value, point = max_weighted_sum(p, w)
    assert value == pytest.approx(lp_max(p, w), abs=1e-9)
    assert contains(p, point)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_vertices_are_contained(seed):
    inst = random_conforming_instance(3, seed)
    p = capacity_polytope(inst.ic, inst.pattern)
    for v in vertices(p):
        assert contains(p, v)
        assert not contains(p, v + 1e-6 * np.ones(3)) or np.all(v == 0)


def test_weight_validation(sym3):
    p = capacity_polytope(sym3, PAPER_CASE1)
    for w in ([0, 0, 0], [1, -1, 1], [1, 1]):
        with pytest.raises(ValidationError):
            max_weighted_sum(p, w)


def test_scale_error():
    p = RatePolytope(9, [HalfSpace([i], 1.0) for i in range(9)])
    with pytest.raises(ScaleError):
        vertices(p)


def test_halfspace_validation():
    with pytest.raises(ValidationError):
        HalfSpace([0, 1, 2], 1.0)
    with pytest.raises(ValidationError):
        HalfSpace([0], -1.0)
    with pytest.raises(ValidationError):
        RatePolytope(2, [HalfSpace([2], 1.0)])


def test_contains_shape(sym3):
    p = capacity_polytope(sym3, PAPER_CASE1)
    with pytest.raises(ValidationError):
        contains(p, [0, 0])
    assert not contains(p, [-0.1, 0, 0])


@pytest.mark.parametrize("case,ref", [(1, PAPER_CASE1), (2, PAPER_CASE2)])
def test_reference_systems_random(case, ref):
    for seed in range(10):
        inst = random_conforming_instance(3, seed, pattern=ref)
        p = capacity_polytope(inst.ic, inst.pattern)
        assert same_constraint_set(p, reference_3user_system(inst.ic, case, (0, 1, 2)))


def test_reference_under_relabeling():
    for strong in ([2, 0, 1], [2, 2, 0], [1, 2, 1]):
        pat = InterferencePattern.from_strong(strong)
        inst = random_conforming_instance(3, 7, pattern=pat)
        case, perm = paper_case(pat)
        assert same_constraint_set(capacity_polytope(inst.ic, pat), reference_for_pattern(inst.ic, pat))


def test_two_user_reduction():
    for seed in range(10):
        inst = random_conforming_instance(2, seed)
        p = capacity_polytope(inst.ic, inst.pattern)
        assert same_constraint_set(p, strong_interference_2user(inst.ic))


def test_slice_sym3(sym3):
    p = capacity_polytope(sym3, PAPER_CASE1)
    sl = slice2d(p, 0, 1, {2: 0.0}, grid=11)
    np.testing.assert_allclose(sl.polyline, [[0, 1], [LOG2_3 - 1, 1], [1, LOG2_3 - 1], [1, 0]], atol=1e-12)
    lines = sl.to_csv().splitlines()
    assert lines[0] == "R_1,R_2" and "\r" not in sl.to_csv()
    sl1 = slice2d(p, 0, 1, {2: 1.0})
    c = LOG2_3 - 1  # R1 + R2 bound is slack once both singles are cut to c
    np.testing.assert_allclose(sl1.polyline, [[0, c], [c, c], [c, 0]], atol=1e-12)
    with pytest.raises(EmptySliceError):
        slice2d(p, 0, 1, {2: 2.0})
    with pytest.raises(ValidationError):
        slice2d(p, 0, 0, {2: 0.0})


def test_slice_samples_on_boundary(sym3):
    p = capacity_polytope(sym3, PAPER_CASE1)
    sl = slice2d(p, 1, 2, {0: 0.3}, grid=50)
    for x, y in sl.samples:
        r = np.array([0.3, x, y])
        assert contains(p, r)
        if x < sl.polyline[-1][0] - 1e-9:
            assert not contains(p, r + [0, 0, 1e-6])


def test_sampled_hull_monotone(adder3):
    pat = presets.adder3_pattern()
    small = dmic_sampled_hull(adder3, pat, 5, 1, 0)
    big = dmic_sampled_hull(adder3, pat, 20, 2, 0)
    assert small.volume <= big.volume + 1e-12
    # uniform input already achieves the full adder region
    assert small.volume == pytest.approx(big.volume, abs=1e-9)
    with pytest.raises(ValidationError):
        dmic_sampled_hull(adder3, pat, 2, 8, 0)


def test_sampled_hull_growth():
    from icregion.conditions import make_degraded_pair
    ch = make_degraded_pair((2, 2, 2), 3, 1)
    pat = InterferencePattern.cyclic(3)
    vols = [dmic_sampled_hull(ch, pat, n, 1, 4).volume for n in (1, 5, 20)]
    assert vols[0] <= vols[1] + 1e-12 <= vols[2] + 2e-12
