import numpy as np
import pytest

from icregion.channel_model import (
    Dmic,
    GaussianIC,
    InterferencePattern,
    ProductDistribution,
    normalize_gaussian,
    random_conforming_instance,
    validate,
)
from icregion.conditions import check_conditions, classify_gaussian
from icregion.errors import CanonicalizationError, ValidationError
from icregion.info_metrics import gaussian_mi, gaussian_mi_raw, query


def all_queries(k):
    users = range(k)
    for j in users:
        for smask in range(1, 2**k):
            s = [u for u in users if smask >> u & 1]
            rest = [u for u in users if u not in s]
            for tmask in range(2 ** len(rest)):
                t = [u for n, u in enumerate(rest) if tmask >> n & 1]
                yield query(s, j, t)


def test_normalize_identity_is_unchanged(sym3):
    out = normalize_gaussian(sym3.gains, [1, 1, 1], sym3.powers)
    assert np.array_equal(out.gains, sym3.gains)
    assert np.array_equal(out.powers, sym3.powers)
    assert out == sym3


def test_normalize_halves_cross_gains():
    raw = np.array([[2, 1, 3], [1j, 2, 1], [0.5, 4, 2]], dtype=complex)
    ic = normalize_gaussian(raw, [4, 4, 4], [1, 1, 1])
    np.testing.assert_allclose(ic.powers, [1, 1, 1])
    off = ~np.eye(3, dtype=bool)
    np.testing.assert_allclose(np.abs(ic.gains[off]), np.abs(raw[off]) / 2)
    assert np.all(np.diag(ic.gains) == 1)


def test_normalize_preserves_every_mi(rng):
    for _ in range(10):
        k = int(rng.integers(2, 5))
        raw = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        nv = rng.uniform(0.1, 5, k)
        p = rng.uniform(0, 3, k)
        ic = normalize_gaussian(raw, nv, p)
        for q in all_queries(k):
            assert abs(gaussian_mi(ic, q) - gaussian_mi_raw(raw, nv, p, q)) <= 1e-12


def test_normalize_idempotent(rng):
    raw = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    once = normalize_gaussian(raw, [2, 3, 0.5], [1, 2, 3])
    twice = normalize_gaussian(once.gains, [1, 1, 1], once.powers)
    assert twice == once


def test_normalize_errors(sym3):
    with pytest.raises(ValidationError):
        normalize_gaussian(sym3.gains, [1, 0, 1], sym3.powers)
    g = sym3.gains.copy()
    g[1, 1] = 0
    with pytest.raises(CanonicalizationError):
        normalize_gaussian(g, [1, 1, 1], sym3.powers)


def test_validate_gaussian(sym3):
    assert validate(sym3) is sym3
    bad = GaussianIC(sym3.gains * 2, [1, -1, 1])
    with pytest.raises(ValidationError) as err:
        validate(bad)
    assert len(err.value.problems) == 4  # three direct gains and one power


def test_validate_dmic_row_sum(adder3):
    t = [np.array(x) for x in adder3.transitions]
    t[1][5, 0] -= 1e-6 if t[1][5, 0] > 0 else -0.0
    t[1][5, np.argmax(t[1][5])] -= 1e-6
    ch = Dmic(adder3.input_sizes, adder3.output_sizes, t)
    with pytest.raises(ValidationError) as err:
        validate(ch)
    msg = str(err.value)
    assert "receiver 2" in msg and "row 5" in msg


def test_validate_dmic_size_bound():
    n = 10**7 // 4 + 1
    ch = Dmic((n, 2), (2, 2), [np.zeros((1, 2)), np.zeros((1, 2))])
    with pytest.raises(ValidationError, match="exceeds"):
        validate(ch)


def test_validate_q_cardinality():
    pmfs = [[np.array([0.5, 0.5])] * 3] * 8
    dist = ProductDistribution(np.full(8, 1 / 8), pmfs)
    with pytest.raises(ValidationError, match=r"\|Q\| = 8 exceeds 2K\+1 = 7"):
        validate(dist)
    validate(ProductDistribution(np.full(7, 1 / 7), pmfs[:7]))


def test_pattern_shape_checked():
    with pytest.raises(ValidationError):
        InterferencePattern([1, 2, 0], [{2}, {2}, {1}])
    with pytest.raises(ValidationError):
        InterferencePattern.from_strong([0, 2, 0])
    p = InterferencePattern.cyclic(4)
    assert p.strong == (1, 2, 3, 0)
    assert p.very_strong[0] == {2, 3}


@pytest.mark.parametrize("k", [3, 4, 5])
def test_generator_conforms(k):
    for seed in range(30):
        inst = random_conforming_instance(k, seed)
        assert check_conditions(inst.ic, inst.pattern).passed
        cls = classify_gaussian(inst.ic)
        assert cls.ok and cls.report.min_margin >= 0


def test_generator_deterministic():
    a = random_conforming_instance(4, 99)
    b = random_conforming_instance(4, 99)
    assert a.ic == b.ic and a.pattern == b.pattern and a.power_scale == b.power_scale


def test_generator_k4_equal_powers():
    inst = random_conforming_instance(4, 0, powers_hint=[0.25] * 4)
    assert inst.power_scale == 1.0
    assert check_conditions(inst.ic, inst.pattern).passed
    vs = [abs(inst.ic.gains[m, j]) ** 2 for j in range(4) for m in inst.pattern.very_strong[j]]
    assert 2.0 < min(vs) and max(vs) < 4.0


def test_generator_rescales_infeasible_powers():
    inst = random_conforming_instance(4, 1, powers_hint=[2.0] * 4)
    assert inst.power_scale < 1.0
    # very strong users at a receiver need P_a P_b < 1
    assert np.all(inst.ic.powers ** 2 < 1)
    assert check_conditions(inst.ic, inst.pattern).passed


def test_generator_zero_power_user():
    inst = random_conforming_instance(3, 2, powers_hint=[0.0, 1.0, 1.0])
    assert check_conditions(inst.ic, inst.pattern).passed
