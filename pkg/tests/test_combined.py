import warnings

import numpy as np
import pytest

from rankenv import (CurveSet, Decision, Measure, Side, combined_deviation_test, concatenate,
                     deviation_measures, deviation_vector, extreme_ranks, pointwise_ranks,
                     run_rank_test, two_stage_extreme_ranks)
from rankenv.combined import write_combined_result
from rankenv.envelope import read_envelope_csv


def _parts(rng, s=49, ks=(20, 20, 20), sides=None):
    sides = sides or ["two-sided"] * len(ks)
    return [CurveSet(np.arange(k, dtype=float), rng.normal(size=(s + 1, k)), name=f"T{i}", side=sd)
            for i, (k, sd) in enumerate(zip(ks, sides))]


def test_concatenation_shape_and_segments():
    rng = np.random.default_rng(0)
    parts = _parts(rng, ks=(500, 500, 500, 500))
    m = concatenate(parts)
    assert m.d == 2000
    assert [seg[1:] for seg in m.segments] == [(0, 500), (500, 1000), (1000, 1500), (1500, 2000)]


def test_single_part_is_identity():
    rng = np.random.default_rng(1)
    p = _parts(rng, ks=(30,))[0]
    m = concatenate([p])
    assert np.array_equal(m.values, p.curves)
    assert run_rank_test(m).summary() == run_rank_test(p.to_matrix()).summary()


def test_mismatched_s_and_k():
    rng = np.random.default_rng(2)
    a = _parts(rng, s=10, ks=(5,))[0]
    b = _parts(rng, s=11, ks=(5,))[0]
    with pytest.raises(ValueError, match="number of simulations"):
        concatenate([a, b])
    c = _parts(rng, s=10, ks=(6,))[0]
    with pytest.raises(ValueError, match="unequal"):
        concatenate([a, c])
    assert concatenate([a, c], allow_unequal=True).d == 11


def test_mixed_sides_inherited():
    rng = np.random.default_rng(3)
    m = concatenate(_parts(rng, ks=(3, 3), sides=["lower", "upper"]))
    assert m.column_sides() == [Side.LOWER] * 3 + [Side.UPPER] * 3


def test_two_stage_equals_concatenation():
    rng = np.random.default_rng(4)
    for _ in range(50):
        k = int(rng.integers(1, 10))
        parts = _parts(rng, s=int(rng.integers(3, 40)), ks=[k] * int(rng.integers(1, 5)),
                       sides=None)
        direct = extreme_ranks(pointwise_ranks(concatenate(parts)))
        assert np.array_equal(two_stage_extreme_ranks(parts), direct)


def test_part_order_invariance():
    rng = np.random.default_rng(5)
    parts = _parts(rng, s=99, ks=(10, 10, 10))
    a = run_rank_test(concatenate(parts)).summary()
    b = run_rank_test(concatenate(parts[::-1])).summary()
    assert a == b


def test_deviation_constant_curves_zero():
    c = CurveSet(np.arange(4.0), np.ones((10, 4)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for m in Measure:
            assert np.all(deviation_measures(c, m) == 0)


def test_max_hand_computed():
    r = np.linspace(0, 1, 5)
    base = np.sin(r)
    c = CurveSet(r, np.vstack([base + 0.3, base - 0.3, base]))
    assert np.allclose(deviation_measures(c, "max"), [0.3, 0.3, 0.0])


def test_int_l2_trapezoid():
    r = np.array([0.0, 1.0, 3.0])
    curves = np.vstack([np.ones(3), -np.ones(3), np.zeros(3)])
    # T0 = 0; squared deviation 1 integrated over [0, 3] = 3
    assert np.allclose(deviation_measures(CurveSet(r, curves), "int_l2"), [3, 3, 0])


def test_scaled_max_affine_invariance():
    rng = np.random.default_rng(6)
    r = np.linspace(0, 1, 15)
    T = rng.normal(size=(200, 15))
    a = rng.uniform(0.2, 5, size=15)
    b = rng.normal(size=15)
    u1 = deviation_measures(CurveSet(r, T), "scaled_max_q")
    u2 = deviation_measures(CurveSet(r, a * T + b), "scaled_max_q")
    assert np.allclose(u1, u2)


def test_scaled_max_degenerate_points_warn():
    r = np.linspace(0, 1, 3)
    T = np.random.default_rng(7).normal(size=(50, 3))
    T[:, 0] = 1.0
    with pytest.warns(RuntimeWarning, match="1 grid point"):
        deviation_measures(CurveSet(r, T), "scaled_max_q")


def test_max_nonnegative_two_sided():
    rng = np.random.default_rng(8)
    dv = deviation_vector(_parts(rng), "max")
    assert dv.u.shape == (50, 3) and np.all(dv.u >= 0)


def test_deviation_test_zero_observed_not_rejected():
    rng = np.random.default_rng(9)
    u = rng.uniform(0.1, 1, size=(100, 4))
    u[0] = 0
    res = combined_deviation_test(u, 0.05)
    assert res.decision is Decision.NOT_REJECT
    assert res.p_interval.width <= 4 / 100


def test_deviation_test_d1_is_univariate_rank():
    rng = np.random.default_rng(10)
    u = rng.normal(size=200)
    res = combined_deviation_test(u[:, None], 0.05)
    assert res.p_plus == np.mean(u >= u[0])


def test_combined_export(tmp_path):
    rng = np.random.default_rng(11)
    parts = _parts(rng, ks=(5, 5), sides=["two-sided", "upper"])
    parts[1].name = "T0"  # repeated name gets an index prefix
    res = run_rank_test(concatenate(parts))
    man = write_combined_result(tmp_path, res)
    assert [p["file"] for p in man["parts"]] == ["envelope_1_T0.csv", "envelope_2_T0.csv"]
    assert man["parts"][1]["side"] == "upper" and man["parts"][1]["offset"] == 5
    e = read_envelope_csv(tmp_path / "envelope_2_T0.csv")
    assert np.all(np.isneginf(e["lower"]))
    assert np.array_equal(e["upper"], res.envelope.upper[5:])
