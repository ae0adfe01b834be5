import numpy as np
import pytest

from _fixtures import random_matrix
from rankenv import (Decision, TestMatrix, critical_rank, extreme_ranks, p_interval,
                     pointwise_ranks, recommend_simulations, run_rank_test)
from rankenv.envelope import read_envelope_csv, write_envelope_csv


def test_p_interval_counts():
    pi = p_interval(np.array([2.0, 1.0, 2.0, 3.0, 4.0]))
    assert (pi.p_minus, pi.p_plus) == (1 / 5, 3 / 5)
    assert pi.width == pytest.approx(2 / 5)


def test_critical_rank_default_and_literal():
    r = np.array([1.0, 2, 3, 4, 5])
    # alpha (s+1) = 1 is an integer: the literal rule gives 1, the default 2
    assert critical_rank(r, 0.2, literal=True) == 1.0
    assert critical_rank(r, 0.2) == 2.0
    # non-integer alpha (s+1): both rules agree
    assert critical_rank(r, 0.3) == critical_rank(r, 0.3, literal=True) == 2.0


def _scan(r, alpha):
    # smallest observed rank value whose lower tail has more than alpha (s+1) rows
    n = r.size
    for v in sorted(set(r)):
        if np.sum(r <= v) > alpha * n:
            return v


def test_critical_rank_exhaustive_scan():
    rng = np.random.default_rng(4)
    for _ in range(500):
        n = int(rng.integers(2, 40))
        r = rng.integers(1, 6, size=n).astype(float) / rng.choice([1, 2])
        alpha = float(rng.choice([0.05, 0.1, 0.2, 0.25, 0.5, rng.random() * 0.9 + 0.01]))
        assert critical_rank(r, alpha) == _scan(r, alpha)


def test_decision_theorem_on_fixtures():
    rng = np.random.default_rng(5)
    for _ in range(300):
        m = random_matrix(rng, s_range=(4, 80), d_range=(1, 10))
        alpha = float(rng.choice([0.05, 0.1, 0.2]))
        res = run_rank_test(m, alpha)
        r1, ra = res.observed_rank, res.critical_rank
        assert (r1 < ra) == (res.p_plus <= alpha)
        assert (r1 > ra) == (res.p_minus > alpha)
        assert (r1 == ra) == (res.p_minus <= alpha < res.p_plus)
        # rejection by p+ is rejection by the envelope
        if res.decision is Decision.REJECT:
            assert res.envelope.outside(m.values[0])


def test_envelope_nested_in_alpha():
    rng = np.random.default_rng(6)
    m = TestMatrix(rng.normal(size=(200, 20)))
    a = run_rank_test(m, 0.05).envelope
    b = run_rank_test(m, 0.2).envelope
    assert np.all(b.lower >= a.lower) and np.all(b.upper <= a.upper)


def test_one_sided_bounds_are_infinite():
    rng = np.random.default_rng(7)
    m = TestMatrix(rng.normal(size=(50, 3)), side=["lower", "upper", "two-sided"])
    env = run_rank_test(m).envelope
    assert np.isposinf(env.upper[0]) and np.isneginf(env.lower[1])
    assert np.all(np.isfinite([env.lower[0], env.upper[1], env.lower[2], env.upper[2]]))


def test_scale_invariance():
    rng = np.random.default_rng(8)
    v = rng.normal(size=(100, 6))
    a = run_rank_test(TestMatrix(v), 0.1)
    c = rng.uniform(0.5, 3.0, size=6)
    b = run_rank_test(TestMatrix(v * c), 0.1)
    assert a.summary() == b.summary()
    assert np.allclose(b.envelope.upper, a.envelope.upper * c)


def test_observed_copy_of_simulation_not_rejected():
    rng = np.random.default_rng(9)
    for _ in range(50):
        v = rng.normal(size=(40, 5))
        v[0] = v[1]
        assert run_rank_test(TestMatrix(v), 0.05).decision is not Decision.REJECT


def test_width_is_ties_over_n():
    rng = np.random.default_rng(10)
    m = random_matrix(rng)
    r = extreme_ranks(pointwise_ranks(m))
    pi = p_interval(r)
    assert pi.width == pytest.approx(np.sum(r == r[0]) / r.size)


def test_recommend_simulations():
    assert recommend_simulations(d=3, sided="two-sided", width=0.01) == 599
    assert recommend_simulations(d=1, sided="lower", width=0.01) == 99
    assert recommend_simulations(k_functions=4) == 10000


def test_envelope_csv_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    m = TestMatrix(rng.normal(size=(60, 8)) * 1e-3 + 1 / 3, side=["lower"] * 4 + ["two-sided"] * 4,
                   args=np.linspace(0, 1, 8) / 7)
    res = run_rank_test(m)
    write_envelope_csv(tmp_path / "e.csv", res)
    back = read_envelope_csv(tmp_path / "e.csv")
    assert np.array_equal(back["lower"], res.envelope.lower)
    assert np.array_equal(back["upper"], res.envelope.upper)
    assert np.array_equal(back["central"], res.envelope.central)
    assert np.array_equal(back["observed"], m.values[0])
    assert np.array_equal(back["arg"], m.args)


def test_alpha_validated():
    with pytest.raises(ValueError):
        critical_rank(np.array([1.0, 2.0]), 1.5)
