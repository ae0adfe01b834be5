
import numpy as np
import pytest
from scipy import stats

from rankenv.fanova import (GroupedCurveSet, fstat_vector, group_mean_vector, leave_one_out_vector,
                            moving_average, pairwise_diff_vector, permutation_codes,
                            permutation_engine, read_grouped_csv, segment_labels,
                            write_grouped_csv)
from rankenv import Side


def _groups(rng, sizes=(5, 6, 7), K=30, weights=False, shift=0.0):
    labels = np.repeat(np.arange(1, len(sizes) + 1), sizes)
    X = rng.normal(size=(labels.size, K)) + shift * labels[:, None]
    w = rng.uniform(1, 10, size=labels.size) if weights else None
    return GroupedCurveSet(np.linspace(0, 1, K), X, labels, w)


def test_fstat_matches_scipy_oneway():
    rng = np.random.default_rng(0)
    g = _groups(rng)
    F = fstat_vector(g)
    for k in range(g.args.size):
        ref = stats.f_oneway(*[g.curves[g.codes == j, k] for j in range(g.J)]).statistic
        assert F[k] == pytest.approx(ref, rel=1e-10)


def test_fstat_two_groups_is_t_squared():
    rng = np.random.default_rng(1)
    g = _groups(rng, sizes=(8, 11))
    t = stats.ttest_ind(g.curves[g.codes == 0], g.curves[g.codes == 1]).statistic
    assert np.allclose(fstat_vector(g), t ** 2)


def test_fstat_hand_sized():
    g = GroupedCurveSet([0.0], np.array([[1.0], [3.0], [4.0], [8.0]]), [1, 1, 2, 2])
    # means 2 and 6, grand mean 4; SSB = 2*4 + 2*4 = 16; SSW = 2 + 8 = 10; F = 16 / (10/2)
    assert fstat_vector(g)[0] == pytest.approx(3.2)


def test_welch_matches_textbook():
    rng = np.random.default_rng(2)
    g = _groups(rng, sizes=(4, 9, 6), K=5)
    F = fstat_vector(g, welch=True)
    for k in range(5):
        ys = [g.curves[g.codes == j, k] for j in range(3)]
        n = np.array([y.size for y in ys])
        m = np.array([y.mean() for y in ys])
        v = np.array([y.var(ddof=1) for y in ys])
        w = n / v
        mw = np.sum(w * m) / w.sum()
        A = np.sum(w * (m - mw) ** 2) / 2
        lam = np.sum((1 - w / w.sum()) ** 2 / (n - 1))
        assert F[k] == pytest.approx(A / (1 + 2 * 1 / 8 * lam), rel=1e-10)


def test_zero_variance_gives_inf_with_warning():
    X = np.array([[1.0, 0.0], [1.0, 1.0], [2.0, 2.0], [2.0, 5.0]])
    g = GroupedCurveSet([0.0, 1.0], X, [1, 1, 2, 2])
    with pytest.warns(RuntimeWarning, match="1 grid point"):
        F = fstat_vector(g)
    assert np.isposinf(F[0]) and np.isfinite(F[1])


def test_constant_shift_invariance():
    rng = np.random.default_rng(3)
    g = _groups(rng)
    h = GroupedCurveSet(g.args, g.curves + np.sin(g.args) * 5, g.groups)
    assert np.allclose(fstat_vector(g), fstat_vector(h))
    for sc in ("none", "unit", "ma"):
        assert np.allclose(pairwise_diff_vector(g, sc, b=5), pairwise_diff_vector(h, sc, b=5))
    assert np.allclose(leave_one_out_vector(g, b=5), leave_one_out_vector(h, b=5))


def test_group_means_weighted_oracle():
    rng = np.random.default_rng(4)
    g = _groups(rng, weights=True)
    got = group_mean_vector(g).reshape(g.J, -1)
    for j in range(g.J):
        sel = g.codes == j
        w = g.weights[sel]
        ref = sum(wi / w.sum() * x for wi, x in zip(w, g.curves[sel]))
        assert np.allclose(got[j], ref)


def test_equal_weights_reduce_to_plain_mean():
    rng = np.random.default_rng(5)
    g = _groups(rng)
    h = GroupedCurveSet(g.args, g.curves, g.groups, np.full(g.n, 3.0))
    assert np.allclose(group_mean_vector(g), group_mean_vector(h))
    assert np.allclose(pairwise_diff_vector(g, "unit"), pairwise_diff_vector(h, "unit"))


def test_one_curve_per_group_means_are_curves():
    X = np.arange(6.0).reshape(3, 2)
    g = GroupedCurveSet([0.0, 1.0], X, ["a", "b", "c"])
    assert np.array_equal(group_mean_vector(g), X.ravel())


def test_pairwise_length_and_antisymmetry():
    rng = np.random.default_rng(6)
    g = _groups(rng, K=500)
    v = pairwise_diff_vector(g)
    assert v.size == 1500
    swapped = GroupedCurveSet(g.args, g.curves, 4 - g.groups)  # relabel 1<->3
    w = pairwise_diff_vector(swapped).reshape(3, -1)
    # pair (1,3) becomes (3,1) after relabeling
    assert np.allclose(w[1], -v.reshape(3, -1)[1])


def test_identical_groups_zero_difference():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(4, 10))
    g = GroupedCurveSet(np.arange(10.0), np.vstack([X, X]), [1] * 4 + [2] * 4)
    assert np.allclose(pairwise_diff_vector(g, "unit"), 0)


def test_unit_scaling_oracle():
    rng = np.random.default_rng(8)
    g = _groups(rng, K=8)
    v = pairwise_diff_vector(g, "unit").reshape(3, -1)
    A, B = g.curves[g.codes == 0], g.curves[g.codes == 1]
    ref = (A.mean(0) - B.mean(0)) / np.sqrt(A.var(0, ddof=1) / len(A) + B.var(0, ddof=1) / len(B))
    assert np.allclose(v[0], ref)


def test_weighted_variance_of_mean():
    rng = np.random.default_rng(9)
    g = _groups(rng, K=6, weights=True)
    v = pairwise_diff_vector(g, "unit").reshape(3, -1)
    parts = []
    for j in (0, 1):
        sel = g.codes == j
        w = g.weights[sel] / g.weights[sel].sum()
        parts.append((w @ g.curves[sel], g.curves[sel].var(0, ddof=1) * np.sum(w ** 2)))
    ref = (parts[0][0] - parts[1][0]) / np.sqrt(parts[0][1] + parts[1][1])
    assert np.allclose(v[0], ref)


def test_moving_average():
    v = np.arange(10.0) ** 2
    assert np.array_equal(moving_average(v, 1), v)
    ma = moving_average(v, 3)
    assert ma[0] == pytest.approx((0 + 1) / 2)
    assert ma[5] == pytest.approx((16 + 25 + 36) / 3)
    with pytest.raises(ValueError):
        moving_average(v, 4)


def test_leave_one_out_oracle():
    rng = np.random.default_rng(10)
    g = _groups(rng, sizes=(6, 6, 6), K=12)
    v = leave_one_out_vector(g, b=3).reshape(3, -1)
    for i in range(3):
        ins = g.curves[g.codes == i]
        out_groups = [g.curves[g.codes == j] for j in range(3) if j != i]
        rest = np.vstack(out_groups)
        var_in = ins.var(0, ddof=1) / len(ins)
        var_rest = sum(G.var(0, ddof=1) * len(G) for G in out_groups) / len(rest) ** 2
        ref = (ins.mean(0) - rest.mean(0)) / np.sqrt(moving_average(var_in, 3) + moving_average(var_rest, 3))
        assert np.allclose(v[i], ref)


def test_leave_one_out_two_groups_antisymmetric():
    rng = np.random.default_rng(11)
    g = _groups(rng, sizes=(5, 9))
    v = leave_one_out_vector(g, b=5).reshape(2, -1)
    assert np.allclose(v[0], -v[1])


def test_batched_equals_single():
    rng = np.random.default_rng(12)
    g = _groups(rng, weights=True)
    codes = permutation_codes(g, 7, seed=1)
    for fn, kw in [(fstat_vector, {}), (fstat_vector, {"welch": True}),
                   (pairwise_diff_vector, {"scaling": "ma", "b": 5}),
                   (leave_one_out_vector, {"b": 3})]:
        batch = fn(g, codes=codes, **kw)
        for k in range(7):
            h = GroupedCurveSet(g.args, g.curves, g.labels[codes[k]], g.weights)
            assert np.allclose(batch[k], fn(h, **kw))


def test_permutation_engine_layout():
    rng = np.random.default_rng(13)
    g = _groups(rng, K=20)
    m = permutation_engine(g, "fstat", s=99, seed=3)
    assert m.values.shape == (100, 20) and m.side is Side.UPPER
    assert np.allclose(m.values[0], fstat_vector(g))
    m2 = permutation_engine(g, "pairwise", s=99, seed=3, scaling="unit")
    assert m2.d == 60 and m2.side is Side.TWO_SIDED
    assert [seg[0] for seg in m2.segments] == segment_labels(g, "pairwise")
    assert m2.segments[0][0] == "group 1 - group 2"


def test_permutations_deterministic_and_chunk_free():
    rng = np.random.default_rng(14)
    g = _groups(rng)
    a = permutation_engine(g, "loo", s=600, seed=9, b=3, chunk=64)
    b = permutation_engine(g, "loo", s=600, seed=9, b=3, chunk=1000)
    assert np.array_equal(a.values, b.values)
    c = permutation_codes(g, 600, 9)
    assert np.array_equal(np.sort(c, axis=1), np.tile(np.sort(g.codes), (600, 1)))


def test_relabeling_symmetry():
    # the permutation distribution of F does not depend on which group is called what
    rng = np.random.default_rng(15)
    g = _groups(rng, sizes=(6, 6, 6), K=5)
    h = GroupedCurveSet(g.args, g.curves, (g.groups % 3) + 1)
    a = permutation_engine(g, "fstat", s=999, seed=2).values[1:]
    b = permutation_engine(h, "fstat", s=999, seed=2).values[1:]
    assert stats.ks_2samp(a[:, 0], b[:, 0], method="asymp").pvalue > 0.001


def test_grouped_csv_round_trip(tmp_path):
    rng = np.random.default_rng(16)
    g = _groups(rng, K=7, weights=True)
    g.curve_ids = [f"c{i}" for i in range(g.n)]
    write_grouped_csv(tmp_path / "g.csv", g)
    h = read_grouped_csv(tmp_path / "g.csv")
    assert np.array_equal(h.curves, g.curves) and np.array_equal(h.weights, g.weights)
    assert np.array_equal(h.args, g.args)


def test_grouped_csv_incomplete_grid(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("group,curve_id,r,value\n1,a,0,1\n1,a,1,2\n2,b,0,1\n")
    with pytest.raises(ValueError, match="common grid"):
        read_grouped_csv(p)
    p.write_text("group,curve_id,r,value\n1,a,0,x\n")
    with pytest.raises(ValueError, match=":2:"):
        read_grouped_csv(p)


def test_validation():
    with pytest.raises(ValueError, match="two groups"):
        GroupedCurveSet([0.0], np.zeros((3, 1)), [1, 1, 1])
    with pytest.raises(ValueError, match="positive"):
        GroupedCurveSet([0.0], np.zeros((2, 1)), [1, 2], [1.0, 0.0])
    g = GroupedCurveSet([0.0], np.zeros((3, 1)), [1, 1, 2])
    with pytest.raises(ValueError, match="two curves"):
        fstat_vector(g)
