import math
from fractions import Fraction as Fr

import pytest

from dyadiclab.dyadic_core import (DyadicRational, DyadicSet, all_sets, build_martingale,
                                   canonicalize, concat, initial_interval_set, integral_alpha,
                                   martingale_differences, norm_alpha, s1_integral, s_beta_powers,
                                   x_star)
from dyadiclab.gaussian_profile import iso_profile
from dyadiclab.staircase import P_value
from oracles import naive_averages, naive_s1_integral, naive_s_beta_powers

QUARTER = DyadicSet.from_indices(2, [0])


def test_canonicalize_examples():
    assert canonicalize(DyadicRational(2, 2)) == DyadicRational(1, 1)
    c = canonicalize(DyadicRational(2, 2))
    assert (c.num, c.level) == (1, 1)
    z = canonicalize(DyadicRational(0, 3))
    assert (z.num, z.level) == (0, 0)
    t = canonicalize(DyadicRational(3, 3))
    assert (t.num, t.level) == (3, 3)
    assert canonicalize(canonicalize(DyadicRational(12, 5))) == canonicalize(DyadicRational(12, 5))


def test_dyadic_rational_rejects_out_of_range():
    with pytest.raises(ValueError):
        DyadicRational(5, 2)
    with pytest.raises(ValueError):
        DyadicRational(-1, 2)
    with pytest.raises(ValueError):
        DyadicRational.from_value(Fr(1, 3))


def test_dyadic_rational_order_and_str():
    assert DyadicRational(1, 2) < DyadicRational(3, 3) < DyadicRational(1, 1)
    assert DyadicRational(4, 3) == Fr(1, 2)
    assert hash(DyadicRational(4, 3)) == hash(DyadicRational(1, 1))
    assert str(DyadicRational(6, 4)) == "3/8"
    assert float(DyadicRational(3, 3)) == 0.375
    assert DyadicRational(5, 3).star() == DyadicRational(3, 3)
    assert x_star(Fr(5, 8)) == Fr(3, 8)


def test_build_martingale_examples():
    t = build_martingale(QUARTER)
    av = t.node_averages
    assert av[0] == [Fr(1, 4)]
    assert av[1] == [Fr(1, 2), Fr(0)]
    assert av[2] == [1, 0, 0, 0]
    assert all(v == 0 for lvl in build_martingale(DyadicSet.empty(3)).node_averages for v in lvl)
    half = build_martingale(DyadicSet.from_indices(1, [0])).node_averages
    assert half == [[Fr(1, 2)], [1, 0]]


def test_martingale_matches_direct_averaging():
    A = DyadicSet.from_indices(3, [0, 2, 3, 7])
    t = build_martingale(A)
    direct = naive_averages(list(A.leaves))
    for l in range(4):
        for i in range(1 << l):
            assert t.average(l, i) == direct[(l, i)]
            if l < 3:
                assert t.average(l, i) == (t.average(l + 1, 2 * i) + t.average(l + 1, 2 * i + 1)) / 2


def test_martingale_differences_examples():
    d = martingale_differences(build_martingale(DyadicSet.from_indices(1, [0])))
    assert d[0].values == (Fr(1, 2), Fr(1, 2))
    d = martingale_differences(build_martingale(QUARTER))
    assert d[0].values == (Fr(1, 4),) * 4
    assert d[1].values == (Fr(1, 2), Fr(1, 2), 0, 0)
    d = martingale_differences(build_martingale(DyadicSet.full(3)))
    assert all(v == 0 for lv in d for v in lv.values)


def test_s_beta_powers_examples():
    assert s_beta_powers(QUARTER, 1).values == (Fr(3, 4), Fr(3, 4), Fr(1, 4), Fr(1, 4))
    assert s_beta_powers(QUARTER, 2).values == (Fr(5, 16), Fr(5, 16), Fr(1, 16), Fr(1, 16))
    assert all(v == 0 for v in s_beta_powers(DyadicSet.empty(3), 1.5).values)
    with pytest.raises(ValueError):
        s_beta_powers(QUARTER, 0.5)


def test_s_beta_powers_match_oracle_all_depth3():
    for A in all_sets(3):
        for beta in (1, 2, 3):
            assert list(s_beta_powers(A, beta).values) == naive_s_beta_powers(list(A.leaves), beta)
    A = DyadicSet.from_indices(3, [1, 2, 6])
    got = s_beta_powers(A, 1.5).values
    ref15 = [sum(float(abs(x)) ** 1.5 for x in _diffs(A, j)) for j in range(8)]
    assert max(abs(a - b) for a, b in zip(got, ref15)) < 1e-14


def _diffs(A, j):
    av = naive_averages(list(A.leaves))
    n = A.depth
    return [av[(m, j >> (n - m))] - av[(m - 1, j >> (n - m + 1))] for m in range(1, n + 1)]


def test_integral_alpha_examples():
    v = s_beta_powers(QUARTER, 1)
    assert integral_alpha(v, 1, 1) == Fr(1, 2)
    assert isinstance(integral_alpha(v, 1, 1), Fr)
    assert integral_alpha(v, 0.5, 1) == pytest.approx(0.5 * math.sqrt(0.75) + 0.5 * math.sqrt(0.25), abs=1e-14)
    assert integral_alpha(v, 1, 1, Fr(1, 4)) == Fr(3, 4)
    with pytest.raises(ValueError):
        integral_alpha(v, 1.5, 1)


def test_norm_alpha_examples():
    assert norm_alpha(s_beta_powers(DyadicSet.from_indices(1, [0]), 2), 1, 2) == pytest.approx(0.5)
    assert norm_alpha(s_beta_powers(QUARTER, 2), 1, 2) == pytest.approx((math.sqrt(5) + 1) / 8, abs=1e-14)
    assert norm_alpha(s_beta_powers(QUARTER, 1), 1, 1) == Fr(1, 2) == P_value(Fr(1, 4))
    val = integral_alpha(s_beta_powers(QUARTER, 1), 0.5, 1)
    assert norm_alpha(s_beta_powers(QUARTER, 1), 0.5, 1) == pytest.approx(val ** 2)


def test_concat_examples():
    assert concat(DyadicSet.full(0), DyadicSet.empty(0)) == DyadicSet.from_indices(1, [0])
    h = DyadicSet.from_indices(1, [0])
    c = concat(h, h)
    assert c.measure == Fr(1, 2)
    assert s1_integral(c) == Fr(1, 2)
    assert concat(DyadicSet.empty(2), DyadicSet.empty(0)).cardinality == 0


def test_initial_interval_examples():
    A = initial_interval_set(Fr(3, 8))
    assert A.leaves == (True, True, True, False, False, False, False, False)
    assert s1_integral(A) == Fr(5, 8) == P_value(Fr(3, 8))
    assert initial_interval_set(0).cardinality == 0
    assert s1_integral(initial_interval_set(Fr(1, 4))) == Fr(1, 2)


def test_s1_integral_matches_oracle_and_denominator():
    for A in all_sets(3):
        v = s1_integral(A)
        assert v == naive_s1_integral(list(A.leaves))
        assert (1 << 6) % v.denominator == 0


def test_set_helpers():
    A = DyadicSet.from_indices(2, [0, 1])
    assert A.canonical() == DyadicSet.from_indices(1, [0])
    assert A.refine(3).cardinality == 4
    assert A.complement().measure.to_fraction() == 1 - A.measure.to_fraction()
    assert A.swap_halves() == DyadicSet.from_indices(2, [2, 3])
    with pytest.raises(ValueError):
        A.refine(1)
    with pytest.raises(ValueError):
        DyadicSet(2, (True,))


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_lower_bounds_all_sets(depth):
    # staircase, Gaussian and x* lower bounds, exhaustively
    for A in all_sets(depth):
        x = A.measure
        assert s1_integral(A) >= P_value(x)
        assert norm_alpha(s_beta_powers(A, 2), 1, 2) >= iso_profile(float(x)) - 1e-9
        s1 = s_beta_powers(A, 1)
        xs = float(x_star(x.to_fraction()))
        for alpha in (0.25, 0.5, 0.75):
            assert norm_alpha(s1, alpha, 1) >= xs - 1e-9
