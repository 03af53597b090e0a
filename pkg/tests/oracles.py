"""Slow, direct reimplementations used as independent references in tests."""

from fractions import Fraction
import math


def naive_averages(leaves):
    """{(level, index): <1_A>_I} by summing leaves directly."""
    n = len(leaves).bit_length() - 1
    out = {}
    for l in range(n + 1):
        w = 1 << (n - l)
        for i in range(1 << l):
            out[(l, i)] = Fraction(sum(leaves[i * w:(i + 1) * w]), w)
    return out


def naive_s_beta_powers(leaves, beta):
    """Per-leaf sum over m of |f_m - f_{m-1}|^beta, from the averages."""
    n = len(leaves).bit_length() - 1
    av = naive_averages(leaves)
    vals = []
    for j in range(1 << n):
        s = 0
        for m in range(1, n + 1):
            d = abs(av[(m, j >> (n - m))] - av[(m - 1, j >> (n - m + 1))])
            s += d ** beta
        vals.append(s)
    return vals


def naive_s1_integral(leaves):
    v = naive_s_beta_powers(leaves, 1)
    return sum(v, Fraction(0)) / len(leaves)


def naive_edges(members, n):
    """Directed count of (x in A, y not in A) hypercube edges."""
    A = set(members)
    return sum(1 for x in A for i in range(n) if x ^ (1 << i) not in A)


def naive_F(k):
    return sum(bin(j).count("1") for j in range(k))


def two_point_rhs(bp, bm, a, alpha, beta):
    return (0.5 * (bp ** beta + a ** beta) ** (alpha / beta)
            + 0.5 * (bm ** beta + a ** beta) ** (alpha / beta))


def normal_cdf(t):
    return 0.5 * math.erfc(-t / math.sqrt(2.0))
