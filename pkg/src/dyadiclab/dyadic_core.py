"""Exact dyadic rationals, dyadic sets and the square functions of their indicators.

A set ``A`` built from dyadic intervals of length ``2**-n`` is stored as a leaf
membership vector. Its dyadic martingale is kept as integer leaf *counts* per
node, so every conditional average ``<1_A>_I`` is ``count / 2**(n - level)``
and all S_1 quantities stay exact with power-of-two denominators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Union

import numpy as np

Number = Union[int, Fraction, float]


@total_ordering
@dataclass(frozen=True, eq=False)
class DyadicRational:
    """The point ``num / 2**level`` of [0, 1]."""

    num: int
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"negative level {self.level}")
        if not 0 <= self.num <= (1 << self.level):
            raise ValueError(f"{self.num}/2^{self.level} lies outside [0, 1]")

    @classmethod
    def from_value(cls, x) -> "DyadicRational":
        """Exact conversion from an int, Fraction, float or DyadicRational."""
        if isinstance(x, DyadicRational):
            return x
        fr = Fraction(x)
        den = fr.denominator
        if den & (den - 1):
            raise ValueError(f"{x!r} is not a dyadic rational")
        return cls(fr.numerator, den.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.level)

    def at_level(self, n: int) -> int:
        """Numerator of this point on the grid D_n."""
        c = canonicalize(self)
        if c.level > n:
            raise ValueError(f"{c} is not on D_{n}")
        return c.num << (n - c.level)

    def star(self) -> "DyadicRational":
        """``x* = min(x, 1 - x)``."""
        other = DyadicRational((1 << self.level) - self.num, self.level)
        return min(self, other)

    def __float__(self):
        return math.ldexp(self.num, -self.level)

    def __eq__(self, other):
        if isinstance(other, DyadicRational):
            return self.num << other.level == other.num << self.level
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, DyadicRational):
            return self.num << other.level < other.num << self.level
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() < other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __str__(self):
        c = canonicalize(self)
        return f"{c.num}/{1 << c.level}"


def canonicalize(x: DyadicRational) -> DyadicRational:
    """Same value at the smallest level (odd numerator, or level 0)."""
    num, level = x.num, x.level
    if num == 0:
        return DyadicRational(0, 0)
    shift = min((num & -num).bit_length() - 1, level)
    return DyadicRational(num >> shift, level - shift)


@dataclass(frozen=True)
class DyadicSet:
    """A union of level-``depth`` dyadic intervals; leaf j is [j/2^n, (j+1)/2^n)."""

    depth: int
    leaves: tuple

    def __post_init__(self):
        if len(self.leaves) != 1 << self.depth:
            raise ValueError(f"expected {1 << self.depth} leaves, got {len(self.leaves)}")
        object.__setattr__(self, "leaves", tuple(bool(b) for b in self.leaves))

    @classmethod
    def from_mask(cls, depth: int, mask: int) -> "DyadicSet":
        """Bit j of ``mask`` is leaf j."""
        return cls(depth, tuple((mask >> j) & 1 for j in range(1 << depth)))

    @classmethod
    def from_indices(cls, depth: int, indices) -> "DyadicSet":
        idx = set(indices)
        return cls(depth, tuple(j in idx for j in range(1 << depth)))

    @classmethod
    def empty(cls, depth: int = 0) -> "DyadicSet":
        return cls(depth, (False,) * (1 << depth))

    @classmethod
    def full(cls, depth: int = 0) -> "DyadicSet":
        return cls(depth, (True,) * (1 << depth))

    @property
    def mask(self) -> int:
        return sum(1 << j for j, b in enumerate(self.leaves) if b)

    @property
    def cardinality(self) -> int:
        return sum(self.leaves)

    @property
    def measure(self) -> DyadicRational:
        return canonicalize(DyadicRational(self.cardinality, self.depth))

    def complement(self) -> "DyadicSet":
        return DyadicSet(self.depth, tuple(not b for b in self.leaves))

    def refine(self, depth: int) -> "DyadicSet":
        """Same set written at a finer depth (each leaf duplicated)."""
        if depth < self.depth:
            raise ValueError("cannot refine to a coarser depth")
        rep = 1 << (depth - self.depth)
        return DyadicSet(depth, tuple(b for b in self.leaves for _ in range(rep)))

    def canonical(self) -> "DyadicSet":
        """Same set at the minimal depth that represents it."""
        s = self
        while s.depth > 0 and all(s.leaves[2 * i] == s.leaves[2 * i + 1]
                                  for i in range(1 << (s.depth - 1))):
            s = DyadicSet(s.depth - 1, s.leaves[::2])
        return s

    def swap_halves(self) -> "DyadicSet":
        """Image under x -> x + 1/2 mod 1 (exchange [0,1/2) and [1/2,1))."""
        if self.depth == 0:
            return self
        h = 1 << (self.depth - 1)
        return DyadicSet(self.depth, self.leaves[h:] + self.leaves[:h])


@dataclass(frozen=True)
class MartingaleTree:
    """Leaf counts of A under every dyadic node, levels 0..depth.

    ``counts[l][i]`` is the number of depth-n leaves of A inside the i-th
    level-l interval, so ``<1_A>_I = counts[l][i] / 2**(depth - l)``.
    """

    depth: int
    counts: tuple

    def average(self, level: int, index: int) -> Fraction:
        return Fraction(self.counts[level][index], 1 << (self.depth - level))

    @property
    def node_averages(self) -> list:
        """Exact ``<f>_I`` for every node, level by level."""
        return [[self.average(l, i) for i in range(1 << l)] for l in range(self.depth + 1)]


@dataclass(frozen=True)
class LeafValues:
    """One nonnegative value per depth-n leaf, tagged with what it holds."""

    depth: int
    values: tuple
    quantity: str = ""
    exact: bool = True

    def __post_init__(self):
        if len(self.values) != 1 << self.depth:
            raise ValueError("wrong number of leaf values")


def build_martingale(A: DyadicSet) -> MartingaleTree:
    level = [int(b) for b in A.leaves]
    counts = [tuple(level)]
    while len(level) > 1:
        level = [level[2 * i] + level[2 * i + 1] for i in range(len(level) // 2)]
        counts.append(tuple(level))
    return MartingaleTree(A.depth, tuple(reversed(counts)))


def _level_jumps(t: MartingaleTree):
    """Yield ``(m, numerators)`` with ``|d_m| = numerator / 2**depth`` per level-m node.

    A level-(m-1) node with child counts (cL, cR) at relative height h = n-m+1
    has ``|d_m| = |cL - cR| / 2**h`` on both children.
    """
    n = t.depth
    for m in range(1, n + 1):
        child = t.counts[m]
        scale = 1 << (m - 1)
        jumps = []
        for i in range(1 << (m - 1)):
            j = abs(child[2 * i] - child[2 * i + 1]) * scale
            jumps.append(j)
            jumps.append(j)
        yield m, jumps


def martingale_differences(t: MartingaleTree) -> list:
    """``|d_m|`` for m = 1..n as per-leaf exact values (constant on level-m intervals)."""
    n = t.depth
    out = []
    den = 1 << n
    for m, jumps in _level_jumps(t):
        rep = 1 << (n - m)
        vals = tuple(Fraction(j, den) for j in jumps for _ in range(rep))
        out.append(LeafValues(n, vals, quantity=f"|d_{m}|"))
    return out


def _is_positive_integer(beta) -> bool:
    return float(beta).is_integer() and beta >= 1


def s_beta_powers(A: DyadicSet, beta: Number = 1) -> LeafValues:
    """Per-leaf ``S_beta^beta = sum_m |d_m|^beta``.

    Exact rationals for integer ``beta``; double precision otherwise.
    """
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    t = build_martingale(A)
    n = t.depth
    if _is_positive_integer(beta):
        b = int(beta)
        acc = [0] * (1 << n)
        for m, jumps in _level_jumps(t):
            rep = 1 << (n - m)
            for i, j in enumerate(jumps):
                if j:
                    p = j ** b
                    for leaf in range(i * rep, (i + 1) * rep):
                        acc[leaf] += p
        den = 1 << (n * b)
        return LeafValues(n, tuple(Fraction(a, den) for a in acc), f"S_{b}^{b}", True)
    acc = np.zeros(1 << n)
    for m, jumps in _level_jumps(t):
        d = np.repeat(np.ldexp(np.asarray(jumps, dtype=float), -n), 1 << (n - m))
        acc += d ** float(beta)
    return LeafValues(n, tuple(acc.tolist()), f"S_{beta}^{beta}", False)


def integral_alpha(v: LeafValues, alpha: Number = 1, beta: Number = 1, q: Number = 0):
    """``2^-n * sum_leaves (v + q^beta)^(alpha/beta)`` where ``v`` holds S_beta^beta.

    Returns a Fraction when alpha = beta = 1 and everything is rational.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if q < 0:
        raise ValueError("q must be nonnegative")
    exact_ok = alpha == 1 and beta == 1 and v.exact and not isinstance(q, float)
    if exact_ok:
        q = Fraction(q)
        return sum((Fraction(x) + q for x in v.values), Fraction(0)) / (1 << v.depth)
    vals = np.asarray([float(x) for x in v.values])
    qb = float(q) ** float(beta)
    return float(np.mean((vals + qb) ** (float(alpha) / float(beta))))


def norm_alpha(v: LeafValues, alpha: Number = 1, beta: Number = 1):
    """Quasi-norm ``(int S_beta^alpha)^(1/alpha)``; the integral itself when alpha = 1."""
    val = integral_alpha(v, alpha, beta, 0)
    if alpha == 1:
        return val
    return float(val) ** (1.0 / float(alpha))


def s1_integral(A: DyadicSet) -> Fraction:
    """``int S_1(1_A)``, via the node identity sum |cL - cR| / 2^n."""
    t = build_martingale(A)
    total = 0
    for m in range(1, t.depth + 1):
        c = t.counts[m]
        total += sum(abs(c[2 * i] - c[2 * i + 1]) for i in range(len(c) // 2))
    return Fraction(total, 1 << t.depth)


def concat(A: DyadicSet, B: DyadicSet) -> DyadicSet:
    """``A`` rescaled onto [0, 1/2) followed by ``B`` rescaled onto [1/2, 1)."""
    n = max(A.depth, B.depth)
    return DyadicSet(n + 1, A.refine(n).leaves + B.refine(n).leaves)


def initial_interval_set(x) -> DyadicSet:
    """``[0, x)`` at the canonical level of ``x``."""
    x = canonicalize(DyadicRational.from_value(x))
    return DyadicSet(x.level, tuple(j < x.num for j in range(1 << x.level)))


def all_sets(depth: int):
    """Every DyadicSet of the given depth, by ascending mask."""
    for mask in range(1 << (1 << depth)):
        yield DyadicSet.from_mask(depth, mask)


def x_star(x) -> Fraction:
    """``min(x, 1 - x)`` for a rational or dyadic ``x``."""
    x = DyadicRational.from_value(x).to_fraction() if isinstance(x, DyadicRational) else Fraction(x)
    return min(x, 1 - x)
