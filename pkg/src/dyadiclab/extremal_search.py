"""Brute-force extremal problems over dyadic sets and hypercube subsets.

Leaf j of a depth-n dyadic set is identified with the hypercube vertex whose
integer label is j; coordinate i of a vertex is bit i of its label. The
enumerators work on whole blocks of sets at once as 0/1 membership matrices.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic_core import (DyadicRational, DyadicSet, initial_interval_set,
                          integral_alpha, s_beta_powers)
from .inequality_lab import CheckReport, Violation
from .staircase import P_value

DEFAULT_BUDGET = 10 ** 8
_CHUNK = 1 << 15


class BudgetExceededError(ValueError):
    pass


@dataclass(frozen=True)
class HypercubeSet:
    """Subset of {0,1}^n stored as a bitset over the 2^n vertex labels."""

    dimension: int
    mask: int = 0

    def __post_init__(self):
        if not 0 <= self.mask < 1 << (1 << self.dimension):
            raise ValueError("mask has bits outside the cube")

    @classmethod
    def from_vertices(cls, n: int, vertices) -> "HypercubeSet":
        return cls(n, sum(1 << v for v in set(vertices)))

    @classmethod
    def from_dyadic_set(cls, A: DyadicSet) -> "HypercubeSet":
        return cls(A.depth, A.mask)

    def to_dyadic_set(self) -> DyadicSet:
        return DyadicSet.from_mask(self.dimension, self.mask)

    @property
    def vertices(self) -> list:
        return [v for v in range(1 << self.dimension) if (self.mask >> v) & 1]

    @property
    def cardinality(self) -> int:
        return bin(self.mask).count("1")

    @property
    def measure(self) -> Fraction:
        return Fraction(self.cardinality, 1 << self.dimension)

    def complement(self) -> "HypercubeSet":
        return HypercubeSet(self.dimension, ((1 << (1 << self.dimension)) - 1) ^ self.mask)

    def indicator(self) -> np.ndarray:
        return membership_rows([self.mask], self.dimension)[0]


@dataclass
class ExtremalResult:
    n: int
    k: int
    minimum: object
    argmin: list
    sets_scanned: int
    objective: str = ""

    @property
    def argmin_sets(self) -> list:
        return [DyadicSet.from_mask(self.n, m) for m in self.argmin]


def membership_rows(masks, n: int) -> np.ndarray:
    """0/1 matrix, one row per mask, one column per leaf/vertex."""
    L = 1 << n
    if L <= 62:
        arr = np.asarray(list(masks), dtype=np.int64)
        return ((arr[:, None] >> np.arange(L)[None, :]) & 1).astype(np.int8)
    nbytes = (L + 7) // 8
    rows = [np.unpackbits(np.frombuffer(int(m).to_bytes(nbytes, "little"), dtype=np.uint8),
                          bitorder="little")[:L] for m in masks]
    return np.array(rows, dtype=np.int8).reshape(-1, L)


def _rows_from_combos(combos: np.ndarray, L: int) -> np.ndarray:
    rows = np.zeros((combos.shape[0], L), dtype=np.int8)
    if combos.shape[1]:
        np.put_along_axis(rows, combos, 1, axis=1)
    return rows


def _row_mask(row) -> int:
    return sum(1 << j for j, b in enumerate(row) if b)


# objectives on a block of membership rows ---------------------------------

def tree_variation(rows: np.ndarray) -> np.ndarray:
    """``2^n * int S_1(1_A)`` per row: sum over nodes of |count_left - count_right|."""
    c = rows.astype(np.int64)
    total = np.zeros(c.shape[0], dtype=np.int64)
    while c.shape[1] > 1:
        pairs = c.reshape(c.shape[0], -1, 2)
        total += np.abs(pairs[:, :, 0] - pairs[:, :, 1]).sum(axis=1)
        c = pairs.sum(axis=2)
    return total


def leaf_s_beta_powers(rows: np.ndarray, beta: float) -> np.ndarray:
    """Per-leaf ``S_beta^beta`` for each row (double precision)."""
    m, L = rows.shape
    acc = np.zeros((m, L))
    c = rows.astype(np.int64)
    width = 1  # leaves under each child node
    while c.shape[1] > 1:
        pairs = c.reshape(m, -1, 2)
        d = np.abs(pairs[:, :, 0] - pairs[:, :, 1]) / (2.0 * width)
        acc += np.repeat(d ** beta, 2 * width, axis=1)
        c = pairs.sum(axis=2)
        width *= 2
    return acc


def boundary_counts(rows: np.ndarray) -> np.ndarray:
    """Per-vertex number of coordinates along which membership flips."""
    m, L = rows.shape
    n = L.bit_length() - 1
    out = np.zeros((m, L), dtype=np.int64)
    for i in range(n):
        r = rows.reshape(m, L >> (i + 1), 2, 1 << i)
        diff = (r[:, :, 0, :] != r[:, :, 1, :]).astype(np.int64)
        o = out.reshape(m, L >> (i + 1), 2, 1 << i)
        o[:, :, 0, :] += diff
        o[:, :, 1, :] += diff
    return out


def edge_counts(rows: np.ndarray) -> np.ndarray:
    """|boundary edges| per row."""
    return boundary_counts(rows).sum(axis=1) // 2


# enumeration ----------------------------------------------------------------

def _combo_blocks(L: int, k: int, first: Optional[int] = None):
    """Blocks of k-subsets of range(L) as index arrays; optionally only those with min == first."""
    if k == 0:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    if first is None:
        it = itertools.combinations(range(L), k)
    else:
        it = ((first,) + c for c in itertools.combinations(range(first + 1, L), k - 1))
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def _scan(L: int, k: int, objective: str, alpha: float, beta: float, firsts):
    """Minimum, argmin masks and count over the k-subsets whose least element is in ``firsts``."""
    best, arg, count = None, [], 0
    exact = objective != "snorm-float"
    sources = [None] if firsts is None else firsts
    for first in sources:
        for combos in _combo_blocks(L, k, first):
            rows = _rows_from_combos(combos, L)
            count += rows.shape[0]
            if objective == "snorm-exact":
                vals = tree_variation(rows)
            elif objective == "edges":
                vals = edge_counts(rows)
            else:
                s = leaf_s_beta_powers(rows, beta)
                vals = np.mean(s ** (alpha / beta), axis=1)
            lo = vals.min()
            if exact:
                hit = np.nonzero(vals == lo)[0]
            else:
                hit = np.nonzero(vals <= lo + 1e-12 * max(1.0, abs(lo)))[0]
            lo = int(lo) if exact else float(lo)
            if best is None or (lo < best if exact else lo < best - 1e-12 * max(1.0, abs(best))):
                best, arg = lo, []
            if (lo == best) if exact else abs(lo - best) <= 1e-12 * max(1.0, abs(best)):
                arg.extend(_row_mask(rows[h]) for h in hit)
    return best, arg, count


def _merge(parts, exact):
    best, arg, count = None, [], 0
    for b, a, c in parts:
        count += c
        if b is None:
            continue
        if best is None or (b < best if exact else b < best - 1e-12 * max(1.0, abs(best))):
            best, arg = b, list(a)
        elif (b == best) if exact else abs(b - best) <= 1e-12 * max(1.0, abs(best)):
            arg.extend(a)
    return best, sorted(set(arg)), count


def _enumerate(n: int, k: int, objective: str, alpha=1.0, beta=1.0,
               budget: int = DEFAULT_BUDGET, workers: int = 1):
    L = 1 << n
    if not 0 <= k <= L:
        raise ValueError(f"k={k} outside 0..{L}")
    total = math.comb(L, k)
    if total > budget:
        raise BudgetExceededError(
            f"C({L},{k}) = {total} sets exceeds the budget {budget}; use a smaller n or k")
    exact = objective != "snorm-float"
    if workers > 1 and k > 1:
        firsts = list(range(L - k + 1))
        shards = [firsts[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_scan, *zip(*[(L, k, objective, alpha, beta, s) for s in shards])))
    else:
        parts = [_scan(L, k, objective, alpha, beta, None)]
    return _merge(parts, exact)


def enumerate_min_S_norm(n: int, k: int, alpha=1, beta=1, budget: int = DEFAULT_BUDGET,
                         workers: int = 1) -> ExtremalResult:
    """Least ``int S_beta(1_A)^alpha`` over depth-n sets with k leaves (exact if alpha = beta = 1)."""
    if beta < 1 or not 0 < alpha <= 1:
        raise ValueError("need beta >= 1 >= alpha > 0")
    if alpha == 1 and beta == 1:
        best, arg, count = _enumerate(n, k, "snorm-exact", budget=budget, workers=workers)
        minimum = Fraction(best, 1 << n)
    else:
        best, arg, count = _enumerate(n, k, "snorm-float", float(alpha), float(beta), budget, workers)
        minimum = best
    return ExtremalResult(n, k, minimum, arg, count, f"int S_{beta}^{alpha}")


def edge_boundary_density(A: HypercubeSet) -> Fraction:
    """``|boundary(A)| / 2^n``."""
    return Fraction(int(edge_counts(A.indicator()[None, :])[0]), 1 << A.dimension)


def enumerate_min_edge_boundary(n: int, k: int, budget: int = DEFAULT_BUDGET,
                                workers: int = 1) -> ExtremalResult:
    best, arg, count = _enumerate(n, k, "edges", budget=budget, workers=workers)
    return ExtremalResult(n, k, Fraction(best, 1 << n), arg, count, "|boundary|/2^n")


def harper_set(n: int, k: int) -> HypercubeSet:
    """Initial segment {0, ..., k-1} of the binary order."""
    if not 0 <= k <= 1 << n:
        raise ValueError(f"k={k} outside 0..2^{n}")
    return HypercubeSet(n, (1 << k) - 1)


def discrete_gradient_norm(A: HypercubeSet, beta=1, p=1) -> float:
    """``|| |grad 1_A|_beta ||_p`` with ``D_j f(x) = (f(x) - f(x^j)) / 2``."""
    if beta < 1 or p <= 0:
        raise ValueError("need beta >= 1 and p > 0")
    f = A.indicator().astype(float)
    n = A.dimension
    labels = np.arange(1 << n)
    acc = np.zeros(1 << n)
    for j in range(n):
        D = (f - f[labels ^ (1 << j)]) / 2.0
        acc += np.abs(D) ** beta
    grad = acc ** (1.0 / beta)
    return float(np.mean(grad ** p) ** (1.0 / p))


@dataclass
class TalagrandScan:
    n: int
    q: float
    min_ratio: float
    argmin: int
    sets_scanned: int
    by_cardinality: dict = field(default_factory=dict)


def talagrand_ratio_scan(n: int, q: float = 1.0, budget: int = DEFAULT_BUDGET) -> TalagrandScan:
    """Least ``|| |grad 1_A|_1 ||_q / ((|A|*)^(1/q) ln(1/|A|*))`` over nonempty proper A."""
    if q < 0.5:
        raise ValueError("q must be >= 1/2")
    L = 1 << n
    total = (1 << L) - 2
    if total > budget:
        raise BudgetExceededError(f"2^{L} - 2 sets exceeds the budget {budget}")
    best, arg = math.inf, None
    by_card = {}
    for start in range(1, (1 << L) - 1, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, (1 << L) - 1), dtype=np.int64)
        rows = membership_rows(masks, n)
        grad = boundary_counts(rows) / 2.0
        norm = np.mean(grad ** q, axis=1) ** (1.0 / q)
        card = rows.sum(axis=1)
        s = np.minimum(card, L - card) / L
        ratio = norm / (s ** (1.0 / q) * np.log(1.0 / s))
        i = int(np.argmin(ratio))
        if ratio[i] < best:
            best, arg = float(ratio[i]), int(masks[i])
        for c in np.unique(card):
            sel = card == c
            r = float(ratio[sel].min())
            by_card[int(c)] = min(by_card.get(int(c), math.inf), r)
    return TalagrandScan(n, q, best, arg, total, dict(sorted(by_card.items())))


@dataclass
class SharpnessRow:
    k: int
    integral: float
    bound: float
    within_bound: bool
    norm: float
    ratio: float


def sharpness_constant(alpha: float) -> float:
    """``1 / (1 - 2^(alpha-1)) + 2``."""
    return 1.0 / (1.0 - 2.0 ** (alpha - 1.0)) + 2.0


def initial_interval_integral(alpha: float, k: int) -> float:
    """``int S_1(1_[0,2^-k))^alpha`` from the k+1 constancy intervals.

    On [2^-j, 2^-j+1) the square function equals (2^j - 1) / 2^k, and on
    [0, 2^-k) it equals (2^k - 1) / 2^k.
    """
    if k == 0:
        return 0.0
    total = 0.0
    for j in range(1, k + 1):
        total += math.ldexp(1.0, -j) * (math.ldexp((1 << j) - 1, -k)) ** alpha
    total += math.ldexp(1.0, -k) * (math.ldexp((1 << k) - 1, -k)) ** alpha
    return total


def sharpness_table(alpha: float, k_max: int, cross_check_to: int = 12) -> list:
    """Rows k = 0..k_max for A = [0, 2^-k); k <= cross_check_to is recomputed from the tree."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0 <= k_max <= 24:
        raise ValueError("k_max must lie in 0..24")
    C = sharpness_constant(alpha)
    rows = []
    for k in range(k_max + 1):
        val = initial_interval_integral(alpha, k)
        if k <= cross_check_to:
            A = initial_interval_set(DyadicRational(1, k))
            tree = integral_alpha(s_beta_powers(A, 1), alpha, 1)
            if abs(tree - val) > 1e-12 * max(1.0, val):
                raise ArithmeticError(f"k={k}: analytic {val} != tree {tree}")
        bound = C * 2.0 ** (-k * alpha)
        norm = val ** (1.0 / alpha)
        rows.append(SharpnessRow(k, val, bound, val <= bound, norm, norm * 2.0 ** k))
    return rows


def compare_S1_gradient(n: int) -> CheckReport:
    """``|| |grad 1_A|_1 ||_1 >= int S_1(1_A)`` exactly for every A of {0,1}^n (n <= 4)."""
    if n > 4:
        raise ValueError("n must be at most 4")
    L = 1 << n
    bad = []
    scanned = 0
    for start in range(0, 1 << L, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, 1 << L), dtype=np.int64)
        rows = membership_rows(masks, n)
        grad = edge_counts(rows)
        s1 = tree_variation(rows)
        scanned += len(masks)
        for i in np.nonzero(grad < s1)[0]:
            g, s = Fraction(int(grad[i]), L), Fraction(int(s1[i]), L)
            bad.append(Violation((int(masks[i]),), g, s, float(s - g)))
    return CheckReport(f"grad-vs-S1(n={n})", not bad, bad[:50], scanned, len(bad), True)


@dataclass
class AttainmentRow:
    n: int
    k: int
    minimum: Fraction
    P: Fraction
    attained: bool
    initial_in_argmin: bool


def attainment_table(n: int, ks=None, budget: int = DEFAULT_BUDGET, workers: int = 1) -> list:
    """Compare the depth-n brute-force minimum of int S_1 with P(k/2^n); flags a gap."""
    ks = range((1 << n) + 1) if ks is None else ks
    out = []
    for k in ks:
        r = enumerate_min_S_norm(n, k, 1, 1, budget, workers)
        p = P_value(Fraction(k, 1 << n))
        out.append(AttainmentRow(n, k, r.minimum, p, r.minimum == p, ((1 << k) - 1) in r.argmin))
    return out
