"""Binary digit sums, their partial sums F, the staircase B_n and its limit P = B_{1,1}.

``F(k) = s(0) + ... + s(k-1)`` counts the edges inside the initial segment
{0, ..., k-1} of the hypercube, and ``B_n(k/2^n) = (n*k - 2*F(k)) / 2^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic_core import DyadicRational, canonicalize

# F(2^n) = n*2^(n-1) stays below 2^63 comfortably for k < 2^57
_INT64_SAFE = 1 << 57
# largest table kept in memory (32 MB); bigger scalar queries use the closed form
_TABLE_MAX = 1 << 22


def digit_sum(n: int) -> int:
    """Number of ones in the binary expansion of ``n``."""
    if n < 0:
        raise ValueError("digit_sum expects n >= 0")
    return bin(n).count("1")


def F_direct(k: int) -> int:
    """``sum_{j<k} s(j)`` by direct summation."""
    if k < 0:
        raise ValueError("F expects k >= 0")
    return sum(digit_sum(j) for j in range(k))


def F_recursive(k: int) -> int:
    """``F(2^t + p) = t*2^(t-1) + p + F(p)`` applied to the top bit until k = 0."""
    if k < 0:
        raise ValueError("F expects k >= 0")
    total = 0
    while k:
        t = k.bit_length() - 1
        p = k - (1 << t)
        total += (t << t >> 1) + p
        k = p
    return total


def F_fast(k: int) -> int:
    """Closed form over the binary digits ``k = 2^k1 + ... + 2^kT`` (k1 > ... > kT).

    ``F(k) = sum_j (k_j + 2(j-1)) 2^(k_j - 1)``; the j-th term is halved as an
    integer, which is exact because ``k_j + 2(j-1)`` is even when ``k_j = 0``.
    """
    if k < 0:
        raise ValueError("F expects k >= 0")
    total = 0
    j = 0
    for b in range(k.bit_length() - 1, -1, -1):
        if (k >> b) & 1:
            total += ((b + 2 * j) << b) >> 1
            j += 1
    return total


def F_fast_array(ks) -> np.ndarray:
    """Vectorized closed form for an int64 array with entries below 2^57."""
    ks = np.asarray(ks, dtype=np.int64)
    if ks.size and (ks.min() < 0 or ks.max() >= _INT64_SAFE):
        raise ValueError("F_fast_array handles 0 <= k < 2^57 only")
    top = int(ks.max()).bit_length() if ks.size else 0
    total = np.zeros_like(ks)
    seen = np.zeros_like(ks)
    for b in range(top - 1, -1, -1):
        bit = (ks >> b) & 1
        total += bit * (((b + 2 * seen) << b) >> 1)
        seen += bit
    return total


@dataclass
class DigitSumTable:
    """Cached ``F(0..limit)``; grows on demand."""

    limit: int = 0
    cumulative: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))

    def extend(self, limit: int) -> None:
        if limit <= self.limit:
            return
        # popcounts of 0..limit-1, then the running sum gives F(1..limit)
        pc = np.bitwise_count(np.arange(limit, dtype=np.int64)).astype(np.int64)
        cum = np.zeros(limit + 1, dtype=np.int64)
        np.cumsum(pc, out=cum[1:])
        self.cumulative = cum
        self.limit = limit

    def __getitem__(self, k):
        if isinstance(k, (int, np.integer)):
            if k > self.limit:
                if k > _TABLE_MAX:
                    return F_fast(int(k))
                self.extend(min(max(int(k), 2 * self.limit), _TABLE_MAX))
            return int(self.cumulative[k])
        arr = np.asarray(k)
        if arr.size and arr.max() > self.limit:
            if arr.max() > _TABLE_MAX:
                return F_fast_array(arr)
            self.extend(int(arr.max()))
        return self.cumulative[arr]


TABLE = DigitSumTable()


def F(k: int) -> int:
    """``F(k)`` through the shared table (closed form for huge k)."""
    return TABLE[k]


def Bn_numerator(k: int, n: int) -> int:
    """``2^n * B_n(k/2^n) = n*k - 2*F(k)``."""
    if not 0 <= k <= (1 << n):
        raise ValueError(f"k={k} outside 0..2^{n}")
    return n * k - 2 * F(k)


def Bn_value(k: int, n: int) -> Fraction:
    """``B_n(k / 2^n)`` as an exact rational."""
    return Fraction(Bn_numerator(k, n), 1 << n)


def Bn_array(n: int) -> np.ndarray:
    """Numerators ``n*k - 2F(k)`` for k = 0..2^n (denominator 2^n)."""
    ks = np.arange((1 << n) + 1, dtype=np.int64)
    return n * ks - 2 * TABLE[ks]


def P_value(x) -> Fraction:
    """``P(x) = B_{1,1}(x)`` at a dyadic ``x``; evaluated as B_n at the canonical level."""
    d = canonicalize(DyadicRational.from_value(x))
    return Bn_value(d.num, d.level)


def P_nearest(x: float, level: int) -> Fraction:
    """P at the grid point of D_level nearest to a real ``x`` (an approximation off D)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    k = round(x * (1 << level))
    return Bn_value(k, level)


def xstar_log2(x) -> float:
    """``x* log2(1/x*)`` in floating point, 0 at the endpoints."""
    x = float(x)
    s = min(x, 1.0 - x)
    return 0.0 if s <= 0 else s * math.log2(1.0 / s)


def xstar_log2_exact(x) -> Optional[Fraction]:
    """The same comparator exactly when ``x*`` is a power of two (else None)."""
    d = DyadicRational.from_value(x)
    s = canonicalize(d.star())
    if s.num == 0:
        return Fraction(0)
    if s.num != 1:
        return None
    return Fraction(s.level, 1 << s.level)


@dataclass
class IdentityReport:
    name: str
    passed: bool
    checked: int
    counterexample: Optional[tuple] = None

    def __str__(self):
        status = "PASS" if self.passed else f"FAIL at {self.counterexample}"
        return f"{self.name}: {status} ({self.checked} cases)"


def check_F_identities(K: int) -> list:
    """Exhaustive check of the F identities for arguments up to ``K``.

    Covers F(2k) = 2F(k) + k, superadditivity F(a+b) >= F(a) + F(b) + min(a, b),
    F(l) = max_{m <= l/2} (F(m) + F(l-m) + m) with the max at m = floor(l/2),
    and sum_{j<=M} j 2^-j = 2 - 2^-M (M + 2).
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    Ft = TABLE[np.arange(K + 1)]
    reports = []

    k = np.arange(K // 2 + 1)
    bad = np.nonzero(Ft[2 * k] != 2 * Ft[k] + k)[0]
    reports.append(IdentityReport("F(2k)=2F(k)+k", bad.size == 0, k.size,
                                  None if bad.size == 0 else (int(bad[0]),)))

    checked, cex = 0, None
    for a in range(K + 1):
        b = np.arange(0, K - a + 1)
        lhs = Ft[a + b] - np.minimum(a, b)
        bad = np.nonzero(lhs < Ft[a] + Ft[b])[0]
        checked += b.size
        if bad.size and cex is None:
            cex = (a, int(b[bad[0]]))
    reports.append(IdentityReport("F(a+b)-min(a,b)>=F(a)+F(b)", cex is None, checked, cex))

    checked, cex = 0, None
    for l in range(K + 1):
        m = np.arange(0, l // 2 + 1)
        vals = Ft[m] + Ft[l - m] + m
        checked += m.size
        if cex is None and (vals.max() != Ft[l] or vals[l // 2] != Ft[l]):
            cex = (l, int(np.argmax(vals)))
    reports.append(IdentityReport("F(l)=max_m(F(m)+F(l-m)+m), argmax floor(l/2)",
                                  cex is None, checked, cex))

    cex = None
    s = Fraction(0)
    for M in range(1, K + 1):
        s += Fraction(M, 1 << M)
        if s != 2 - Fraction(M + 2, 1 << M):
            cex = (M,)
            break
    reports.append(IdentityReport("sum j2^-j = 2-2^-M(M+2)", cex is None, K, cex))
    return reports


def check_consistency(n: int) -> IdentityReport:
    """``B_{n+1}`` restricted to D_n equals ``B_n`` (both as integers over 2^(n+1))."""
    ks = np.arange((1 << n) + 1, dtype=np.int64)
    fine = (n + 1) * 2 * ks - 2 * TABLE[2 * ks]
    coarse = 2 * (n * ks - 2 * TABLE[ks])
    bad = np.nonzero(fine != coarse)[0]
    return IdentityReport(f"B_{n + 1}|D_{n}=B_{n}", bad.size == 0, ks.size,
                          None if bad.size == 0 else (int(bad[0]),))


def check_P_identities(n: int, tol: float = 1e-9) -> list:
    """Symmetry, the halving equation, the x* log2(1/x*) bound and level consistency on D_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    N = 1 << n
    # numerators over 2^(n+1) so that P(x/2) fits the same scale
    Pn = 2 * Bn_array(n)
    half = Bn_array(n + 1)[: N + 1]
    ks = np.arange(N + 1)
    reports = []

    bad = np.nonzero(Pn != Pn[::-1])[0]
    reports.append(IdentityReport("P(x)=P(1-x)", bad.size == 0, N + 1,
                                  None if bad.size == 0 else (f"{bad[0]}/{N}",)))

    # P(x) + x = 2 P(x/2), scaled by 2^(n+1)
    bad = np.nonzero(Pn + 2 * ks != 2 * half)[0]
    reports.append(IdentityReport("P(x)+x=2P(x/2)", bad.size == 0, N + 1,
                                  None if bad.size == 0 else (f"{bad[0]}/{N}",)))

    cex = None
    for k in range(N + 1):
        x = DyadicRational(k, n)
        p = Fraction(int(Pn[k]), 2 * N)
        exact = xstar_log2_exact(x)
        if exact is not None:
            if p != exact:
                cex = (str(x), str(p), str(exact))
                break
        elif float(p) < xstar_log2(x) - tol:
            cex = (str(x), float(p), xstar_log2(x))
            break
    reports.append(IdentityReport("P(x)>=x*log2(1/x*), equality at 2^-k", cex is None, N + 1, cex))

    reports.append(check_consistency(n))
    return reports


@dataclass
class ModulusRow:
    m: int
    max_ratio: float
    witness: tuple
    pairs: int


def modulus_scan(n: int, m_max: int, exhaustive: Optional[bool] = None) -> list:
    """Empirical constant in |P(x)-P(y)| <= C |x-y| log2(1/|x-y|).

    Scanned pairs have separation between 2^-m_max and 1/2: all such pairs of
    D_n when exhaustive (default for n <= 10), otherwise (x, x + 2^-j) for
    x in D_n and 1 <= j <= m_max. Row m holds the max ratio over scanned pairs
    with |x - y| <= 2^-m.
    """
    if n < 2 or not 1 <= m_max < n:
        raise ValueError("need n >= 2 and 1 <= m_max < n")
    if exhaustive is None:
        exhaustive = n <= 10
    N = 1 << n
    Pn = Bn_array(n).astype(float) / N
    if exhaustive:
        seps = range(N >> m_max, N // 2 + 1)
    else:
        seps = [N >> j for j in range(1, m_max + 1)]
    # best per separation d: (ratio, x index, count)
    per_sep = {}
    for d in seps:
        diff = np.abs(Pn[d:] - Pn[:-d])
        dist = d / N
        ratio = diff / (dist * math.log2(1.0 / dist))
        i = int(np.argmax(ratio))
        per_sep[d] = (float(ratio[i]), i, diff.size)
    rows = []
    for m in range(1, m_max + 1):
        limit = N >> m
        best, wit, count = -1.0, None, 0
        for d, (r, i, c) in per_sep.items():
            if d <= limit:
                count += c
                if r > best:
                    best, wit = r, (f"{i}/{N}", f"{i + d}/{N}")
        rows.append(ModulusRow(m, best, wit, count))
    return rows


def modulus_constant(rows) -> float:
    return max(r.max_ratio for r in rows)
