"""Checkers for the two- and three-point inequalities and a grid Bellman solver.

Everything lives on the grid ``D_n = {k / 2^n}``. A pair ``x, y`` is admissible
when ``x, y`` and their midpoint are all on the grid; writing ``p`` for the
midpoint and ``a = |x - y| / 2`` the two-point inequality reads

    B(p)^alpha <= 1/2 (B(p+a)^beta + a^beta)^(alpha/beta)
                + 1/2 (B(p-a)^beta + a^beta)^(alpha/beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable

import numpy as np

from .dyadic_core import DyadicRational, DyadicSet, norm_alpha, s_beta_powers
from .gaussian_profile import iso_profile
from .staircase import Bn_array

DEFAULT_TOL = 1e-9
CONVERGENCE_TOL = 1e-12
DEFAULT_CAP = 2.0
DEFAULT_Q_GRID = (Fraction(0),) + tuple(Fraction(1, 1 << k) for k in range(6, -1, -1)) + (Fraction(2),)


class NotCertifiedError(ValueError):
    """A lower-bound certificate was requested for an unchecked candidate."""


def _check_params(alpha, beta):
    if not (beta >= 1 >= alpha > 0):
        raise ValueError(f"need beta >= 1 >= alpha > 0, got alpha={alpha}, beta={beta}")


def _is_one(v) -> bool:
    return v == 1


@dataclass
class GridFunction:
    """Values on D_n, either exact rationals or doubles."""

    level: int
    values: object
    mode: str = "exact"
    name: str = ""
    certified: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        N = 1 << self.level
        if self.mode == "exact":
            self.values = tuple(Fraction(v) for v in self.values)
        elif self.mode == "float":
            self.values = np.asarray(self.values, dtype=float)
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.values) != N + 1:
            raise ValueError(f"D_{self.level} has {N + 1} points, got {len(self.values)}")

    @classmethod
    def from_callable(cls, n: int, f: Callable, mode: str = "exact", name: str = ""):
        N = 1 << n
        if mode == "exact":
            vals = [f(Fraction(k, N)) for k in range(N + 1)]
        else:
            vals = [f(k / N) for k in range(N + 1)]
        return cls(n, vals, mode, name)

    @property
    def size(self) -> int:
        return (1 << self.level) + 1

    def index_of(self, x) -> int:
        """Grid index of ``x``; ValueError when x is not on D_n."""
        if isinstance(x, (float, np.floating)):
            k = x * (1 << self.level)
            if not float(k).is_integer():
                raise ValueError(f"{x} is not on D_{self.level}")
            return int(k)
        return DyadicRational.from_value(x).at_level(self.level)

    def at(self, x):
        return self.values[self.index_of(x)]

    def floats(self) -> np.ndarray:
        if self.mode == "float":
            return self.values
        return np.array([float(v) for v in self.values])

    def scaled_integers(self):
        """``(numerators, D)`` with value_k = numerators[k] / D (exact mode only)."""
        D = reduce(math.lcm, (v.denominator for v in self.values), 1)
        nums = [v.numerator * (D // v.denominator) for v in self.values]
        bound = max(abs(v) for v in nums) * (self.size + 8)
        dtype = np.int64 if bound * D < (1 << 60) else object
        return np.array(nums, dtype=dtype), D


def staircase_grid(n: int) -> GridFunction:
    """P = B_{1,1} restricted to D_n (equal to B_n there)."""
    N = 1 << n
    return GridFunction(n, [Fraction(int(v), N) for v in Bn_array(n)], "exact", "P")


def xstar_grid(n: int) -> GridFunction:
    return GridFunction.from_callable(n, lambda x: min(x, 1 - x), "exact", "x*")


def quadratic_grid(n: int) -> GridFunction:
    """2x(1 - x)."""
    return GridFunction.from_callable(n, lambda x: 2 * x * (1 - x), "exact", "2x(1-x)")


def gaussian_grid(n: int) -> GridFunction:
    x = np.arange((1 << n) + 1) / (1 << n)
    return GridFunction(n, iso_profile(x), "float", "I")


def constant_grid(n: int, c) -> GridFunction:
    return GridFunction(n, [c] * ((1 << n) + 1), "exact", f"const {c}")


@dataclass
class Violation:
    witness: tuple
    lhs: object
    rhs: object
    gap: float


@dataclass
class CheckReport:
    name: str
    passed: bool
    violations: list
    scanned_count: int
    violation_count: int = 0
    exact: bool = False

    def __str__(self):
        head = "PASS" if self.passed else f"FAIL ({self.violation_count} violations)"
        mode = "exact" if self.exact else "float"
        return f"{self.name}: {head} [{self.scanned_count} cases, {mode}]"


def _report(name, bad_list, scanned, exact, keep):
    count = len(bad_list)
    bad_list.sort(key=lambda v: -v.gap)
    return CheckReport(name, count == 0, bad_list[:keep], scanned, count, exact)


def check_obstacle(g: GridFunction, tol: float = DEFAULT_TOL) -> CheckReport:
    """``g(0) = g(1) = 0``."""
    bad = []
    for x, v in (("0", g.values[0]), ("1", g.values[-1])):
        ok = v == 0 if g.mode == "exact" else abs(v) <= tol
        if not ok:
            bad.append(Violation((x,), v, 0, float(abs(v))))
    rep = _report(f"obstacle[{g.name}]", bad, 2, g.mode == "exact", 2)
    g.certified["obstacle"] = rep.passed
    return rep


def _pair_witness(i, j, N):
    return (f"{i + j}/{N}", f"{i - j}/{N}")


def check_two_point(g: GridFunction, alpha=1, beta=1, tol: float = DEFAULT_TOL,
                    keep: int = 50) -> CheckReport:
    """Every admissible pair on D_n; exact when alpha = beta = 1 and g is rational."""
    _check_params(alpha, beta)
    N = 1 << g.level
    name = f"two-point[{g.name}](alpha={alpha}, beta={beta})"
    bad = []
    scanned = 0
    exact = g.mode == "exact" and _is_one(alpha) and _is_one(beta)
    if exact:
        # scaled by 2*D*N:  2 N v_p  <=  N (v_{p+a} + v_{p-a}) + 2 j D
        v, D = g.scaled_integers()
        for j in range(1, N // 2 + 1):
            mid = v[j:N - j + 1]
            lhs = 2 * N * mid
            rhs = N * (v[2 * j:] + v[:N - 2 * j + 1]) + 2 * j * D
            scanned += len(mid)
            for idx in np.nonzero(lhs > rhs)[0]:
                i = int(idx) + j
                L = Fraction(int(lhs[idx]), 2 * D * N)
                R = Fraction(int(rhs[idx]), 2 * D * N)
                bad.append(Violation(_pair_witness(i, j, N), L, R, float(L - R)))
    else:
        f = g.floats()
        al, be = float(alpha), float(beta)
        for j in range(1, N // 2 + 1):
            a = j / N
            ab = a ** be
            lhs = f[j:N - j + 1] ** al
            rhs = 0.5 * (f[2 * j:] ** be + ab) ** (al / be) + 0.5 * (f[:N - 2 * j + 1] ** be + ab) ** (al / be)
            scanned += len(lhs)
            for idx in np.nonzero(lhs > rhs + tol)[0]:
                i = int(idx) + j
                bad.append(Violation(_pair_witness(i, j, N), float(lhs[idx]), float(rhs[idx]),
                                     float(lhs[idx] - rhs[idx])))
    rep = _report(name, bad, scanned, exact, keep)
    g.certified[("two-point", alpha, beta)] = rep.passed
    return rep


def check_bobkov(g: GridFunction, tol: float = DEFAULT_TOL, keep: int = 50) -> CheckReport:
    """Two-point inequality with (alpha, beta) = (1, 2)."""
    return check_two_point(g, 1, 2, tol, keep)


@dataclass
class BivariateLift:
    """``U(p, q) = (g(p)^beta + q^beta)^(alpha/beta)`` for grid points p and any q >= 0."""

    grid: GridFunction
    alpha: object = 1
    beta: object = 1

    @property
    def exact(self) -> bool:
        return self.grid.mode == "exact" and _is_one(self.alpha) and _is_one(self.beta)

    def at_index(self, i: int, q):
        if q < 0:
            raise ValueError("q must be nonnegative")
        v = self.grid.values[i]
        if self.exact and not isinstance(q, float):
            return v + Fraction(q)
        al, be = float(self.alpha), float(self.beta)
        return (float(v) ** be + float(q) ** be) ** (al / be)

    def __call__(self, p, q):
        return self.at_index(self.grid.index_of(p), q)

    def grid_values(self, q: float) -> np.ndarray:
        al, be = float(self.alpha), float(self.beta)
        return (self.grid.floats() ** be + float(q) ** be) ** (al / be)


def lift_to_bivariate(g: GridFunction, alpha=1, beta=1) -> BivariateLift:
    _check_params(alpha, beta)
    return BivariateLift(g, alpha, beta)


def check_three_point(u: BivariateLift, alpha=None, beta=None, q_grid=DEFAULT_Q_GRID,
                      tol: float = DEFAULT_TOL, keep: int = 50) -> CheckReport:
    """``U(p+a, t) + U(p-a, t) >= 2 U(p, q)`` with ``t = (a^beta + q^beta)^(1/beta)``.

    ``alpha``/``beta`` default to those of the lift; ``beta`` sets how the
    variation accumulates in ``t``.
    """
    alpha = u.alpha if alpha is None else alpha
    beta = u.beta if beta is None else beta
    _check_params(alpha, beta)
    g = u.grid
    N = 1 << g.level
    name = f"three-point[{g.name}](alpha={alpha}, beta={beta})"
    bad = []
    scanned = 0
    exact = u.exact and _is_one(beta) and all(not isinstance(q, float) for q in q_grid)
    if exact:
        for q in q_grid:
            q = Fraction(q)
            for j in range(1, N // 2 + 1):
                t = Fraction(j, N) + q
                for i in range(j, N - j + 1):
                    lhs = u.at_index(i + j, t) + u.at_index(i - j, t)
                    rhs = 2 * u.at_index(i, q)
                    scanned += 1
                    if lhs < rhs:
                        bad.append(Violation(_pair_witness(i, j, N) + (str(q),), lhs, rhs,
                                             float(rhs - lhs)))
    else:
        be = float(beta)
        for q in q_grid:
            base = u.grid_values(float(q))
            for j in range(1, N // 2 + 1):
                a = j / N
                t = (a ** be + float(q) ** be) ** (1.0 / be)
                shifted = u.grid_values(t)
                lhs = shifted[2 * j:] + shifted[:N - 2 * j + 1]
                rhs = 2 * base[j:N - j + 1]
                scanned += len(rhs)
                for idx in np.nonzero(lhs + tol < rhs)[0]:
                    i = int(idx) + j
                    bad.append(Violation(_pair_witness(i, j, N) + (str(q),), float(lhs[idx]),
                                         float(rhs[idx]), float(rhs[idx] - lhs[idx])))
    return _report(name, bad, scanned, exact, keep)


def _candidates(f: np.ndarray, alpha, beta):
    """Yield ``(j, values)``: the two-point right side raised to 1/alpha for step a = j/N."""
    N = len(f) - 1
    al, be = float(alpha), float(beta)
    fb = f ** be
    for j in range(1, N // 2 + 1):
        ab = (j / N) ** be
        if al == 1.0 and be == 1.0:
            cand = 0.5 * (f[2 * j:] + f[:N - 2 * j + 1]) + j / N
        else:
            cand = (0.5 * (fb[2 * j:] + ab) ** (al / be)
                    + 0.5 * (fb[:N - 2 * j + 1] + ab) ** (al / be)) ** (1.0 / al)
        yield j, cand


def bellman_step(f: np.ndarray, alpha=1, beta=1) -> np.ndarray:
    """One Jacobi sweep ``g <- min(g, min_a [two-point right side]^(1/alpha))``; ends pinned to 0."""
    N = len(f) - 1
    out = f.copy()
    for j, cand in _candidates(f, alpha, beta):
        np.minimum(out[j:N - j + 1], cand, out=out[j:N - j + 1])
    out[0] = out[N] = 0.0
    return out


def _policy(f: np.ndarray, alpha, beta) -> np.ndarray:
    """Minimizing step index per point; 0 where every step exceeds the current value."""
    N = len(f) - 1
    best = np.full(N + 1, np.inf)
    arg = np.zeros(N + 1, dtype=np.int64)
    for j, cand in _candidates(f, alpha, beta):
        seg = best[j:N - j + 1]
        better = cand < seg
        seg[better] = cand[better]
        arg[j:N - j + 1][better] = j
    arg[best > f + 1e-13] = 0
    arg[0] = arg[N] = 0
    return arg


def _evaluate_policy(f: np.ndarray, arg: np.ndarray, alpha, beta,
                     tol: float, max_newton: int = 50) -> np.ndarray:
    """Solve ``g(x) = Phi_{a(x)}(g)(x)`` on points with a step; others keep their value.

    Newton's method on the sparse system, clamped to stay at or below ``f``.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import spsolve

    N = len(f) - 1
    al, be = float(alpha), float(beta)
    act = np.nonzero(arg)[0]
    if act.size == 0:
        return f
    j = arg[act]
    a = j / N
    hi, lo = act + j, act - j
    pos = np.full(N + 1, -1)
    pos[act] = np.arange(act.size)
    g = f.copy()
    for _ in range(max_newton):
        gp, gm = g[hi], g[lo]
        up = gp ** be + a ** be
        um = gm ** be + a ** be
        S = 0.5 * up ** (al / be) + 0.5 * um ** (al / be)
        phi = S ** (1.0 / al)
        resid = g[act] - phi
        if np.max(np.abs(resid)) < 0.1 * tol:
            break
        # d phi / d g(x +- a)
        dp = 0.5 * S ** (1.0 / al - 1.0) * up ** (al / be - 1.0) * gp ** (be - 1.0)
        dm = 0.5 * S ** (1.0 / al - 1.0) * um ** (al / be - 1.0) * gm ** (be - 1.0)
        rows = [np.arange(act.size)]
        cols = [np.arange(act.size)]
        vals = [np.ones(act.size)]
        for nb, d in ((hi, dp), (lo, dm)):
            inside = pos[nb] >= 0
            rows.append(np.nonzero(inside)[0])
            cols.append(pos[nb[inside]])
            vals.append(-d[inside])
        J = csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(act.size, act.size))
        step = spsolve(J.tocsc(), resid)
        new = np.clip(g[act] - step, 0.0, f[act])
        if np.max(np.abs(new - g[act])) < 0.1 * tol:
            g[act] = new
            break
        g[act] = new
    return g


def bellman_step_exact(values, alpha=1, beta=1) -> tuple:
    """Exact version of :func:`bellman_step` for alpha = beta = 1."""
    if not (_is_one(alpha) and _is_one(beta)):
        raise ValueError("exact iteration is only defined for alpha = beta = 1")
    N = len(values) - 1
    out = list(values)
    for i in range(1, N):
        for j in range(1, min(i, N - i) + 1):
            cand = (values[i + j] + values[i - j]) / 2 + Fraction(j, N)
            if cand < out[i]:
                out[i] = cand
    out[0] = out[N] = Fraction(0)
    return tuple(out)


def is_tight_exact(values) -> bool:
    """Every interior point attains equality in some (1,1) two-point constraint."""
    N = len(values) - 1
    for i in range(1, N):
        best = min((values[i + j] + values[i - j]) / 2 + Fraction(j, N)
                   for j in range(1, min(i, N - i) + 1))
        if best != values[i]:
            return False
    return True


@dataclass
class BellmanResult:
    grid: GridFunction
    converged: bool
    iterations: int
    max_change: float
    monotone: bool
    policy_rounds: int = 0


def bellman_solve(n: int, alpha=1, beta=1, cap: float = DEFAULT_CAP,
                  tol: float = CONVERGENCE_TOL, max_iters: int = 100_000,
                  accelerate: bool = True) -> BellmanResult:
    """Grid-maximal function below ``cap`` with zero ends and all grid two-point constraints.

    Starts from ``cap`` in the interior and applies :func:`bellman_step`
    (Jacobi) until the largest change drops below ``tol``; iterates never
    increase. The operator is a sup-norm contraction on [0, cap], but its
    rate degrades like 1 - O(4^-n) when the binding steps are the shortest
    ones (beta > 1). With ``accelerate`` the sweeps are interleaved with
    policy iteration (freeze the minimizing step, solve the resulting system
    by Newton, clamp from above), which reaches the same fixed point; the
    Jacobi stopping test is still what decides convergence.
    """
    _check_params(alpha, beta)
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    N = 1 << n
    f = np.full(N + 1, float(cap))
    f[0] = f[N] = 0.0
    change = math.inf
    monotone = True
    it = 0
    rounds = 0
    linear = _is_one(alpha) and _is_one(beta)
    while it < max_iters:
        nxt = bellman_step(f, alpha, beta)
        it += 1
        if np.any(nxt > f):
            monotone = False
        change = float(np.max(np.abs(nxt - f)))
        f = nxt
        if change < tol:
            break
        if accelerate and not linear:
            g = _evaluate_policy(f, _policy(f, alpha, beta), alpha, beta, tol)
            rounds += 1
            if np.any(g > f):
                monotone = False
            f = g
    grid = GridFunction(n, f, "float", f"bellman(alpha={alpha}, beta={beta})")
    return BellmanResult(grid, change < tol, it, change, monotone, rounds)


def certify_lower_bound(g: GridFunction, alpha, beta, A: DyadicSet,
                        tol: float = DEFAULT_TOL) -> CheckReport:
    """``||S_beta(1_A)||_alpha >= g(|A|)`` for a candidate already passing both checks."""
    if not g.certified.get("obstacle"):
        raise NotCertifiedError(f"{g.name}: run check_obstacle first (and pass it)")
    if not g.certified.get(("two-point", alpha, beta)):
        raise NotCertifiedError(f"{g.name}: run check_two_point for alpha={alpha}, beta={beta} first")
    x = A.measure
    bound = g.at(x)
    value = norm_alpha(s_beta_powers(A, beta), alpha, beta)
    exact = isinstance(value, Fraction) and g.mode == "exact"
    ok = value >= bound if exact else float(value) >= float(bound) - tol
    bad = [] if ok else [Violation((str(x),), value, bound, float(bound) - float(value))]
    return CheckReport(f"lower-bound[{g.name}](|A|={x})", ok, bad, 1, len(bad), exact)
