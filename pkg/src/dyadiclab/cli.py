"""Command-line front end: every table and check, emitted as CSV or JSON.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage error.
Output goes to --output, else to $DYADICLAB_OUTPUT_DIR/<command>.<format>,
else to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import extremal_search as ex
from . import gaussian_profile as gp
from . import inequality_lab as lab
from . import staircase as sc
from .dyadic_core import DyadicRational

OUTPUT_DIR_ENV = "DYADICLAB_OUTPUT_DIR"
FUNCTIONS = {
    "P": lab.staircase_grid,
    "xstar": lab.xstar_grid,
    "quadratic": lab.quadratic_grid,
    "gaussian": lab.gaussian_grid,
}


class UsageError(Exception):
    pass


def _number(s: str):
    """'1', '0.5' or '1/2' -> int or Fraction (exact)."""
    try:
        v = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    return int(v) if v.denominator == 1 else v


def _q_grid(s: str) -> tuple:
    return tuple(Fraction(t) for t in s.split(",") if t.strip())


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, DyadicRational):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _frac_str(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return _frac_str(v)
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


class Outcome:
    """Rows plus named pass/fail checks and scalar summaries for one run."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.rows: list = []
        self.checks: dict = {}
        self.summary: dict = {}
        self.messages: list = []

    def check(self, name: str, ok: bool, detail=None):
        self.checks[name] = bool(ok)
        if not ok:
            self.messages.append(f"FAIL {name}" + (f": {detail}" if detail is not None else ""))

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {
                "command": self.command,
                "config": _jsonable(self.config),
                "passed": self.passed,
                "checks": self.checks,
                "summary": _jsonable(self.summary),
                "rows": _jsonable(self.rows),
            }
            return json.dumps(doc, indent=1) + "\n"
        buf = io.StringIO()
        if self.rows:
            w = csv.writer(buf, lineterminator="\n")
            cols = list(self.rows[0])
            w.writerow(cols)
            for r in self.rows:
                w.writerow([_cell(r.get(c)) for c in cols])
        return buf.getvalue()


# commands -------------------------------------------------------------------

def cmd_p_table(a, out: Outcome):
    n = a.depth
    if not 1 <= n <= 20:
        raise UsageError("p-table needs 1 <= depth <= 20")
    N = 1 << n
    nums = sc.Bn_array(n)
    bound_ok, tight_ok = True, True
    min_gap = math.inf
    for k in range(N + 1):
        x = DyadicRational(k, n)
        P = Fraction(int(nums[k]), N)
        exact = sc.xstar_log2_exact(x)
        comp = sc.xstar_log2(x)
        if exact is not None:
            tight = P == exact
            # x* a power of two (or 0): equality is expected
            tight_ok &= tight
            bound_ok &= P >= exact
        else:
            tight = False
            gap = float(P) - comp
            min_gap = min(min_gap, gap)
            bound_ok &= gap > 0
        out.rows.append({"x": Fraction(k, N), "x_float": k / N, "P": P, "P_float": float(P),
                         "xstar_log2": comp, "gap": float(P) - comp, "tight": tight})
    out.summary["min_gap_off_powers"] = min_gap
    out.check("P>=x*log2(1/x*)", bound_ok)
    out.check("equality exactly at x*=2^-k", tight_ok)


def _grid(a):
    if not 1 <= a.depth <= 14:
        raise UsageError("depth must lie in 1..14 for grid checks")
    return FUNCTIONS[a.function](a.depth)


def _report_rows(out: Outcome, rep):
    out.summary.update(scanned=rep.scanned_count, violations=rep.violation_count, exact=rep.exact)
    for v in rep.violations:
        out.rows.append({"witness": " ".join(str(w) for w in v.witness),
                         "lhs": _cell(v.lhs), "rhs": _cell(v.rhs), "gap": float(v.gap)})
    out.check(rep.name, rep.passed, f"{rep.violation_count} violations")


def cmd_verify(a, out: Outcome):
    what = a.what
    try:
        if what == "two-point":
            _report_rows(out, lab.check_two_point(_grid(a), a.alpha, a.beta, a.tol))
        elif what == "bobkov":
            _report_rows(out, lab.check_bobkov(_grid(a), a.tol))
        elif what == "obstacle":
            _report_rows(out, lab.check_obstacle(_grid(a), a.tol))
        elif what == "three-point":
            u = lab.lift_to_bivariate(_grid(a), a.alpha, a.beta)
            _report_rows(out, lab.check_three_point(u, a.alpha, a.beta, a.q_grid, a.tol))
        elif what == "identities":
            reports = sc.check_F_identities(a.k if a.k is not None else 2048)
            reports += sc.check_P_identities(a.depth, a.tol)
            for r in reports:
                out.rows.append({"identity": r.name, "passed": r.passed, "checked": r.checked,
                                 "counterexample": "" if r.counterexample is None
                                 else " ".join(map(str, r.counterexample))})
                out.check(r.name, r.passed, r.counterexample)
        elif what == "modulus":
            m_max = a.k_max if a.k_max is not None else min(10, a.depth - 1)
            rows = sc.modulus_scan(a.depth, m_max)
            for r in rows:
                out.rows.append({"m": r.m, "max_ratio": r.max_ratio, "x": r.witness[0],
                                 "y": r.witness[1], "pairs": r.pairs})
            const = sc.modulus_constant(rows)
            out.summary["constant"] = const
            out.check("finite constant", math.isfinite(const))
            ok = all(sc.P_value(Fraction(1, 1 << k)) == Fraction(k, 1 << k)
                     for k in range(1, a.depth + 1))
            out.check("ratio 1 at (0, 2^-k)", ok)
    except ValueError as e:
        raise UsageError(str(e))


def cmd_bellman(a, out: Outcome):
    n = a.depth
    if not 1 <= n <= 14:
        raise UsageError("bellman needs 1 <= depth <= 14")
    try:
        r = lab.bellman_solve(n, a.alpha, a.beta, float(a.cap), a.tol, a.max_iters)
    except ValueError as e:
        raise UsageError(str(e))
    N = 1 << n
    vals = r.grid.values
    x = np.arange(N + 1) / N
    ref = None
    if a.alpha == 1 and a.beta == 1:
        ref = sc.Bn_array(n) / N
        ref_name = "B_n"
    elif a.alpha == 1 and a.beta == 2:
        ref = gp.iso_profile(x)
        ref_name = "I"
    for k in range(N + 1):
        row = {"x": Fraction(k, N), "x_float": float(x[k]), "value": float(vals[k])}
        if ref is not None:
            row[ref_name] = float(ref[k])
            row["diff"] = float(vals[k] - ref[k])
        out.rows.append(row)
    out.summary.update(converged=r.converged, iterations=r.iterations,
                       max_change=r.max_change, policy_rounds=r.policy_rounds)
    out.check("converged", r.converged, f"max change {r.max_change}")
    out.check("iterates non-increasing", r.monotone)
    if ref is not None:
        d = vals - ref
        out.summary["max_abs_diff" if ref_name == "B_n" else "max_gap"] = float(np.max(np.abs(d)))
        if ref_name == "B_n":
            out.check("matches B_n", float(np.max(np.abs(d))) <= 1e-12)
        else:
            out.check("value >= I - 1e-9", float(np.min(d)) >= -1e-9)


def _mask_leaves(mask: int) -> str:
    bits = [str(j) for j in range(mask.bit_length()) if (mask >> j) & 1]
    return "{" + ",".join(bits) + "}"


def cmd_bruteforce(a, out: Outcome):
    n = a.depth
    if not 0 <= n <= 5:
        raise UsageError("bruteforce needs 0 <= depth <= 5")
    ks = [a.k] if a.k is not None else range((1 << n) + 1)
    exact = a.what == "edges" or (a.alpha == 1 and a.beta == 1)
    for k in ks:
        try:
            if a.what == "snorm":
                r = ex.enumerate_min_S_norm(n, k, a.alpha, a.beta, a.budget, a.threads)
            else:
                r = ex.enumerate_min_edge_boundary(n, k, a.budget, a.threads)
        except ex.BudgetExceededError as e:
            raise UsageError(str(e))
        except ValueError as e:
            raise UsageError(str(e))
        P = sc.P_value(Fraction(k, 1 << n))
        row = {"n": n, "k": k}
        if exact:
            row.update(minimum=r.minimum, minimum_float=float(r.minimum), P=P,
                       attained=r.minimum == P)
            out.check(f"min=P({k}/{1 << n})", r.minimum == P, f"{r.minimum} vs {P}")
        else:
            row.update(minimum=float(r.minimum))
        row.update(argmin=_mask_leaves(r.argmin[0]), argmin_count=len(r.argmin),
                   initial_in_argmin=((1 << k) - 1) in r.argmin, sets_scanned=r.sets_scanned)
        out.rows.append(row)


def cmd_sharpness(a, out: Outcome):
    alpha = float(a.alpha)
    k_max = a.k_max if a.k_max is not None else 24
    try:
        rows = ex.sharpness_table(alpha, k_max)
    except ValueError as e:
        raise UsageError(str(e))
    for r in rows:
        out.rows.append({"k": r.k, "integral": r.integral, "bound": r.bound,
                         "within_bound": r.within_bound, "norm": r.norm, "ratio": r.ratio})
    out.summary["C_alpha"] = max(r.ratio for r in rows)
    out.check("integral <= bound", all(r.within_bound for r in rows))


def cmd_gaussian(a, out: Outcome):
    n = a.depth
    if not 3 <= n <= 20:
        raise UsageError("gaussian needs 3 <= depth <= 20")
    N = 1 << n
    x = np.arange(N + 1) / N
    I = gp.iso_profile(x)
    s = np.minimum(x, 1 - x)
    for k in range(N + 1):
        comp = float(s[k] * math.sqrt(math.log(1 / s[k]))) if 0 < k < N else 0.0
        out.rows.append({"x": Fraction(k, N), "x_float": float(x[k]), "I": float(I[k]),
                         "comparator": comp, "ratio": float(I[k]) / comp if comp else None})
    scan = gp.profile_equiv_scan(n)
    inner = x[1:-1]
    rt = float(np.max(np.abs(gp.std_normal_cdf(gp.std_normal_quantile(inner)) - inner)))
    out.summary.update(min_ratio=scan.min_ratio, argmin=scan.argmin, max_ratio=scan.max_ratio,
                       argmax=scan.argmax, roundtrip_error=rt)
    out.check("roundtrip <= 1e-12", rt <= 1e-12, rt)
    out.check("I symmetric", bool(np.all(I == I[::-1])))


def cmd_hypercube(a, out: Outcome):
    n = a.depth
    what = a.what
    try:
        if what == "harper":
            if not 0 <= n <= 16:
                raise UsageError("harper needs 0 <= depth <= 16")
            ks = [a.k] if a.k is not None else range((1 << n) + 1)
            ok = True
            for k in ks:
                d = ex.edge_boundary_density(ex.harper_set(n, k))
                B = sc.Bn_value(k, n)
                ok &= d == B
                out.rows.append({"k": k, "density": d, "density_float": float(d), "B_n": B,
                                 "equal": d == B})
            out.check("harper density = B_n", ok)
        elif what == "talagrand":
            if not 1 <= n <= 4:
                raise UsageError("talagrand needs 1 <= depth <= 4")
            r = ex.talagrand_ratio_scan(n, float(a.q), a.budget)
            for c, v in r.by_cardinality.items():
                out.rows.append({"cardinality": c, "min_ratio": v})
            out.summary.update(min_ratio=r.min_ratio, argmin=_mask_leaves(r.argmin),
                               sets_scanned=r.sets_scanned)
            out.check("positive minimum", r.min_ratio > 0)
        elif what == "compare":
            _report_rows(out, ex.compare_S1_gradient(n))
    except ex.BudgetExceededError as e:
        raise UsageError(str(e))
    except ValueError as e:
        raise UsageError(str(e))


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--alpha", type=_number, default=1)
    common.add_argument("--beta", type=_number, default=1)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", default=None)
    common.add_argument("--cap", type=_number, default=lab.DEFAULT_CAP)
    common.add_argument("--max-iters", type=int, default=100_000)
    common.add_argument("--k", type=int, default=None)
    common.add_argument("--k-max", type=int, default=None)
    common.add_argument("--q", type=_number, default=1)
    common.add_argument("--q-grid", type=_q_grid, default=lab.DEFAULT_Q_GRID)
    common.add_argument("--budget", type=int, default=ex.DEFAULT_BUDGET)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--function", choices=sorted(FUNCTIONS), default=None)

    p = argparse.ArgumentParser(prog="dyadiclab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("p-table", parents=[common])
    sub.add_parser("figure1", parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("what", choices=("two-point", "three-point", "bobkov", "obstacle",
                                    "identities", "modulus"))
    sub.add_parser("bellman", parents=[common])
    b = sub.add_parser("bruteforce", parents=[common])
    b.add_argument("what", nargs="?", choices=("snorm", "edges"), default="snorm")
    sub.add_parser("sharpness", parents=[common])
    sub.add_parser("gaussian", parents=[common])
    h = sub.add_parser("hypercube", parents=[common])
    h.add_argument("what", choices=("harper", "talagrand", "compare"))
    return p


_DEFAULT_DEPTH = {"p-table": 12, "figure1": 12, "verify": 10, "bellman": 8, "bruteforce": 3,
                  "sharpness": 0, "gaussian": 9, "hypercube": 3}


def resolve(a: argparse.Namespace) -> argparse.Namespace:
    if a.command == "figure1":
        a.command = "p-table"
    if a.depth is None:
        a.depth = _DEFAULT_DEPTH[a.command]
        if a.command == "verify" and a.what == "three-point":
            a.depth = 8
        if a.command == "verify" and a.what == "modulus":
            a.depth = 12
    if a.tol is None:
        a.tol = lab.CONVERGENCE_TOL if a.command == "bellman" else lab.DEFAULT_TOL
    if a.function is None:
        a.function = "gaussian" if getattr(a, "what", None) == "bobkov" else "P"
    if a.command == "sharpness" and a.alpha == 1:
        a.alpha = Fraction(1, 2)
    if a.threads < 1 or a.budget < 1 or a.max_iters < 1:
        raise UsageError("--threads, --budget and --max-iters must be positive")
    return a


COMMANDS = {"p-table": cmd_p_table, "verify": cmd_verify, "bellman": cmd_bellman,
            "bruteforce": cmd_bruteforce, "sharpness": cmd_sharpness,
            "gaussian": cmd_gaussian, "hypercube": cmd_hypercube}


def _destination(a) -> str | None:
    if a.output:
        return a.output
    d = os.environ.get(OUTPUT_DIR_ENV)
    if d:
        name = a.command + (f"-{a.what}" if getattr(a, "what", None) else "")
        return os.path.join(d, f"{name}.{a.format}")
    return None


def run(a: argparse.Namespace) -> int:
    a = resolve(a)
    config = {k: v for k, v in sorted(vars(a).items())}
    out = Outcome(a.command, config)
    COMMANDS[a.command](a, out)
    text = out.render(a.format)
    dest = _destination(a)
    if dest is None:
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(dest)), exist_ok=True)
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    if out.summary and a.format == "csv":
        for key, val in out.summary.items():
            print(f"{key}: {_cell(_jsonable(val))}", file=sys.stderr)
    for m in out.messages:
        print(m, file=sys.stderr)
    return 0 if out.passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return run(a)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
