"""Command-line front door: scans and checks as deterministic CSV/JSON.

Every subcommand walks its parameter family in a fixed order, formats
floats as %.12e, and draws any random tuples from fixed seeds, so a
given invocation is byte-reproducible (including across --jobs values;
parallel results are merged back in canonical order).  Timing goes to
stderr only.

Exit codes: 0 success, 1 any check/invariant failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

import numpy as np

from . import verify as verify_mod
from .arith import factorize
from .bilinear import BilinearConfig, cancellation_scan
from .charsums import CharSumParams, calC, df_correlation, frakC2_glue, frakC_11
from .charsums import moebius_correlation, moebius_reduce, ppower_bound
from .distribution import discrepancy_scan
from .expsums import hyper_kl3_table, kloosterman_split, kloosterman_table
from .modarith import PrimePower, is_prime
from .verify import reports_csv, run_checks
from .voronoi import SmoothWeight, voronoi_residual

__all__ = ["main", "load_config", "parse_int_list", "ParseError", "ValidationError"]

SUBCOMMANDS = (
    "kloosterman",
    "hyperkl3",
    "charsum-pp",
    "charsum-prime",
    "df",
    "calC",
    "glue",
    "voronoi",
    "bilinear",
    "distribution",
    "verify-all",
)

# desk-scale caps; configs beyond these are rejected, not attempted
CAPS = {
    "gamma_max": 8,
    "u_max": 8,
    "q": 10**4,
    "p": 499,
    "X_voronoi": 400.0,
    "X_distribution": 10**7,
    "M": 10**6,
    "N": 10**4,
    "jobs": 64,
}

CONFIG_KEYS = {
    "p", "gamma_max", "u_max", "q", "X", "M", "N",
    "out", "format", "jobs", "tol", "quick",
}


class ParseError(ValueError):
    """Malformed config file or range expression."""


class ValidationError(ValueError):
    """Config contains unknown keys or out-of-cap values."""


@dataclass
class RunConfig:
    """Validated parameters for one subcommand invocation."""

    subcommand: str
    p: list[int] = field(default_factory=list)
    gamma_max: int = 3
    u_max: int | None = None
    q: list[int] = field(default_factory=list)
    X: list[float] = field(default_factory=list)
    M: list[int] = field(default_factory=list)
    N: list[int] = field(default_factory=list)
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    tol: float | None = None
    quick: bool = False
    self_test: bool = False

    def validate(self) -> None:
        if self.format not in ("csv", "json"):
            raise ValidationError(f"format must be csv or json, got {self.format}")
        if not 1 <= self.jobs <= CAPS["jobs"]:
            raise ValidationError(f"jobs must be in [1, {CAPS['jobs']}]")
        if self.tol is not None and self.tol < 1e-12:
            raise ValidationError("tolerance override below machine default 1e-12")
        if self.gamma_max > CAPS["gamma_max"]:
            raise ValidationError(f"gamma_max {self.gamma_max} above cap {CAPS['gamma_max']}")
        if self.u_max is not None and self.u_max > CAPS["u_max"]:
            raise ValidationError(f"u_max {self.u_max} above cap {CAPS['u_max']}")
        for q in self.q:
            if not 1 <= q <= CAPS["q"]:
                raise ValidationError(f"q = {q} outside [1, {CAPS['q']}]")
        for p in self.p:
            if not 2 <= p <= CAPS["p"] or not is_prime(p):
                raise ValidationError(f"p = {p} is not a prime <= {CAPS['p']}")
        cap_x = (
            CAPS["X_voronoi"] if self.subcommand == "voronoi" else CAPS["X_distribution"]
        )
        for x in self.X:
            if not 0 < x <= cap_x:
                raise ValidationError(f"X = {x} outside (0, {cap_x}]")
        for m in self.M:
            if not 1 <= m <= CAPS["M"]:
                raise ValidationError(f"M = {m} outside [1, {CAPS['M']}]")
        for n in self.N:
            if not 1 <= n <= CAPS["N"]:
                raise ValidationError(f"N = {n} outside [1, {CAPS['N']}]")


def parse_int_list(text: str) -> list[int]:
    """Parse "3,5,7" / "1..20" / mixes of both into a sorted-order list."""
    out: list[int] = []
    for piece in str(text).split(","):
        piece = piece.strip()
        if not piece:
            continue
        if ".." in piece:
            lo, _, hi = piece.partition("..")
            try:
                out.extend(range(int(lo), int(hi) + 1))
            except ValueError as exc:
                raise ParseError(f"bad range {piece!r}") from exc
        else:
            try:
                out.append(int(piece))
            except ValueError as exc:
                raise ParseError(f"bad integer {piece!r}") from exc
    if not out:
        raise ParseError(f"empty list expression {text!r}")
    return out


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(piece) for piece in str(text).split(",") if piece.strip()]
    except ValueError as exc:
        raise ParseError(f"bad float list {text!r}") from exc


def load_config(path: str) -> dict:
    """JSON config; unknown keys rejected, range strings allowed."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"config {path} must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return raw


def _fmt(x: float) -> str:
    return f"{x:.12e}"


def _pmap(fn, items, jobs: int):
    """Order-preserving parallel map; canonical merge regardless of jobs."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _emit(rows: list[dict], header: list[str], cfg: RunConfig) -> None:
    """Write rows (already string-valued) as CSV or JSON, file or stdout."""
    if cfg.format == "csv":
        lines = [",".join(header)]
        lines += [",".join(str(row[h]) for h in header) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps([{h: row[h] for h in header} for row in rows], indent=0)
        text += "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- runners


def _run_kloosterman(cfg: RunConfig) -> int:
    qs = cfg.q or [12]
    tol = cfg.tol if cfg.tol is not None else 1e-9

    def one(q: int) -> list[dict]:
        tab = kloosterman_table(q).values
        rows = []
        for m in range(q):
            split = kloosterman_split(1, m, q)
            diff = abs(split - tab[m])
            rows.append(
                {
                    "q": q,
                    "m": m,
                    "value": _fmt(float(tab[m])),
                    "split_value": _fmt(split.real),
                    "abs_diff": _fmt(diff),
                }
            )
            if diff > tol * q:
                raise AssertionError(f"split mismatch at q={q}, m={m}: {diff}")
        return rows

    flat = [r for rows in _pmap(one, qs, cfg.jobs) for r in rows]
    _emit(flat, ["q", "m", "value", "split_value", "abs_diff"], cfg)
    return 0


def _run_hyperkl3(cfg: RunConfig) -> int:
    qs = cfg.q or [9]

    def one(q: int) -> list[dict]:
        tab = hyper_kl3_table(q)
        return [
            {
                "q": q,
                "m": m,
                "re": _fmt(tab[m].real),
                "im": _fmt(tab[m].imag),
                "abs": _fmt(abs(tab[m])),
            }
            for m in range(q)
        ]

    flat = [r for rows in _pmap(one, qs, cfg.jobs) for r in rows]
    _emit(flat, ["q", "m", "re", "im", "abs"], cfg)
    return 0


def _run_charsum_pp(cfg: RunConfig) -> int:
    ps = cfg.p or [3, 5]
    per_cell = 50
    cells = []
    for p in ps:
        for gamma in range(2, cfg.gamma_max + 1):
            ucap = 4 * gamma // 5
            if cfg.u_max is not None:
                ucap = min(ucap, cfg.u_max)
            for u in range(1, ucap + 1):
                cells.append((p, gamma, u))

    def one(cell: tuple[int, int, int]) -> list[dict]:
        p, gamma, u = cell
        rows = []
        seed = 97 * p + 31 * gamma + u
        for tup in verify_mod._charsum_tuples(p, gamma, u, per_cell, seed):
            s1, t1, s2, t2, lam1, lam2, m = tup
            rep = ppower_bound(
                CharSumParams(PrimePower(p, gamma), u, s1, t1, s2, t2, lam1, lam2, m)
            )
            rows.append(
                {
                    "p": p, "gamma": gamma, "u": u,
                    "s1": s1, "t1": t1, "s2": s2, "t2": t2,
                    "lam1": lam1, "lam2": lam2, "m": m,
                    "case": rep.aux["case"],
                    "value": _fmt(rep.sum_value.real),
                    "bound": _fmt(rep.bound_value),
                    "ratio": _fmt(rep.ratio),
                    "predicted_vanishing": int(rep.vanishing_predicted),
                    "vanished": int(rep.vanished),
                }
            )
        return rows

    flat = [r for rows in _pmap(one, cells, cfg.jobs) for r in rows]
    bad = [r for r in flat if r["predicted_vanishing"] and not r["vanished"]]
    _emit(
        flat,
        ["p", "gamma", "u", "s1", "t1", "s2", "t2", "lam1", "lam2", "m",
         "case", "value", "bound", "ratio", "predicted_vanishing", "vanished"],
        cfg,
    )
    return 1 if bad else 0


def _run_charsum_prime(cfg: RunConfig) -> int:
    ps = cfg.p or [3, 5, 7, 11, 13]
    tol = cfg.tol if cfg.tol is not None else 1e-6

    def one(p: int) -> list[dict]:
        rng = np.random.default_rng(1000 + p)
        rows = []
        for _ in range(25):
            s1, s2, lam1, lam2, t1, t2 = (int(v) for v in rng.integers(1, p, size=6))
            m = int(rng.integers(0, p))
            rep = frakC_11(p, s1, t1, s2, t2, lam1, lam2, m)
            mo = moebius_correlation(
                moebius_reduce(s1, t1, s2, t2, lam1, lam2, m, p), p
            )
            diff = abs(rep.aux["completed"] - mo)
            if diff > tol * p * p:
                raise AssertionError(f"route mismatch at p={p}: {diff}")
            rows.append(
                {
                    "p": p, "s1": s1, "t1": t1, "s2": s2, "t2": t2,
                    "lam1": lam1, "lam2": lam2, "m": m,
                    "value": _fmt(rep.sum_value.real),
                    "completed": _fmt(rep.aux["completed"].real),
                    "moebius": _fmt(mo.real),
                    "route_diff": _fmt(diff),
                    "ratio": _fmt(rep.ratio),
                }
            )
        return rows

    flat = [r for rows in _pmap(one, ps, cfg.jobs) for r in rows]
    _emit(
        flat,
        ["p", "s1", "t1", "s2", "t2", "lam1", "lam2", "m",
         "value", "completed", "moebius", "route_diff", "ratio"],
        cfg,
    )
    return 0


def _run_df(cfg: RunConfig) -> int:
    ps = cfg.p or [3, 5, 7]
    mods = []
    for p in ps:
        for gamma in range(1, cfg.gamma_max + 1):
            if p**gamma <= CAPS["q"]:
                mods.append((p, gamma))

    def one(mod: tuple[int, int]) -> list[dict]:
        p, gamma = mod
        pp = PrimePower(p, gamma)
        rng = np.random.default_rng(13 * p + gamma)
        rows = []
        for _ in range(30):
            a = int(rng.integers(1, pp.q))
            if a % p == 0:
                a = 1
            b = int(rng.integers(0, pp.q))
            rep = df_correlation(a, b, pp)
            rows.append(
                {
                    "p": p, "gamma": gamma, "a": a, "b": b,
                    "value": _fmt(rep.sum_value.real),
                    "bound": _fmt(rep.bound_value),
                    "ratio": _fmt(rep.ratio),
                    "nu_min": rep.aux["nu_min"],
                }
            )
        return rows

    flat = [r for rows in _pmap(one, mods, cfg.jobs) for r in rows]
    _emit(flat, ["p", "gamma", "a", "b", "value", "bound", "ratio", "nu_min"], cfg)
    return 0


def _run_calc(cfg: RunConfig) -> int:
    qs = cfg.q or list(range(2, 61))

    def one(q: int) -> list[dict]:
        rng = np.random.default_rng(4000 + q)
        units = [x for x in range(1, q + 1) if math.gcd(x, q) == 1]
        rows = []
        for mtil in (0, int(rng.integers(q))):
            n1, n2, b = (units[int(rng.integers(len(units)))] for _ in range(3))
            rep = calC(n1, n2, mtil, b, q)
            rows.append(
                {
                    "q": q, "n1": n1, "n2": n2, "mtil": mtil, "b": b,
                    "re": _fmt(rep.sum_value.real),
                    "im": _fmt(rep.sum_value.imag),
                    "bound": _fmt(rep.bound_value),
                    "ratio": _fmt(rep.ratio),
                    "crt_residual": _fmt(rep.aux["residual"]),
                }
            )
        return rows

    flat = [r for rows in _pmap(one, qs, cfg.jobs) for r in rows]
    _emit(
        flat,
        ["q", "n1", "n2", "mtil", "b", "re", "im", "bound", "ratio", "crt_residual"],
        cfg,
    )
    return 0


def _run_glue(cfg: RunConfig) -> int:
    qs = cfg.q or list(range(2, 61))

    def one(q: int) -> list[dict]:
        rng = np.random.default_rng(4000 + q)
        units = [x for x in range(1, q + 1) if math.gcd(x, q) == 1]
        pick = lambda: units[int(rng.integers(len(units)))]
        rows = []
        for d in (dd for dd in factorize(q).divisors()
                  if factorize(dd).is_squarefree()):
            rep = frakC2_glue(
                d, q, pick(), pick(), pick(), pick(), pick(), pick(),
                int(rng.integers(q)), int(rng.integers(q)),
                int(rng.integers(d)), pick(),
            )
            resid = rep.aux["residual"]
            rows.append(
                {
                    "d": d, "q": q,
                    "re": _fmt(rep.sum_value.real),
                    "im": _fmt(rep.sum_value.imag),
                    "bound": _fmt(rep.bound_value),
                    "ratio": _fmt(rep.ratio),
                    "crt_residual": "" if resid is None else _fmt(resid),
                    "active_k": ";".join(str(k) for k in rep.aux["active_k"]),
                }
            )
        return rows

    flat = [r for rows in _pmap(one, qs, cfg.jobs) for r in rows]
    _emit(
        flat,
        ["d", "q", "re", "im", "bound", "ratio", "crt_residual", "active_k"],
        cfg,
    )
    return 0


def _run_voronoi(cfg: RunConfig) -> int:
    qs = cfg.q or list(range(1, 21))
    xs = cfg.X or [50.0]
    tol = cfg.tol if cfg.tol is not None else 1e-6
    cells = [
        (q, a, x)
        for x in xs
        for q in qs
        for a in range(1, q + 1)
        if math.gcd(a, q) == 1
    ]

    def one(cell: tuple[int, int, float]) -> dict:
        q, a, x = cell
        rep = voronoi_residual(a, q, SmoothWeight(x))
        return {
            "q": q, "a": a, "X": _fmt(x),
            "lhs_re": _fmt(rep.lhs.real), "lhs_im": _fmt(rep.lhs.imag),
            "main": _fmt(rep.rhs_main.real),
            "dual_re": _fmt(rep.rhs_dual.real),
            "dual_im": _fmt(rep.rhs_dual.imag),
            "truncation": rep.truncation_level,
            "residual": _fmt(rep.residual),
            "relative": _fmt(rep.relative_residual),
            "_rel": rep.relative_residual,
        }

    rows = _pmap(one, cells, cfg.jobs)
    bad = [r for r in rows if r.pop("_rel") > tol]
    _emit(
        rows,
        ["q", "a", "X", "lhs_re", "lhs_im", "main", "dual_re", "dual_im",
         "truncation", "residual", "relative"],
        cfg,
    )
    if bad:
        print(f"{len(bad)} cells above tolerance {tol}", file=sys.stderr)
        return 1
    return 0


def _run_bilinear(cfg: RunConfig) -> int:
    qs = cfg.q or [27, 49, 121]
    ms = cfg.M or []
    ns = cfg.N or [3]
    configs = []
    for q in qs:
        units = [x for x in range(1, q + 1) if math.gcd(x, q) == 1]
        b = units[len(units) // 2]
        for m in ms or [max(4, q // 2)]:
            for n in ns:
                configs.append(BilinearConfig(q=q, M=m, N=n, b=b))
    reports = cancellation_scan(configs, check_paths=True)
    text = reports_csv(reports)
    if cfg.format == "json":
        header, *lines = text.strip().split("\n")
        keys = header.split(",")
        text = json.dumps(
            [dict(zip(keys, line.split(","))) for line in lines], indent=0
        ) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.within_trivial for r in reports) else 1


def _run_distribution(cfg: RunConfig) -> int:
    qs = cfg.q or [3, 5, 7, 9]
    x = int(cfg.X[0]) if cfg.X else 10**4
    rows = discrepancy_scan(x, qs, check_ramanujan=bool(cfg.tol is None))
    out = [
        {
            "X": r["X"], "q": r["q"], "a": r["a"], "ap_sum": r["ap_sum"],
            "coprime_mean": _fmt(r["coprime_mean"]),
            "delta": _fmt(r["delta"]),
            "max_abs_delta": _fmt(r["max_abs_delta"]),
            "slope_fit": _fmt(r["slope_fit"]),
        }
        for r in rows
    ]
    _emit(
        out,
        ["X", "q", "a", "ap_sum", "coprime_mean", "delta",
         "max_abs_delta", "slope_fit"],
        cfg,
    )
    return 0


def _run_verify_all(cfg: RunConfig) -> int:
    results = run_checks(quick=cfg.quick, jobs=cfg.jobs, pmap=_pmap)
    if cfg.self_test:
        results = results + [verify_mod.criterion_determinism()]
    for res in results:
        print(f"[time] {res.name}: {res.elapsed:.2f}s", file=sys.stderr)
    rows = [
        {"check": r.name, "passed": int(r.passed), "details": r.details.replace(",", ";")}
        for r in results
    ]
    _emit(rows, ["check", "passed", "details"], cfg)
    return 0 if all(r.passed for r in results) else 1


RUNNERS = {
    "kloosterman": _run_kloosterman,
    "hyperkl3": _run_hyperkl3,
    "charsum-pp": _run_charsum_pp,
    "charsum-prime": _run_charsum_prime,
    "df": _run_df,
    "calC": _run_calc,
    "glue": _run_glue,
    "voronoi": _run_voronoi,
    "bilinear": _run_bilinear,
    "distribution": _run_distribution,
    "verify-all": _run_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expsum",
        description="Desk-scale verification of exponential-sum identities "
        "and bounds (Kloosterman sums, correlation sums, Voronoi summation, "
        "bilinear cancellation, divisor distribution).",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file (flags override it)")
        sp.add_argument("--p", help="prime list, e.g. 3,5,7")
        sp.add_argument("--gamma-max", type=int, dest="gamma_max")
        sp.add_argument("--u-max", type=int, dest="u_max")
        sp.add_argument("--q", help="modulus list/range, e.g. 1..20 or 9,27")
        sp.add_argument("--X", help="scale list, e.g. 50,100")
        sp.add_argument("--M", help="m-range sizes, e.g. 100,200")
        sp.add_argument("--N", help="window sizes, e.g. 2,4")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--jobs", type=int, help="parallel workers "
                        "(default: EXPSUM_JOBS or 1)")
        sp.add_argument("--tol", type=float, help="tolerance override")
        if name == "verify-all":
            sp.add_argument("--quick", action="store_true",
                            help="reduced ranges, sub-minute run")
            sp.add_argument("--self-test", action="store_true", dest="self_test",
                            help="also run the CLI determinism check")
    return parser


def _build_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        base = load_config(args.config)
    cfg = RunConfig(subcommand=args.subcommand)
    for key in ("p", "q", "M", "N"):
        val = getattr(args, key, None)
        if val is None:
            val = base.get(key)
        if val is not None:
            setattr(cfg, key, parse_int_list(val) if not isinstance(val, list)
                    else [int(v) for v in val])
    xval = args.X if args.X is not None else base.get("X")
    if xval is not None:
        cfg.X = (parse_float_list(xval) if not isinstance(xval, list)
                 else [float(v) for v in xval])
    for key in ("gamma_max", "u_max", "out", "format", "tol"):
        val = getattr(args, key, None)
        if val is None:
            val = base.get(key)
        if val is not None:
            setattr(cfg, key, val)
    jobs = getattr(args, "jobs", None)
    if jobs is None:
        jobs = base.get("jobs")
    if jobs is None:
        jobs = int(os.environ.get("EXPSUM_JOBS", "1"))
    cfg.jobs = int(jobs)
    cfg.quick = bool(getattr(args, "quick", False) or base.get("quick", False))
    cfg.self_test = bool(getattr(args, "self_test", False))
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    t0 = perf_counter()
    try:
        cfg = _build_config(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        code = RUNNERS[cfg.subcommand](cfg)
    except (AssertionError, ValueError, ArithmeticError) as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"[time] total: {perf_counter() - t0:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
