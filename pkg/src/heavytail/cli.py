"""Command-line front end: ``check``, ``sweep``, ``tails`` and ``report``.

Exit status: 0 holds, 1 usage or numeric error, 2 violated, 3 inconclusive.
Reports are JSON (fixed schema) or CSV, with floats written to 17
significant digits.  Same arguments and seed give byte-identical output,
whatever the worker count.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import _rng
from .concentration import (default_t_grid, empirical_tail, moment_bound_thm41, tail_envelope,
                            weight_norm_wp)
from .errors import HeavyTailError, ParameterError, PreconditionError
from .fields import GALLERY, constant_field, exp_linear_field, gallery_field
from .inequalities import (check_brascamp_lieb_ext_thm23, check_eq217, check_eq218,
                           check_gross_lsi_eq39, check_hardy_cauchy, check_moment_shift_eq211,
                           check_moment_shift_eq212, check_reversed_cor32,
                           check_reversed_lowbeta_eq35, check_RW_poincare_thm24,
                           check_transfer_prop33, check_weighted_lsi_thm34,
                           check_weighted_poincare_thm31, optimality_lower_bound, prop33_constants)
from .infconv import check_maurey_cor22, check_thm21
from .integrate import IntegrationConfig
from .isoperimetry import (ParametricSet, check_cheeger_eq55, check_cor52_structure,
                           check_perimeter_bound_eq56, check_universal_poincare_thm51)
from .measures import (CauchyParams, cauchy_measure, convex_measure, exponential_measure,
                       gaussian_measure, rescaled_density, smoothed_norm_potential)
from .reports import HOLDS, INCONCLUSIVE, VIOLATED, fmt_float, to_json

__all__ = ["main", "build_parser", "run_check", "run_sweep", "run_tails", "run_report",
           "CHECKS", "parse_field", "parse_beta_grid"]

EXIT_HOLDS, EXIT_ERROR, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3
SKIPPED, ERROR = "skipped", "error"

REPORT_COLUMNS = ["id", "n", "beta", "params", "g", "method", "lhs", "lhs_err", "rhs", "rhs_err",
                  "constant", "ratio", "tol", "seed", "samples", "verdict", "runtime_ms", "error"]
TAIL_COLUMNS = ["t", "bound", "empirical", "stderr", "branch", "verdict"]


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_field(spec, n, scale=1.0, shift=0.0):
    """A gallery name, ``const:<c>`` or ``explin:<s>``, then ``scale * g + shift``."""
    if spec.startswith("const:"):
        g = constant_field(float(spec.split(":", 1)[1]))
    elif spec.startswith("explin:"):
        g = exp_linear_field(float(spec.split(":", 1)[1]), n)
    else:
        g = gallery_field(spec, n)
    if scale != 1.0 or shift != 0.0:
        g = g.affine(scale, shift)
    return g


def parse_beta_grid(text, n):
    """Comma list of numbers or expressions in ``n``: ``n``, ``2n``, ``n+1``, ``1.5``."""
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        expr = tok.replace(" ", "")
        if "n" in expr:
            head, _, tail = expr.partition("n")
            coef = float(head) if head not in ("", "+") else 1.0
            add = float(tail) if tail else 0.0
            out.append(coef * n + add)
        else:
            out.append(float(expr))
    return out


def _int_list(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _field_list(text):
    if text.strip() == "all":
        return list(GALLERY)
    return [t.strip() for t in text.split(",") if t.strip()]


def _config(args, workers=None):
    return IntegrationConfig(method=args.method, samples=int(args.samples), seed=int(args.seed),
                             workers=workers if workers is not None else args.workers)


def _convex(args, n, beta):
    if args.measure in (None, "cauchy"):
        return cauchy_measure(CauchyParams(n, beta))
    if args.measure == "smoothnorm":
        return convex_measure(smoothed_norm_potential(n), beta, n, label="smoothnorm")
    raise ParameterError(f"measure {args.measure!r} is not of the form V^-beta")


def _logconcave(args, n):
    if args.measure in (None, "gaussian"):
        return gaussian_measure(n)
    if args.measure == "exponential":
        if n != 1:
            raise ParameterError("the exponential measure lives on the half-line (n = 1)")
        return exponential_measure(args.lam)
    raise ParameterError(f"measure {args.measure!r} is not log-concave")


def _parametric_set(args, n):
    if args.set == "ball":
        return ParametricSet.ball(args.param)
    return ParametricSet.half_space(np.eye(n)[0], args.param)


# ---------------------------------------------------------------------------
# checker registry: id -> callable(args, n, beta, g_name, cfg) -> report


def _g(args, name, n):
    return parse_field(name, n, args.g_scale, args.g_shift)


def _cauchy_check(fn):
    return lambda a, n, b, g, cfg: fn(CauchyParams(n, b), _g(a, g, n), cfg)


def _prop33(a, n, b, g, cfg):
    ca, cb = prop33_constants(b)
    return check_transfer_prop33(ca, cb, cauchy_measure(CauchyParams(n, b)), _g(a, g, n), cfg)


def _eq39(a, n, b, g, cfg):
    if g.startswith("explin:"):
        return check_gross_lsi_eq39(None, n, cfg, s=float(g.split(":", 1)[1]))
    return check_gross_lsi_eq39(_g(a, g, n), n, cfg)


def _thm41(a, n, b, g, cfg):
    p = int(a.p)
    if p < 2 or p % 2:
        raise ParameterError("the moment order p must be an even integer >= 2")
    params = CauchyParams(n, b)
    norm = weight_norm_wp(params, p // 2, scale15=True)
    return moment_bound_thm41(_g(a, g, n), rescaled_density(params), norm, p, "poincare", cfg)


def _hardy(a, n, b, g, cfg):
    return check_hardy_cauchy(b)


def _optimality(a, n, b, g, cfg):
    return optimality_lower_bound(CauchyParams(n, b), quadrature=True, cfg=cfg).report()


CHECKS = {
    "thm31": _cauchy_check(check_weighted_poincare_thm31),
    "cor32": _cauchy_check(check_reversed_cor32),
    "eq35": _cauchy_check(check_reversed_lowbeta_eq35),
    "prop33": _prop33,
    "thm34": _cauchy_check(check_weighted_lsi_thm34),
    "eq39": _eq39,
    "thm23": lambda a, n, b, g, cfg: check_brascamp_lieb_ext_thm23(_convex(a, n, b), _g(a, g, n), cfg),
    "eq211": lambda a, n, b, g, cfg: check_moment_shift_eq211(_convex(a, n, b), _g(a, g, n), cfg),
    "eq212": lambda a, n, b, g, cfg: check_moment_shift_eq212(_convex(a, n, b), _g(a, g, n), cfg=cfg),
    "thm24": lambda a, n, b, g, cfg: check_RW_poincare_thm24(_logconcave(a, n), b, _g(a, g, n), cfg),
    "eq217": lambda a, n, b, g, cfg: check_eq217(exponential_measure(a.lam), _g(a, g, 1), cfg),
    "eq218": lambda a, n, b, g, cfg: check_eq218(n, _g(a, g, n), cfg),
    "thm41": _thm41,
    "thm21": lambda a, n, b, g, cfg: check_thm21(_convex(a, n, b), None, _g(a, g, n), cfg),
    "cor22": lambda a, n, b, g, cfg: check_maurey_cor22(_logconcave(a, n), _g(a, g, n), cfg),
    "eq55": lambda a, n, b, g, cfg: check_cheeger_eq55(_parametric_set(a, n), _convex(a, n, b), a.r, cfg),
    "eq56": lambda a, n, b, g, cfg: check_perimeter_bound_eq56(_parametric_set(a, n), _convex(a, n, b),
                                                               a.r, cfg),
    "thm51": lambda a, n, b, g, cfg: check_universal_poincare_thm51(_convex(a, n, b), _g(a, g, n), cfg),
    "cor52": lambda a, n, b, g, cfg: check_cor52_structure(_convex(a, n, b), _g(a, g, n), cfg),
    "hardy": _hardy,
    "lower_bound": _optimality,
}
TAIL_IDS = ("cor44",)
NO_BETA = ("eq39", "eq217", "eq218", "cor22")


# ---------------------------------------------------------------------------
# output


def _report_dict(report):
    d = report.to_dict()
    if "verdict" not in d:
        d["verdict"] = "reported"
    return d


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return "" if v is None else str(v)


def _row(d, error=None):
    params = dict(d.get("params", {}))
    n, beta = params.pop("n", None), params.pop("beta", None)
    lhs, rhs = d.get("lhs") or {}, d.get("rhs") or {}
    return {
        "id": d.get("id", ""), "n": "" if n is None else str(n),
        "beta": fmt_float(beta) if isinstance(beta, float) else ("" if beta is None else str(beta)),
        "params": ";".join(f"{k}={_cell(v)}" for k, v in sorted(params.items())),
        "g": d.get("g", ""), "method": d.get("method", ""),
        "lhs": fmt_float(lhs.get("value")), "lhs_err": fmt_float(lhs.get("err")),
        "rhs": fmt_float(rhs.get("value")), "rhs_err": fmt_float(rhs.get("err")),
        "constant": fmt_float(d.get("constant")), "ratio": fmt_float(d.get("ratio")),
        "tol": fmt_float(d.get("tol")),
        "seed": "" if d.get("seed") is None else str(d["seed"]),
        "samples": "" if d.get("samples") is None else str(d["samples"]),
        "verdict": d.get("verdict", ""), "runtime_ms": fmt_float(d.get("runtime_ms")),
        "error": error or "",
    }


def _csv(columns, rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    return buf.getvalue()


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _exit_for(verdicts):
    verdicts = list(verdicts)
    if VIOLATED in verdicts:
        return EXIT_VIOLATED
    if INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    if ERROR in verdicts:
        return EXIT_ERROR
    return EXIT_HOLDS


def _timed(fn, timing):
    start = time.perf_counter()
    report = fn()
    if timing and hasattr(report, "with_runtime"):
        report = report.with_runtime((time.perf_counter() - start) * 1e3)
    return report


# ---------------------------------------------------------------------------
# commands


def run_check(args):
    """One checker; returns the exit status."""
    if args.inequality in TAIL_IDS:
        return run_tails(args)
    if args.inequality not in CHECKS:
        raise ParameterError(f"unknown inequality {args.inequality!r}; choose from "
                             f"{', '.join(sorted(CHECKS) + list(TAIL_IDS))}")
    n, beta = int(args.n), (float(args.beta) if args.beta is not None else None)
    if n < 1:
        raise ParameterError("n must be a positive integer")
    if beta is None and args.inequality not in NO_BETA:
        raise ParameterError(f"{args.inequality} needs --beta")
    cfg = _config(args)
    fn = CHECKS[args.inequality]
    report = _timed(lambda: fn(args, n, beta, args.g, cfg), args.timing)
    if args.tol is not None and hasattr(report, "with_tolerance"):
        report = report.with_tolerance(args.tol)
    d = _report_dict(report)
    if args.format == "csv":
        _emit(_csv(REPORT_COLUMNS, [_row(d)]), args.output)
    else:
        _emit(to_json(d), args.output)
    return _exit_for([d["verdict"]])


# parameters a check ignores collapse to one sweep cell
FIELD_FREE = frozenset({"hardy", "lower_bound", "eq55", "eq56"})
DIM_FREE = frozenset({"hardy", "eq217"})


def _sweep_cells(args):
    ids = [t.strip() for t in args.inequality.split(",") if t.strip()]
    cells = []
    for ident in ids:
        if ident not in CHECKS:
            raise ParameterError(f"unknown inequality {ident!r}")
        fields = [""] if ident in FIELD_FREE else _field_list(args.g)
        for n in _int_list(args.n):
            betas = [0.0] if ident in NO_BETA else parse_beta_grid(args.beta, n)
            for beta in betas:
                for g in fields:
                    cells.append((ident, 1 if ident in DIM_FREE else n, beta, g))
    return sorted(set(cells))


def run_sweep(args):
    """Grid of checks, one CSV (or JSON list) row per (inequality, n, beta, g)."""
    cells = _sweep_cells(args)
    parallel = _rng.worker_count(args.workers) > 1 and len(cells) > 1
    cfg = _config(args, workers=1 if parallel else None)

    def run(cell):
        ident, n, beta, g = cell
        params = {"n": n} if ident in NO_BETA else {"n": n, "beta": beta}
        base = {"id": ident, "params": params, "g": g}
        try:
            report = _timed(lambda: CHECKS[ident](args, n, beta, g, cfg), args.timing)
            if args.tol is not None and hasattr(report, "with_tolerance"):
                report = report.with_tolerance(args.tol)
            return _report_dict(report), None
        except ParameterError as exc:
            return {**base, "verdict": SKIPPED}, str(exc)
        except PreconditionError as exc:
            # the cell lies outside the check's hypotheses
            return {**base, "verdict": SKIPPED}, f"precondition: {exc}"
        except HeavyTailError as exc:
            return {**base, "verdict": ERROR}, str(exc)

    results = _rng.ordered_map(run, cells, args.workers if parallel else 1)
    if args.format == "json":
        _emit(to_json([{**d, "error": e} if e else d for d, e in results]), args.output)
    else:
        _emit(_csv(REPORT_COLUMNS, [_row(d, e) for d, e in results]), args.output)
    return _exit_for(d["verdict"] for d, _ in results)


def run_tails(args):
    """Empirical tails of a 1-Lipschitz field under the rescaled Cauchy law."""
    n, beta = int(args.n), float(args.beta)
    params = CauchyParams(n, beta)
    env = tail_envelope("cauchy_three_regime", n=n, beta=beta)
    f = _g(args, args.g, n)
    grid = default_t_grid(env, count=int(args.t_count))
    rep = empirical_tail(f, rescaled_density(params), env, grid, int(args.samples), int(args.seed),
                         args.workers)
    branches = env.branch(np.array([r.t for r in rep.rows]))
    if args.format == "json":
        d = {"id": "cor44",
             "params": {"n": n, "beta": beta, "k": env.k, "p": env.p, "t0": env.t0, "t1": env.t1},
             "g": f.name, "samples": rep.samples, "seed": rep.seed, "mean": rep.mean,
             "mean_stderr": rep.mean_stderr, "verdict": rep.verdict,
             "rows": [{"t": r.t, "bound": r.bound, "empirical": r.empirical, "stderr": r.stderr,
                       "branch": int(b), "verdict": r.verdict} for r, b in zip(rep.rows, branches)]}
        _emit(to_json(d), args.output)
    else:
        rows = [{"t": fmt_float(r.t), "bound": fmt_float(r.bound), "empirical": fmt_float(r.empirical),
                 "stderr": fmt_float(r.stderr), "branch": str(int(b)), "verdict": r.verdict}
                for r, b in zip(rep.rows, branches)]
        _emit(_csv(TAIL_COLUMNS, rows), args.output)
    return _exit_for([rep.verdict])


def _load(path):
    """Records from one input file: report dicts, or tail rows tagged as such."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        data = json.loads(text)
        items = data if isinstance(data, list) else [data]
        reports, tails = [], []
        for d in items:
            if not isinstance(d, dict) or "id" not in d:
                raise ValueError(f"{path}: not a report")
            if "rows" in d:
                tails.append([{k: _num(v) for k, v in r.items()} for r in d["rows"]])
            else:
                reports.append(d)
        return reports, tails
    rows = list(csv.DictReader(io.StringIO(text)))
    header = rows[0].keys() if rows else next(csv.reader(io.StringIO(text)), [])
    if {"t", "bound", "empirical"} <= set(header):
        return [], [[{k: _num(v) for k, v in r.items()} for r in rows]]
    if {"id", "verdict"} <= set(header):
        return [{"id": r["id"], "verdict": r["verdict"], "ratio": _num(r.get("ratio", ""))}
                for r in rows], []
    raise ValueError(f"{path}: unrecognized CSV header")


def _num(v):
    if isinstance(v, (int, float)) or v is None:
        return v
    try:
        return float(v)
    except (TypeError, ValueError):
        return v


def run_report(args):
    """Summary of report files: counts by verdict per inequality and worst ratios."""
    by_id, counts, tail_summaries = {}, {}, []
    for path in args.paths:
        reports, tails = _load(path)
        for d in reports:
            v = d.get("verdict", "")
            counts[v] = counts.get(v, 0) + 1
            entry = by_id.setdefault(d["id"], {"counts": {}, "worst_ratio": None})
            entry["counts"][v] = entry["counts"].get(v, 0) + 1
            r = _num(d.get("ratio"))
            if isinstance(r, float) and math.isfinite(r) and v not in (SKIPPED, ERROR):
                w = entry["worst_ratio"]
                entry["worst_ratio"] = r if w is None else max(w, r)
        for k, rows in enumerate(tails):
            viol = sum(1 for r in rows if r.get("verdict") == VIOLATED)
            tail_summaries.append({"source": str(path), "rows": len(rows), "violated": viol,
                                   "worst_fraction": max((r["empirical"] / r["bound"] for r in rows
                                                          if r["bound"] > 0), default=None)})
            if viol == 0:
                counts[HOLDS] = counts.get(HOLDS, 0) + 1
            else:
                counts[VIOLATED] = counts.get(VIOLATED, 0) + 1
            if args.plot_dir:
                out = Path(args.plot_dir)
                out.mkdir(parents=True, exist_ok=True)
                stem = Path(path).stem + (f"_{k}" if len(tails) > 1 else "")
                for col in ("bound", "empirical"):
                    lines = [f"{fmt_float(r['t'])} {fmt_float(r[col])}" for r in rows]
                    (out / f"{stem}.{col}.dat").write_text("# t " + col + "\n" + "\n".join(lines) + "\n")
    summary = {"files": len(args.paths), "counts": dict(sorted(counts.items())),
               "by_id": {k: by_id[k] for k in sorted(by_id)}, "tails": tail_summaries}
    _emit(to_json(summary), args.output)
    return EXIT_HOLDS


# ---------------------------------------------------------------------------
# entry point


def _common(p):
    p.add_argument("--method", choices=("auto", "quad", "mc"), default="auto")
    p.add_argument("--samples", type=lambda s: int(float(s)), default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=None, help="override the relative tolerance")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (capped by HEAVYTAIL_THREADS)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--output", default=None, help="output file (default: stdout)")
    p.add_argument("--timing", action="store_true", help="record runtime_ms (breaks byte-identity)")
    p.add_argument("--g-scale", type=float, default=1.0, help="use g_scale * g + g_shift")
    p.add_argument("--g-shift", type=float, default=0.0)
    p.add_argument("--measure", choices=("cauchy", "smoothnorm", "gaussian", "exponential"),
                   default=None)
    p.add_argument("--lam", type=float, default=1.0, help="rate of the exponential measure")
    p.add_argument("--set", choices=("half_space", "ball"), default="half_space")
    p.add_argument("--param", type=float, default=0.0, help="half-space offset or ball radius")
    p.add_argument("--r", type=float, default=None, help="radius r (default: 2/3-quantile)")
    p.add_argument("--p", type=int, default=4, help="moment order for thm41")
    p.add_argument("--t-count", type=int, default=20, help="t-grid size for tails")


def build_parser():
    parser = argparse.ArgumentParser(prog="heavytail",
                                     description="Numerical checks of weighted functional "
                                                 "inequalities for heavy-tailed measures.")
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="run one checker")
    check.add_argument("inequality")
    check.add_argument("--n", type=int, default=1)
    check.add_argument("--beta", type=float, default=None)
    check.add_argument("--g", default="inv1px2")
    _common(check)
    sweep = sub.add_parser("sweep", help="run a checker over a parameter grid")
    sweep.add_argument("inequality", help="one id or a comma list")
    sweep.add_argument("--n", default="1")
    sweep.add_argument("--beta", default="n", help="comma list; may use n, e.g. n,n+1,2n")
    sweep.add_argument("--g", default="all", help="comma list of fields or 'all'")
    _common(sweep)
    tails = sub.add_parser("tails", help="empirical tails against the three-regime envelope")
    tails.add_argument("--n", type=int, required=True)
    tails.add_argument("--beta", type=float, required=True)
    tails.add_argument("--g", default="linear")
    _common(tails)
    report = sub.add_parser("report", help="summarize report files")
    report.add_argument("paths", nargs="+")
    report.add_argument("--output", default=None)
    report.add_argument("--plot-dir", default=None, help="write two-column plot data here")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", None) is None and args.command != "report":
        args.format = "csv" if args.command in ("sweep", "tails") or (
            args.command == "check" and args.inequality in TAIL_IDS) else "json"
    try:
        if args.command == "check":
            return run_check(args)
        if args.command == "sweep":
            return run_sweep(args)
        if args.command == "tails":
            return run_tails(args)
        return run_report(args)
    except (HeavyTailError, ValueError, OSError) as exc:
        print(f"heavytail: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
