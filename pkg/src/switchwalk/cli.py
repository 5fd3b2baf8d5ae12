"""Command-line interface.

Subcommands cover the exact tier (probability tables, influence profiles,
identity checks), the brute-force oracle gate, timeline traces, and the
Monte Carlo experiments.  Reports go to standard output (or ``--out``) as
CSV or JSON; exit codes: 0 success, 1 usage/validation error, 2 a
registered check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import exact
from .dynamics import naive_timeline, positivity_timeline, sample_clocks, timeline_trace
from .experiments import (
    COLUMNS,
    EstimateRow,
    _meta,
    alpha_tail_report,
    eps_preset,
    influence_profile,
    kappa_experiment,
    noise_sensitivity_curve,
    phi_experiment,
    resolve_seed,
    u_abs_v_experiment,
)

__all__ = ["run", "entry"]

TRACE_COLUMNS = ("event_index", "time", "bit", "new_value", "status_after")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as exit code 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _render(fmt: str, meta: dict, rows: list[dict], columns) -> str:
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _emit(args, meta: dict, rows: list[dict], columns=COLUMNS) -> None:
    text = _render(args.format, meta, rows, columns)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_rows(report) -> list[dict]:
    return [r.as_dict() for r in report.rows]


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of numbers, got {text!r}")


# -- exact tier ---------------------------------------------------------------------


def _cmd_exact(args) -> int:
    meta = {**_meta(0), "command": "exact", "what": args.what}
    if args.what == "pn":
        if args.n < 1:
            raise ValueError("n must be >= 1")
        rows = []
        for i in range(1, args.n + 1):
            p = exact.stay_positive_prob(i)
            rows.append(
                EstimateRow("exact.pn", float(p), n=i, exact=str(p)).as_dict()
            )
        _emit(args, meta, rows)
        return 0
    if args.what == "influence":
        if not 1 <= args.n <= exact.EXACT_TIER_MAX_N:
            raise ValueError(
                f"exact influence profiles cover 1 <= n <= {exact.EXACT_TIER_MAX_N}"
            )
        report = influence_profile(args.n, mode="exact")
        _emit(args, {**meta, **report.meta}, _report_rows(report))
        return 0
    return _exact_checks(args, meta)


def _exact_checks(args, meta: dict) -> int:
    """Zero-tolerance identities; any violation is a check failure (exit 2)."""
    if args.n < 1:
        raise ValueError("n must be >= 1")
    n_head = min(args.n, exact.EXACT_TIER_MAX_N)
    rows = []

    def add(name: str, violations: int, **kw):
        rows.append(
            EstimateRow(name, float(violations), exact="0", **kw).as_dict()
        )

    bad = 0
    for z in range(1, 13):
        for j in range(1, 25):
            a, b = exact.reflection_pair(z, j)
            bad += a != b
    add("check.reflection", bad, n=24)

    bad = 0
    for j in range(1, 15):
        for z in range(1 + (j % 2 == 0), j + 1, 2):
            if (j + z) % 2 == 0:
                bad += exact.ballot_prob(j, z) != exact.stay_positive_endpoint_dp(j, z)
    add("check.ballot", bad, n=14)

    bad = 0
    for z in range(1, 7):
        for N in range(1, 49):
            for start in (None, 1, z, 2 * z - 1):
                bad += exact.strip_stay_prob(z, N, start) != exact.strip_stay_prob_dp(
                    z, N, start
                )
    add("check.strip", bad, n=48)

    bad = 0
    for n in range(1, n_head + 1):
        lhs = exact.influence_exact(n, 1)
        rhs = exact.stay_positive_prob(n) * 2
        bad += lhs != rhs
    add("check.influence_head", bad, n=n_head)

    bad = 0
    for n in range(2, 129):
        for x in range(1, n + 1):
            bad += not exact.chernoff_holds(n, x)
    add("check.chernoff", bad, n=128)

    _emit(args, meta, rows)
    return 2 if any(r["estimate"] for r in rows) else 0


# -- oracle gate ---------------------------------------------------------------------


def _cmd_oracle(args) -> int:
    if not 1 <= args.n <= 16:
        raise ValueError("the enumeration gate covers 1 <= n <= 16")
    master = resolve_seed(args.seed)
    meta = {**_meta(master), "command": "oracle"}
    rows = []

    bad = sum(
        exact.influence_exact(args.n, m) != exact.influence_oracle(args.n, m)
        for m in range(1, args.n + 1)
    )
    rows.append(
        EstimateRow("oracle.influence", float(bad), n=args.n, exact="0").as_dict()
    )

    bad = 0
    reps = 20
    for k in range(reps):
        clocks = sample_clocks(
            args.n, 1.0, np.random.SeedSequence(entropy=master, spawn_key=(k,))
        )
        for alpha in (0.0, 0.25):
            fast = positivity_timeline(clocks, alpha=alpha)
            slow = naive_timeline(clocks, alpha=alpha)
            ok = np.array_equal(fast.breakpoints, slow.breakpoints) and np.array_equal(
                fast.status, slow.status
            )
            bad += not ok
    rows.append(
        EstimateRow(
            "oracle.timeline", float(bad), n=args.n, trials=reps, exact="0"
        ).as_dict()
    )

    _emit(args, meta, rows)
    return 2 if any(r["estimate"] for r in rows) else 0


# -- timeline trace -------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    if args.horizon < 1.0:
        raise ValueError("horizon must be >= 1 (the timeline covers [0, 1])")
    master = resolve_seed(args.seed)
    clocks = sample_clocks(args.n, args.horizon, master)
    trace = timeline_trace(clocks, alpha=args.alpha)
    meta = {
        **_meta(master),
        "command": "simulate",
        "n": args.n,
        "alpha": args.alpha,
        "events": len(trace),
    }
    _emit(args, meta, trace, columns=TRACE_COLUMNS)
    return 0


# -- experiments -----------------------------------------------------------------------


def _cmd_ns(args) -> int:
    if args.eps is not None:
        eps_values = _float_list(args.eps)
    elif args.eps_c is not None:
        eps_values = [eps_preset(args.n, args.eps_c, args.eps_beta)]
    else:
        raise ValueError("give either --eps or --eps-c (with optional --eps-beta)")
    report = noise_sensitivity_curve(
        args.n, eps_values, args.trials, kind=args.kind,
        seed=args.seed, workers=args.workers,
    )
    _emit(args, {**report.meta, "command": "ns"}, _report_rows(report))
    return 0


def _cmd_uv(args) -> int:
    row = u_abs_v_experiment(
        args.n, args.eps, args.trials, seed=args.seed, workers=args.workers
    )
    meta = {**_meta(resolve_seed(args.seed)), "command": "uv"}
    _emit(args, meta, [row.as_dict()])
    return 0


def _cmd_kappa(args) -> int:
    report = kappa_experiment(
        args.n, args.trials, seed=args.seed, workers=args.workers
    )
    _emit(args, {**report.meta, "command": "kappa"}, _report_rows(report))
    return 0


def _cmd_phi(args) -> int:
    report = phi_experiment(
        args.n, args.alpha, args.gamma, args.trials,
        seed=args.seed, workers=args.workers,
    )
    _emit(args, {**report.meta, "command": "phi"}, _report_rows(report))
    return 0


def _cmd_tail(args) -> int:
    rows = []
    for alpha in _float_list(args.alpha):
        rows.extend(_report_rows(alpha_tail_report(args.n, alpha)))
    _emit(args, {**_meta(0), "command": "tail"}, rows)
    return 0


# -- parser ----------------------------------------------------------------------------


def _add_common(p, *, seed=True, workers=False):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="write the report to this file")
    if seed:
        p.add_argument("--seed", type=int, default=None)
    if workers:
        p.add_argument("--workers", type=int, default=0, help="0 = all cores")


def _build_parser() -> _Parser:
    top = _Parser(prog="switchwalk", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", help="exact probability tables and identity checks")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--what", choices=("pn", "influence", "checks"), default="pn")
    _add_common(p, seed=False)
    p.set_defaults(fn=_cmd_exact)

    p = sub.add_parser("oracle", help="brute-force enumeration gate (n <= 16)")
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("simulate", help="event-by-event positivity trace")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--horizon", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("ns", help="two-time endpoint decorrelation curve")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--kind", choices=("switch", "compass"), default="switch")
    p.add_argument("--eps", default=None, help="comma-separated list")
    p.add_argument("--eps-c", type=float, default=None, help="preset eps = c/n**beta")
    p.add_argument("--eps-beta", type=float, default=0.5)
    _add_common(p, workers=True)
    p.set_defaults(fn=_cmd_ns)

    p = sub.add_parser("uv", help="U/V split of the rerandomized endpoint")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    _add_common(p, workers=True)
    p.set_defaults(fn=_cmd_uv)

    p = sub.add_parser("kappa", help="occupation measure of the positive times")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    _add_common(p, workers=True)
    p.set_defaults(fn=_cmd_kappa)

    p = sub.add_parser("phi", help="normalized two-time pair energy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    _add_common(p, workers=True)
    p.set_defaults(fn=_cmd_phi)

    p = sub.add_parser("tail", help="exact endpoint tails vs both bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", default="0.6,0.75,0.9", help="comma-separated list")
    _add_common(p, seed=False)
    p.set_defaults(fn=_cmd_tail)

    return top


def run(argv) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return args.fn(args)
    except ValueError as e:
        print(f"switchwalk {args.command}: error: {e}", file=sys.stderr)
        return 1
    except RuntimeError as e:
        print(f"switchwalk {args.command}: check failed: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(run(sys.argv[1:]))
