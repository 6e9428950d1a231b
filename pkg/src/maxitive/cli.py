"""Command-line front end.

    maxitive eval SCENARIO --k 1 --event b,c
    maxitive chebyshev SCENARIO --k 1 --r 0.5,1,3
    maxitive lln SCENARIO --theorem 3.3 --psi-family power --psi-delta 1
    maxitive converge SCENARIO --eps 0.05 --horizon 1000

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .convergence import (
    DEFAULT_EPS_GRID,
    borel_cantelli_check,
    converges_ae,
    converges_in_measure,
    deviation_trajectory,
    limsup_masks,
)
from .core import Event, MaxitiveError, chebyshev_check, expectation_sup, induced_measure, variance_sup
from .lln import DEFAULT_HORIZON, PsiFunction, average_sequence, deviation_sequence, run_lln
from .scenario import SeededUniformGenerator, parse_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MARGIN_FLOOR = -1e-12
TABLE_PREVIEW = 40


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# report document


def _cell(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if not math.isfinite(v):
            raise MaxitiveError(f"non-finite value {v} in report")
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _cell(obj)


def new_document(args, digest: str) -> dict:
    doc = {
        "command": args.argv,
        "scenario_digest": digest,
        "tool_version": __version__,
        "results": {},
        "tables": {},
        "verdicts": {},
        "warnings": [],
    }
    if not args.no_timestamp:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


def add_table(doc: dict, name: str, columns: list[str], rows) -> None:
    doc["tables"][name] = {"columns": columns, "rows": [[_cell(v) for v in row] for row in rows]}


def render(doc: dict, fmt: str) -> str:
    doc = _clean(doc)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(doc)
    return _render_table(doc)


def _render_csv(doc: dict) -> str:
    buf = io.StringIO()
    for key in ("command", "scenario_digest", "tool_version", "timestamp"):
        if key in doc:
            value = " ".join(doc[key]) if key == "command" else doc[key]
            buf.write(f"# {key}: {value}\n")
    for name, verdict in doc["verdicts"].items():
        decided = verdict.get("decided", verdict.get("satisfied")) if isinstance(verdict, dict) else verdict
        buf.write(f"# verdict {name}: {decided}\n")
    for w in doc["warnings"]:
        buf.write(f"# warning: {w}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for name, table in doc["tables"].items():
        writer.writerow(["table", *table["columns"]])
        for row in table["rows"]:
            writer.writerow([name, *(_fmt(v) for v in row)])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _preview(rows: list, margin_col: int | None) -> list:
    if len(rows) <= TABLE_PREVIEW:
        return list(enumerate(rows))
    keep = set(range(10)) | set(range(len(rows) - 10, len(rows)))
    if margin_col is not None:
        keep |= {i for i, r in enumerate(rows) if isinstance(r[margin_col], float) and r[margin_col] < MARGIN_FLOOR}
    return [(i, rows[i]) for i in sorted(keep)]


def _render_table(doc: dict) -> str:
    out = [f"maxitive {doc['tool_version']}  scenario {doc['scenario_digest'][:12]}"]
    for key, value in doc["results"].items():
        out.append(f"  {key}: {value}")
    for name, verdict in doc["verdicts"].items():
        if isinstance(verdict, dict):
            decided = verdict.get("decided", verdict.get("satisfied"))
            extra = ""
            if verdict.get("witness"):
                wit = verdict["witness"]
                extra = f"  (witness {wit['outcome']} at n={wit['n']}, deviation {wit['value']:.6g})"
            out.append(f"  {name}: {decided}{extra}")
        else:
            out.append(f"  {name}: {verdict}")
    for w in doc["warnings"]:
        out.append(f"  warning: {w}")
    for name, table in doc["tables"].items():
        cols = table["columns"]
        rows = table["rows"]
        margin_col = cols.index("margin") if "margin" in cols else None
        shown = _preview(rows, margin_col)
        text = [[_fmt_human(v) for v in r] for _, r in shown]
        widths = [max([len(c)] + [len(r[j]) for r in text]) for j, c in enumerate(cols)]
        out.append("")
        out.append(f"[{name}]" + (f"  showing {len(shown)} of {len(rows)} rows" if len(shown) < len(rows) else ""))
        out.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        prev = -1
        for (i, _), r in zip(shown, text):
            if i != prev + 1:
                out.append("...")
            out.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
            prev = i
    return "\n".join(out) + "\n"


def _fmt_human(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    return str(v)


# ---------------------------------------------------------------------------
# argument helpers


def _float_list(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _load(args):
    try:
        with open(args.scenario, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read scenario: {exc}")
    scenario = parse_scenario(raw.decode("utf-8"))
    warnings = []
    if args.seed is not None:
        if isinstance(scenario.generator, SeededUniformGenerator):
            scenario = dataclasses.replace(scenario, generator=scenario.generator.with_seed(args.seed))
        else:
            warnings.append("--seed ignored: generator is not seeded-uniform")
    return scenario, hashlib.sha256(raw).hexdigest(), warnings


def _horizon(args, scenario) -> int:
    return args.horizon or scenario.horizon or DEFAULT_HORIZON


def _eps(args, scenario) -> tuple[float, ...]:
    grid = tuple(args.eps or scenario.eps_grid or DEFAULT_EPS_GRID)
    if any(not e > 0 for e in grid):
        raise UsageError("--eps values must be positive")
    return grid


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> tuple[dict, int]:
    scenario, digest, warnings = _load(args)
    doc = new_document(args, digest)
    doc["warnings"] += warnings
    if args.k is None and args.event is None:
        raise UsageError("eval needs --k and/or --event")
    dist = scenario.distribution
    rows = []
    if args.k is not None:
        x = scenario.variable(args.k)
        e, v = expectation_sup(x, dist), variance_sup(x, dist)
        doc["results"].update({"k": args.k, "E_sup": e, "Var_sup": v})
        rows += [["E_sup", e], ["Var_sup", v]]
    if args.event is not None:
        labels = [t.strip() for t in args.event.split(",") if t.strip()]
        unknown = [t for t in labels if t not in scenario.space]
        if unknown:
            raise UsageError(f"unknown outcome(s) in --event: {unknown}")
        ev = Event.of(scenario.space, labels)
        p = induced_measure(dist, ev)
        doc["results"].update({"event": list(ev.ordered()), "P": p})
        rows.append(["P", p])
    add_table(doc, "values", ["quantity", "value"], rows)
    return doc, EXIT_OK


def cmd_chebyshev(args) -> tuple[dict, int]:
    scenario, digest, warnings = _load(args)
    doc = new_document(args, digest)
    doc["warnings"] += warnings
    r_grid = args.r or [0.1, 0.5, 1.0, 3.0, 10.0]
    if any(not r > 0 for r in r_grid):
        raise UsageError("--r values must be positive")
    x = scenario.variable(args.k)
    rows = []
    for r in r_grid:
        actual, bound = chebyshev_check(x, scenario.distribution, r)
        rows.append([r, actual, bound, bound - actual])
    add_table(doc, "chebyshev", ["r", "actual", "bound", "margin"], rows)
    worst = min(row[3] for row in rows)
    ok = worst >= MARGIN_FLOOR
    doc["results"].update({"k": args.k, "min_margin": worst})
    doc["verdicts"]["chebyshev"] = "holds" if ok else "fails"
    return doc, EXIT_OK if ok else EXIT_FAIL


def _psi_override(args, scenario):
    base = scenario.lln.psi
    if args.psi_family is None and args.psi_delta is None and args.psi_scale is None:
        return base
    family = args.psi_family or (base.family if base else "power")
    if family == "table":
        raise UsageError("table Psi can only be given in the scenario file")
    delta = args.psi_delta if args.psi_delta is not None else (base.delta if base else 1.0)
    scale = args.psi_scale if args.psi_scale is not None else (base.scale if base else 1.0)
    return PsiFunction(family, delta=delta, scale=scale)


def cmd_lln(args) -> tuple[dict, int]:
    scenario, digest, warnings = _load(args)
    doc = new_document(args, digest)
    doc["warnings"] += warnings
    theorem = args.theorem or scenario.lln.theorem
    if theorem is None:
        raise UsageError("no theorem selected: set lln.theorem in the scenario or pass --theorem")
    eps_grid = _eps(args, scenario)
    report = run_lln(
        scenario,
        theorem,
        psi=_psi_override(args, scenario),
        delta=args.delta,
        C=args.C,
        horizon=_horizon(args, scenario),
        eps_grid=eps_grid,
        force=args.force,
        per_k=args.per_k,
    )
    hyp = report.hypothesis
    doc["results"].update(
        {
            "theorem": report.theorem,
            "horizon": report.horizon,
            "C": report.C,
            "violations": report.violations,
            "contraction_ok": report.contraction_ok,
            "rate_bound_ok": report.rate_bound_ok,
            "forced": report.forced,
        }
    )
    doc["verdicts"]["hypothesis"] = hyp.as_dict()
    doc["verdicts"]["in_measure"] = report.in_measure.as_dict()
    doc["verdicts"]["almost_everywhere"] = report.ae.as_dict()
    remark = report.remark
    doc["results"]["mu_remark"] = {
        "mu": remark.mu,
        "satisfied": remark.satisfied,
        "nonnegative": remark.nonnegative,
        "proportional": remark.proportional,
    }
    if report.mu_verdict is not None:
        doc["verdicts"]["mean_to_mu"] = report.mu_verdict.as_dict()
        doc["results"]["mu_gap_at_horizon"] = report.mu_gap

    rows = []
    for eps in report.eps_grid:
        measured, bound = report.measured[eps], report.bound[eps]
        for i in range(report.horizon):
            rows.append([i + 1, eps, measured[i], bound[i], bound[i] - measured[i]])
    add_table(doc, "curve", ["n", "eps", "measured", "bound", "margin"], rows)
    labels = list(report.deviations)
    add_table(
        doc,
        "deviation",
        ["n", *labels],
        ([i + 1, *(report.deviations[o][i] for o in labels)] for i in range(report.horizon)),
    )

    if hyp.satisfied != "yes":
        if report.forced:
            doc["warnings"].append(f"hypothesis {hyp.satisfied}; overridden by --force")
        else:
            doc["warnings"].append(f"hypothesis {hyp.satisfied}; rerun with --force to override")
    for v in report.verdicts:
        if v.decided == "undecided":
            doc["warnings"].append(f"{v.kind} verdict undecided at horizon {v.horizon}")
    return doc, EXIT_OK if report.ok else EXIT_FAIL


def cmd_converge(args) -> tuple[dict, int]:
    scenario, digest, warnings = _load(args)
    doc = new_document(args, digest)
    doc["warnings"] += warnings
    N = _horizon(args, scenario)
    if N < 2:
        raise UsageError("converge needs a horizon of at least 2")
    eps_grid = _eps(args, scenario)
    dist = scenario.distribution
    seq = scenario.sequence()
    if args.sequence == "deviation":
        target_seq, limit = deviation_sequence(seq, dist), 0.0
    elif args.sequence == "average":
        target_seq, limit = average_sequence(seq), expectation_sup(scenario.variable(1), dist)
    else:
        target_seq, limit = seq, args.limit
    doc["results"].update({"sequence": args.sequence, "limit": limit, "horizon": N})

    rows, limsup_rows, bc = [], [], {}
    for eps in eps_grid:
        traj = deviation_trajectory(target_seq, limit, eps, N)
        report = borel_cantelli_check(traj, dist)
        bc[repr(eps)] = report.as_dict()
        for i in range(N):
            rows.append([i + 1, eps, report.measures[i], report.tail_sups[i], report.limsup_measures[i]])
        unions = limsup_masks(traj)
        for m in range(1, N + 1):
            if m == 1 or not np.array_equal(unions[m - 1], unions[m - 2]):
                members = Event.from_mask(scenario.space, unions[m - 1]).ordered()
                limsup_rows.append([eps, m, " ".join(members)])
    add_table(doc, "trajectory", ["n", "eps", "measure", "tail_sup", "limsup_measure"], rows)
    add_table(doc, "limsup", ["eps", "from_m", "members"], limsup_rows)
    doc["results"]["borel_cantelli"] = bc
    in_measure = converges_in_measure(target_seq, dist, limit, eps_grid, N)
    ae = converges_ae(target_seq, dist, limit, N)
    doc["verdicts"]["in_measure"] = in_measure.as_dict()
    doc["verdicts"]["almost_everywhere"] = ae.as_dict()
    implication_ok = not (in_measure.decided == "holds" and ae.decided == "fails")
    bc_ok = all(r["inequality_holds"] for r in bc.values())
    doc["results"]["implication_consistent"] = implication_ok
    for v in (in_measure, ae):
        if v.decided == "undecided":
            doc["warnings"].append(f"{v.kind} verdict undecided at horizon {N}")
    return doc, EXIT_OK if (implication_ok and bc_ok) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario file (YAML or JSON)")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")
    common.add_argument("--horizon", type=_positive_int, help="override run.horizon")
    common.add_argument("--eps", type=_float_list, help="comma-separated epsilon grid")
    common.add_argument("--seed", type=_u64, help="override generator.seed (seeded-uniform only)")
    common.add_argument("--force", action="store_true", help="run even if the hypothesis is not satisfied")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")

    parser = argparse.ArgumentParser(prog="maxitive", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="sup-moments of X_k and measures of events")
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--event", help='comma-separated outcome labels ("" for the empty event)')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("chebyshev", parents=[common], help="possibilistic Chebyshev sweep over r")
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--r", type=_float_list, help="comma-separated radii (default 0.1,0.5,1,3,10)")
    p.set_defaults(func=cmd_chebyshev)

    p = sub.add_parser("lln", parents=[common], help="verify a strong law of large numbers")
    p.add_argument("--theorem", choices=("3.3", "3.4", "3.5"))
    p.add_argument("--psi-family", choices=("power", "log-power"))
    p.add_argument("--psi-delta", type=float)
    p.add_argument("--psi-scale", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--per-k", action="store_true", help="also check the per-index sufficient condition")
    p.set_defaults(func=cmd_lln)

    p = sub.add_parser("converge", parents=[common], help="convergence and Borel-Cantelli diagnostics")
    p.add_argument(
        "--sequence",
        choices=("deviation", "average", "raw"),
        default="deviation",
        help="deviation: Y_n -> 0; average: M_n/n -> E_sup(X_1); raw: X_n -> --limit",
    )
    p.add_argument("--limit", type=float, default=0.0)
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        doc, code = args.func(args)
    except (UsageError, MaxitiveError) as exc:
        print(f"maxitive {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        sys.stdout.write(render(doc, args.format))
        sys.stdout.flush()
    except BrokenPipeError:
        sys.stderr.close()
    return code


if __name__ == "__main__":
    raise SystemExit(main())
