"""Command-line front end: ``qbc cheat | concealing | simulate | verify``.

Exit codes: 0 ok, 1 verification failure, 2 parse or usage error, 3 input
invariant violation, 4 strict-mode statistical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import cheat
from .harness import CSV_COLUMNS, ExperimentSpec, reports_to_csv, run_experiment
from .protocols.closed_form import concealing_closed_form
from .qcore import QuantumError

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_INVARIANT, EXIT_STRICT = 0, 1, 2, 3, 4
Z_LIMIT = 4.0


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the master seed (unsigned 64-bit)")
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="pretty")
    common.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")
    common.add_argument("--strict", action="store_true", help="exit 4 if any |z| exceeds 4")
    common.add_argument("--threads", type=int, default=1, help="worker processes for simulations")
    common.add_argument("--filter", default=None, help="only run suites for this module (verify)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="qbc", description="Quantum bit commitment cheats, closed forms and simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cheat", parents=[common], help="overlap-optimal EPR cheat for two ensembles")
    p.add_argument("ensembles", type=Path, help="JSON file with 'ensemble0' and 'ensemble1'")

    p = sub.add_parser("concealing", parents=[common], help="closed-form concealing table")
    p.add_argument("n", nargs="+", type=int, help="odd sequence lengths")
    p.add_argument("--lambda-plus", default="1", help="positive eigenvalue, e.g. 1 or 9/10")

    p = sub.add_parser("simulate", parents=[common], help="run an experiment spec")
    p.add_argument("spec", type=Path)

    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("--fixtures", type=Path, default=None, help="fixture directory (default: bundled)")
    return parser


def _read_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _pretty(rows: list[dict], columns) -> str:
    table = [[_fmt(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in table)) if table else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in table]
    return "\n".join(lines) + "\n"


# -- subcommands -----------------------------------------------------------------


def cmd_cheat(args) -> tuple[str, int]:
    e0, e1 = cheat.load_ensemble_pair(_read_json(args.ensembles))
    report = cheat.cheat_report(e0, e1)
    if args.format == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n", EXIT_OK
    scalars = ["fidelity", "fidelity_direct", "trace_overlap", "p_cheat", "p_diag_formula", "fidelity_squared", "helstrom"]
    rows = [
        {"protocol": "cheat", "params": f"dim={report['dim']};sizes={report['sizes'][0]}x{report['sizes'][1]}", "metric": k,
         "estimate": "", "stderr": "", "prediction": report[k], "z": ""}
        for k in scalars
    ]
    if args.format == "csv":
        return _csv(rows), EXIT_OK
    text = _pretty([{"quantity": k, "value": report[k]} for k in scalars + ["bound_holds", "orientation"]], ["quantity", "value"])
    return text, EXIT_OK


def _parse_lambda(text: str):
    try:
        value = Fraction(text)
    except ValueError:
        raise UsageError(f"bad --lambda-plus {text!r}") from None
    if not 0 < value <= 1:
        raise UsageError("--lambda-plus must lie in (0, 1]")
    return value


def cmd_concealing(args) -> tuple[str, int]:
    lam = _parse_lambda(args.lambda_plus)
    bad = [n for n in args.n if n < 1 or n % 2 == 0]
    if bad:
        raise UsageError(f"n must be positive and odd, got {bad}")
    rows = []
    for n in args.n:
        r = concealing_closed_form(n, lam)
        rows.append(
            {
                "n": n,
                "ell": r.ell,
                "closed_form": r.closed_form,
                "exact": str(r.exact),
                "lower": r.lower_bound,
                "upper": r.upper_bound,
                "inside_bounds": r.inside_bounds,
                "trace_distance": r.trace_distance,
            }
        )
    if args.format == "json":
        return json.dumps({"lambda_plus": str(lam), "rows": rows}, sort_keys=True, indent=2) + "\n", EXIT_OK
    if args.format == "csv":
        flat = []
        for row in rows:
            params = f"n={row['n']};lambda_plus={lam}"
            for metric in ("closed_form", "lower", "upper", "trace_distance"):
                value = row[metric]
                flat.append({"protocol": "QBCp3m", "params": params, "metric": metric, "estimate": "", "stderr": "",
                             "prediction": "" if value is None else repr(value), "z": ""})
        return _csv(flat), EXIT_OK
    pretty_rows = [{**r, "lower": "N/A" if r["lower"] is None else r["lower"], "upper": "N/A" if r["upper"] is None else r["upper"],
                    "inside_bounds": "N/A" if r["inside_bounds"] is None else r["inside_bounds"]} for r in rows]
    return _pretty(pretty_rows, ["n", "ell", "closed_form", "exact", "lower", "upper", "inside_bounds", "trace_distance"]), EXIT_OK


def _fixture_run(name: str) -> tuple[dict, bool]:
    if name != "appendix_b":
        raise UsageError(f"unknown fixture {name!r}")
    c = cheat.appendix_b_fixture().checks
    checks = {
        "committed_states_equal": c["bc_trace_distance"] <= 1e-12,
        "adam_cheats_perfectly": abs(c["adam_cheat_fixed_mixing"] - 1.0) <= 1e-9,
        "babe_cheats_perfectly": abs(c["babe_helstrom_on_aa"] - 1.0) <= 1e-12,
        "maps_unequal": not c["full_maps_equal"],
    }
    values = {k: (float(v) if not isinstance(v, bool) else v) for k, v in c.items()}
    return {"fixture": name, "values": values, "checks": checks}, all(checks.values())


def cmd_simulate(args) -> tuple[str, int]:
    data = _read_json(args.spec)
    if "fixture" in data:
        if set(data) != {"fixture"}:
            raise UsageError("a fixture spec takes only the 'fixture' field")
        result, ok = _fixture_run(data["fixture"])
        code = EXIT_OK if ok else EXIT_VERIFY
        if args.format == "pretty":
            rows = [{"item": k, "value": v} for k, v in result["checks"].items()]
            rows += [{"item": k, "value": v} for k, v in result["values"].items()]
            return _pretty(rows, ["item", "value"]), code
        if args.format == "csv":
            rows = [{"protocol": "fixture", "params": data["fixture"], "metric": k, "estimate": "", "stderr": "",
                     "prediction": repr(v), "z": ""} for k, v in result["values"].items()]
            return _csv(rows), code
        return json.dumps(result, sort_keys=True, indent=2) + "\n", code
    try:
        spec = ExperimentSpec.from_dict(data)
        if args.seed is not None:
            spec = spec.with_overrides(master_seed=args.seed)
    except (KeyError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    report = run_experiment(spec, threads=args.threads)
    code = EXIT_OK
    if args.strict and any(not abs(z) <= Z_LIMIT for z in report.agreement.values()):
        code = EXIT_STRICT
    if args.format == "json":
        return report.to_json(), code
    if args.format == "csv":
        return reports_to_csv([report]), code
    return _pretty(report.rows(), CSV_COLUMNS), code


def cmd_verify(args) -> tuple[str, int]:
    from .suites import SUITES, fixtures_dir

    fixtures = args.fixtures or fixtures_dir()
    names = list(SUITES)
    if args.filter is not None:
        if args.filter not in SUITES:
            raise UsageError(f"unknown suite {args.filter!r}; known: {names}")
        names = [args.filter]
    lines, results = [], {}
    code = EXIT_OK
    for name in names:
        checks = SUITES[name](fixtures)
        failed = [c for c in checks if not c[1]]
        results[name] = [{"check": c[0], "passed": c[1], "detail": c[2]} for c in checks]
        lines.append(f"{name}: {len(checks) - len(failed)}/{len(checks)} passed")
        if args.verbose or failed:
            lines += [f"  {'ok  ' if ok else 'FAIL'} {label} {detail}".rstrip() for label, ok, detail in checks]
        if failed:
            code = EXIT_VERIFY
            break
    if args.format == "json":
        return json.dumps(results, sort_keys=True, indent=2) + "\n", code
    if args.format == "csv":
        rows = [{"protocol": "verify", "params": suite, "metric": r["check"], "estimate": "", "stderr": "",
                 "prediction": str(r["passed"]), "z": ""} for suite, rs in results.items() for r in rs]
        return _csv(rows), code
    return "\n".join(lines) + "\n", code


COMMANDS = {"cheat": cmd_cheat, "concealing": cmd_concealing, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    try:
        text, code = COMMANDS[args.command](args)
    except cheat.InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except QuantumError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
