"""Command-line entry point: ``boostfuse <subcommand>``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on
usage errors.  The default output format comes from ``BOOSTFUSE_FORMAT``
(``table`` if unset).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

from . import calibration, distillation, resources
from .detection import state_hash
from .fock import LabeledFockState, LabelPair, fidelity, make_dual_rail_pair
from .fusion_boosted import (CLASS_PROBABILITIES, OutcomeClass, boosted_fuse, class_totals,
                             rebalance_four_photon, strip_byproducts, two_qubit_target)
from .fusion_standard import fused_pair_state, type1_fuse, type1_fuse_kraus
from .interferometer import Circuit

FORMATS = ("table", "json", "csv")
FORMAT_ENV = "BOOSTFUSE_FORMAT"
DEFAULT_TOL = 1e-12
FIDELITY_TOL = 1e-10

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SWEEP_T = (0.25, 0.5, 0.75, 0.9)
SWEEP_K = (1, 2, 3, 5, 10)


class UsageError(Exception):
    pass


# -- output --------------------------------------------------------------------


def render(rows: Sequence[dict], fmt: str, columns: Optional[Sequence[str]] = None) -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    if fmt == "json":
        return json.dumps([{c: r.get(c) for c in columns} for r in rows], indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue().rstrip("\n")
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _pattern(p) -> str:
    return "(" + ",".join(str(n) for n in p) + ")" if p is not None else "-"


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# -- subcommands ---------------------------------------------------------------


def cmd_fuse_standard(args) -> tuple[list[dict], int]:
    s = make_dual_rail_pair()
    outs = type1_fuse_kraus(s) if args.mode == "kraus" else type1_fuse(s)
    rows = [{
        "pattern": _pattern(o.pattern),
        "kind": o.kind.value,
        "sign": o.sign,
        "probability": o.probability,
        "post_state_hash": state_hash(o.post_state),
    } for o in outs]
    return rows, EXIT_OK


def _load_circuit(path: Optional[str]) -> Circuit:
    if path is None:
        return calibration.REFERENCE_PART2_CIRCUIT
    try:
        with open(path, encoding="utf-8") as fh:
            return Circuit.from_text(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read circuit file: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"bad circuit file: {exc}") from None


def cmd_fuse_boosted(args) -> tuple[list[dict], int]:
    if args.mode == "kraus":
        if args.circuit_file:
            raise UsageError("--circuit-file only applies to --mode circuit")
        outs = boosted_fuse(make_dual_rail_pair())
        rows = [{
            "class": o.outcome_class.value,
            "variant": " ".join(o.variant),
            "n_detected": o.n_detected,
            "sign": o.sign,
            "probability": o.probability,
            "post_state_hash": state_hash(o.post_state),
        } for o in outs]
        return rows, EXIT_OK
    try:
        report = calibration.verify_circuit(_load_circuit(args.circuit_file))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{
        "class": c.value,
        "probability": report.class_totals[c],
        "expected": CLASS_PROBABILITIES[c],
        "status": _status(abs(report.class_totals[c] - CLASS_PROBABILITIES[c]) <= args.tol),
    } for c in OutcomeClass]
    rows.append({"class": "unmatched", "probability": report.unmatched_mass, "expected": 0.0,
                 "status": _status(report.unmatched_mass <= args.tol)})
    return rows, EXIT_OK if report.accepted else EXIT_FAIL


def _parse_k(text: str) -> Optional[int]:
    if text.lower() in ("inf", "infinity", "none"):
        return None
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a positive integer or 'inf', got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError(f"k must be >= 1, got {k}")
    return k


def cmd_distill(args) -> tuple[list[dict], int]:
    two = CLASS_PROBABILITIES[OutcomeClass.TWO_DISTILLABLE]
    grid = [(t, k) for t in SWEEP_T for k in SWEEP_K] if args.sweep else [(args.t, args.k)]
    outs = [o for o in boosted_fuse(make_dual_rail_pair())
            if o.outcome_class is OutcomeClass.TWO_DISTILLABLE]
    rows = []
    for t, k in grid:
        try:
            params = distillation.DistillationParams(t, k)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows.append({
            "t": t,
            "k": "inf" if k is None else k,
            "conditional_success": float(distillation.p_dist(t, k)),
            "overall_contribution": distillation.distill_contribution(outs, params),
            "formula_contribution": two * float(distillation.p_dist(t, k)),
        })
    return rows, EXIT_OK


def cmd_calibrate(args) -> tuple[list[dict], int]:
    if not 0 <= args.max_elements <= 6:
        raise UsageError("--max-elements must lie between 0 and 6")
    result = calibration.calibrate_part2_circuit(args.max_elements)
    text = result.to_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    row = {
        "found": result.found,
        "candidates_checked": result.candidates_checked,
        "max_elements": result.max_elements,
        "circuit": result.circuit.to_text().replace("\n", "; ") if result.found else None,
    }
    if result.found:
        extra = result.report.weights_outside_published_lists()
        row["weights_outside_lists"] = "; ".join(
            f"{c.value}: {', '.join(f'{w:.6g}' for w in ws)}" for c, ws in extra.items()) or None
    return [row], EXIT_OK


def _report_rows(report: resources.CostReport) -> list[dict]:
    return [{
        "strategy": report.strategy,
        "gate": report.gate,
        "node": f.node,
        "kind": f.kind,
        "attempts": str(f.attempts),
        "photons": str(f.photons),
    } for f in report.flows] + [{
        "strategy": report.strategy,
        "gate": report.gate,
        "node": "total",
        "kind": "target",
        "attempts": None,
        "photons": f"{report.exact} = {float(report.exact):.6f} -> {report.rounded}",
    }]


def cmd_resources(args) -> tuple[list[dict], int]:
    try:
        if args.file:
            st = resources.load_strategy(args.file, args.gate)
        else:
            st = resources.scheme_strategy(args.scheme, args.gate)
        report = resources.evaluate_strategy(st)
    except OSError as exc:
        raise UsageError(f"cannot read strategy file: {exc}") from None
    except ValueError as exc:  # includes StrategyError
        raise UsageError(str(exc)) from None
    if args.json:
        args.format = "json"
        return [report.to_dict()], EXIT_OK
    return _report_rows(report), EXIT_OK


def table1_checks(ancilla: str = "prepared", tol: float = DEFAULT_TOL) -> list[dict]:
    """Class probabilities and output-state fidelities of the boosted gate."""
    anc = None
    if ancilla == "unprepared":
        anc = LabeledFockState.basis((5, 6, 7, 8), (1, 1, 1, 1))
    outs = boosted_fuse(make_dual_rail_pair(), anc)
    totals = class_totals(outs)
    even = (LabelPair(0, 0), LabelPair(1, 1))  # odd n_d keeps these terms
    odd = (LabelPair(0, 1), LabelPair(1, 0))
    rows = []
    for c in OutcomeClass:
        members = [o for o in outs if o.outcome_class is c]
        fids = []
        for o in members:
            if c is OutcomeClass.ODD:
                fids.append(fidelity(strip_byproducts(o), fused_pair_state(o.sign, (2, 3), even)))
            elif c is OutcomeClass.FOUR_SUCCESS:
                r = rebalance_four_photon(o)
                fids.append(fidelity(r.post_state, two_qubit_target(r.sign, odd)))
        min_fid = min(fids) if fids else None
        ok = abs(totals[c] - CLASS_PROBABILITIES[c]) < tol
        if min_fid is not None:
            ok &= min_fid > 1 - FIDELITY_TOL
        rows.append({
            "class": c.value,
            "probability": totals[c],
            "expected": CLASS_PROBABILITIES[c],
            "min_fidelity": min_fid,
            "status": _status(ok),
        })
    total = sum(totals.values())
    rows.append({"class": "sum", "probability": total, "expected": 1.0, "min_fidelity": None,
                 "status": _status(abs(total - 1) < tol)})
    return rows


def cmd_verify_table1(args) -> tuple[list[dict], int]:
    rows = table1_checks(args.ancilla, args.tol)
    return rows, EXIT_OK if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def cmd_verify_table2(args) -> tuple[list[dict], int]:
    keys = [k for k in resources.PUBLISHED_TABLE
            if (args.scheme is None or k[0] == args.scheme)
            and (args.gate is None or k[1] == args.gate)]
    if not keys:
        raise UsageError("no published entry matches the given --scheme/--gate")
    rows = [{
        "scheme": c.scheme,
        "gate": c.gate,
        "exact": str(c.exact),
        "value": float(c.exact),
        "rounded": c.rounded,
        "published": c.published,
        "status": _status(c.passed),
    } for c in resources.table_checks(keys)]
    return rows, EXIT_OK if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


# -- parser --------------------------------------------------------------------


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    env_fmt = os.environ.get(FORMAT_ENV, "table")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS,
                        default=env_fmt if env_fmt in FORMATS else "table",
                        help=f"output format (default: ${FORMAT_ENV} or 'table')")
    common.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL,
                        help=f"probability tolerance for checks (default {DEFAULT_TOL})")

    p = argparse.ArgumentParser(prog="boostfuse",
                                description="Boosted type-I fusion simulator and resource estimator.")
    sub = p.add_subparsers(dest="command", required=True)

    fuse = sub.add_parser("fuse", help="simulate a fusion gate on the dual-rail pair input")
    gates = fuse.add_subparsers(dest="gate", required=True)
    fs = gates.add_parser("standard", parents=[common], help="standard type-I gate")
    fs.add_argument("--mode", choices=("circuit", "kraus"), default="circuit")
    fs.set_defaults(func=cmd_fuse_standard)
    fb = gates.add_parser("boosted", parents=[common], help="boosted type-I gate")
    fb.add_argument("--mode", choices=("kraus", "circuit"), default="kraus",
                    help="class-level instrument, or a part-(II) circuit checked by the verifier")
    fb.add_argument("--circuit-file", help="part-(II) circuit (BS/PH lines); default: built-in")
    fb.set_defaults(func=cmd_fuse_boosted)

    d = sub.add_parser("distill", parents=[common], help="distillation success for given t, k")
    d.add_argument("--t", type=float, default=0.5, help="intensity transmission (default 0.5)")
    d.add_argument("--k", type=_parse_k, default=1, help="max stages, or 'inf' (default 1)")
    d.add_argument("--sweep", action="store_true",
                   help="grid over t in {0.25,0.5,0.75,0.9}, k in {1,2,3,5,10} (CSV by default)")
    d.set_defaults(func=cmd_distill)

    c = sub.add_parser("calibrate", parents=[common], help="search for a part-(II) circuit")
    c.add_argument("--max-elements", type=int, default=6, help="beam splitters allowed (0-6)")
    c.add_argument("--output", help="write the match or no-match report to this file")
    c.set_defaults(func=cmd_calibrate)

    r = sub.add_parser("resources", parents=[common], help="photon cost of a strategy")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--scheme", choices=sorted(resources.SCHEMES))
    src.add_argument("--file", help="TOML strategy file")
    r.add_argument("--gate", choices=resources.GATE_VARIANTS, default="standard")
    r.add_argument("--json", action="store_true", help="shorthand for --format json")
    r.set_defaults(func=cmd_resources)

    v1 = sub.add_parser("verify-table1", parents=[common], help="check the boosted gate's classes")
    v1.add_argument("--ancilla", choices=("prepared", "unprepared"), default="prepared",
                    help="'unprepared' injects |1111> without part (I), a negative control")
    v1.set_defaults(func=cmd_verify_table1)

    v2 = sub.add_parser("verify-table2", parents=[common], help="check the photon-cost table")
    v2.add_argument("--scheme", choices=sorted(resources.SCHEMES))
    v2.add_argument("--gate", choices=resources.GATE_VARIANTS)
    v2.set_defaults(func=cmd_verify_table2)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "distill" and args.sweep and FORMAT_ENV not in os.environ \
            and "--format" not in (argv if argv is not None else sys.argv[1:]):
        args.format = "csv"
    try:
        rows, status = args.func(args)
    except UsageError as exc:
        print(f"boostfuse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(render(rows, args.format))
    return status


if __name__ == "__main__":
    sys.exit(main())
