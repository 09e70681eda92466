"""Command line entry point: ``qre <subcommand> ...``.

Exit codes: 0 success, 2 mathematically obstructed or invalid input object
(the certificate is in the report), 1 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import SCHEMA
from .classifier import (FormError, analyze_form, classify_simply_connected, generate_table,
                         qre_ellipticity_decision, table_to_json, table_to_text)
from .cohomology import RingPresentation, connected_sum, named_ring, sum_cp2, sum_s2xs2, validate
from .obstruction import SearchConfig, verdict

log = logging.getLogger("qre")

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _write(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_ring(path: str) -> RingPresentation:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object for the ring")
    try:
        return RingPresentation.from_json(data)
    except (ValueError, TypeError, IndexError, KeyError) as exc:
        raise UsageError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------


def cmd_ring_new(args) -> int:
    if args.kind == "sum_cp2":
        ring = sum_cp2(args.j, args.i)
    elif args.kind == "sum_s2xs2":
        ring = sum_s2xs2(args.count)
    else:
        try:
            ring = named_ring(args.kind, args.dim, args.count)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    _write(_dump(ring.to_json()), args.out)
    return EXIT_OK


def cmd_ring_sum(args) -> int:
    a, b = _load_ring(args.first), _load_ring(args.second)
    for name, r in ((args.first, a), (args.second, b)):
        rep = validate(r)
        if not rep.valid:
            axiom, witness = rep.first_failure
            _write(_dump({"schema": SCHEMA, "error": "invalid ring", "input": name,
                          "axiom": axiom, "witness": witness}), args.out)
            return EXIT_INVALID
    try:
        ring = connected_sum(a, b)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(_dump(ring.to_json()), args.out)
    return EXIT_OK


def _search_config(args) -> SearchConfig:
    base = {}
    if args.config:
        data = _read_json(args.config)
        if not isinstance(data, dict):
            raise UsageError(f"{args.config}: expected a JSON object")
        base.update(data)
    for key in ("restarts", "max_iters", "tol_residual", "tol_injectivity", "seed"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    try:
        return SearchConfig.from_json(base)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"config: {exc}") from None


def cmd_obstruct(args) -> int:
    ring = _load_ring(args.ring)
    config = _search_config(args)
    rep = validate(ring)
    if not rep.valid:
        axiom, witness = rep.first_failure
        _write(_dump({"schema": SCHEMA, "config": asdict(config), "verdict": None,
                      "error": "invalid ring", "axiom": axiom, "witness": witness}), args.out)
        return EXIT_INVALID
    report = verdict(ring, config)
    _write(_dump(report.to_json(ring, config)), args.out)
    return EXIT_INVALID if report.verdict == "Obstructed" else EXIT_OK


def cmd_classify(args) -> int:
    if args.table:
        return _emit_table(args)
    if not args.form:
        raise UsageError("classify: give a form JSON file or --table")
    data = _read_json(args.form)
    matrix = data.get("matrix") if isinstance(data, dict) else data
    if not isinstance(matrix, list) or not all(isinstance(r, list) for r in matrix):
        raise UsageError(f"{args.form}: field 'matrix' must be a list of rows")
    config = {"input": args.form}
    try:
        form = analyze_form(matrix)
        homeo = classify_simply_connected(form)
    except FormError as exc:
        _write(_dump({"schema": SCHEMA, "config": config, "error": str(exc), "witness": exc.witness}), args.out)
        return EXIT_INVALID
    decision = qre_ellipticity_decision(form)
    doc = {"schema": SCHEMA, "config": config, "form": form.to_json(), "homeomorphism_type": homeo.to_json(),
           "decision": decision.to_json()}
    _write(_dump(doc), args.out)
    return EXIT_OK


def _emit_table(args) -> int:
    table = generate_table()
    fmt = getattr(args, "format", "json") or "json"
    _write(table_to_text(table) if fmt == "text" else table_to_json(table), args.out)
    return EXIT_OK


def cmd_measure_lab(args) -> int:
    from .measure_lab import DEFAULT_BATTERY, QuadratureSpec, load_battery, vague_convergence_report

    try:
        j_list = [int(v) for v in args.j.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--j: expected comma-separated integers, got {args.j!r}") from None
    if not j_list or min(j_list) < 1 or args.n < 2:
        raise UsageError("need n >= 2 and j values >= 1")
    try:
        quad = QuadratureSpec(args.scheme, args.grid, args.refine, args.seed)
        battery = DEFAULT_BATTERY
        if args.battery:
            battery = load_battery(Path(args.battery).read_text())
    except (ValueError, KeyError, TypeError, OSError) as exc:
        raise UsageError(str(exc)) from None
    report = vague_convergence_report(args.n, j_list, battery, quad)
    if args.format == "csv":
        _write(report.to_csv(), args.out)
    else:
        doc = {"schema": SCHEMA, "config": {"n": args.n, "j": j_list, "quadrature": asdict(quad),
                                            "battery": [asdict(t) for t in battery]},
               "report": report.to_json()}
        _write(_dump(doc), args.out)
    return EXIT_OK


def cmd_pullback(args) -> int:
    from . import pullback as pb
    from .exterior import Multivector

    n = args.n
    config = {"case": args.case, "n": n, "jmax": args.jmax, "seed": args.seed,
              "torus": "R^n / 2 pi Z^n, pi^* theta_i = dx_i"}
    if args.case == "invariance":
        import numpy as np

        rng = np.random.default_rng(args.seed)
        rows = []
        ok = True
        for k in range(1, n):
            form = Multivector.e(n, *range(1, k + 1))
            ref = pb.normalized_pullback_affine(form, pb.AffineMapSpec((0.0,) * n, 1.0))
            for _ in range(100):
                spec = pb.AffineMapSpec(tuple(rng.uniform(-100, 100, n)), float(rng.uniform(1e-3, 1e3)))
                out = pb.normalized_pullback_affine(form, spec)
                ok &= out == ref
            rows.append({"k": k, "form": form.to_json(), "normalized": ref.to_json()})
        doc = {"identical_across_specs": ok, "forms": rows}
    elif args.case == "rotated":
        spec = pb.quarter_turn(n)
        reps = [pb.limit_discrepancy(spec, k, seq, args.jmax).to_json()
                for k in range(1, n) for seq in ("centered", "ball_following")]
        doc = {"Q": [list(r) for r in spec.Q], "log_Q": spec.log.tolist(), "discrepancies": reps}
    elif args.case == "norm-bound":
        rows = []
        for k in range(1, n):
            for fam in ("covering", "rotated"):
                form = Multivector.e(n, *range(1, k + 1), exact=False)
                rows.append({"family": fam, "alpha": form.to_json(), **pb.norm_bound_check(form, fam).to_json()})
        doc = {"checks": rows}
    elif args.case == "exact-decay":
        rows = [pb.exact_decay_check(name, a, phi, range(1, args.jmax + 1)).to_json()
                for name, a, phi in pb.trig_battery(n)]
        doc = {"checks": rows}
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown case {args.case}")
    _write(_dump({"schema": SCHEMA, "config": config, "result": doc}), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qre", description="Cohomological obstructions to quasiregular ellipticity.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    ring = sub.add_parser("ring", help="build or combine cohomology rings")
    rsub = ring.add_subparsers(dest="ring_command", parser_class=_Parser)
    rsub.required = True
    new = rsub.add_parser("new")
    new.add_argument("--kind", required=True,
                     choices=["sphere", "torus", "cp2", "cp2bar", "s2xs2", "sum_s2xs2", "sum_cp2"])
    new.add_argument("--dim", type=int, default=None)
    new.add_argument("--count", type=int, default=1)
    new.add_argument("--j", type=int, default=0, help="CP^2 summands (sum_cp2)")
    new.add_argument("--i", type=int, default=0, help="CP^2bar summands (sum_cp2)")
    new.add_argument("--out")
    new.set_defaults(func=cmd_ring_new)
    rs = rsub.add_parser("sum")
    rs.add_argument("first")
    rs.add_argument("second")
    rs.add_argument("--out")
    rs.set_defaults(func=cmd_ring_sum)

    ob = sub.add_parser("obstruct", help="obstruction verdicts")
    osub = ob.add_subparsers(dest="obstruct_command", parser_class=_Parser)
    osub.required = True
    chk = osub.add_parser("check")
    chk.add_argument("ring", help="ring JSON file, or - for stdin")
    chk.add_argument("--config")
    chk.add_argument("--restarts", type=int)
    chk.add_argument("--max-iters", dest="max_iters", type=int)
    chk.add_argument("--tol-residual", dest="tol_residual", type=float)
    chk.add_argument("--tol-injectivity", dest="tol_injectivity", type=float)
    chk.add_argument("--seed", type=int)
    chk.add_argument("--out")
    chk.set_defaults(func=cmd_obstruct)

    cl = sub.add_parser("classify", help="classify an intersection form")
    cl.add_argument("form", nargs="?")
    cl.add_argument("--table", action="store_true")
    cl.add_argument("--format", choices=["json", "text"], default="json")
    cl.add_argument("--out")
    cl.set_defaults(func=cmd_classify)

    tb = sub.add_parser("table", help="the table of homeomorphism types")
    tb.add_argument("--format", choices=["json", "text"], default="json")
    tb.add_argument("--out")
    tb.set_defaults(func=_emit_table)

    ml = sub.add_parser("measure-lab", help="winding-map measure lab")
    msub = ml.add_subparsers(dest="lab_command", parser_class=_Parser)
    msub.required = True
    run = msub.add_parser("run")
    run.add_argument("--n", type=int, default=2)
    run.add_argument("--j", default="1,2,4,8,16")
    run.add_argument("--grid", type=int, default=2048)
    run.add_argument("--refine", type=int, default=8)
    run.add_argument("--scheme", choices=["midpoint", "stratified"], default="midpoint")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--battery")
    run.add_argument("--format", choices=["csv", "json"], default=None)
    run.add_argument("--out")
    run.set_defaults(func=cmd_measure_lab)

    pbp = sub.add_parser("pullback", help="pullback verifier")
    psub = pbp.add_subparsers(dest="pullback_command", parser_class=_Parser)
    psub.required = True
    ver = psub.add_parser("verify")
    ver.add_argument("--case", required=True, choices=["invariance", "rotated", "norm-bound", "exact-decay"])
    ver.add_argument("--n", type=int, default=2)
    ver.add_argument("--jmax", type=int, default=8)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out")
    ver.set_defaults(func=cmd_pullback)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if getattr(args, "format", "x") is None:
            args.format = "csv" if (args.out or "").endswith(".csv") else "json"
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
