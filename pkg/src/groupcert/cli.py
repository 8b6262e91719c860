"""groupcert command line.

Exit codes: 0 success (valid / facet-certified / unique / accepted),
1 negative verdict, 2 invalid function, 64 malformed input or unknown name,
65 grid mismatch, 66 unsupported dimension.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__, catalog
from .certify import FACET, certify_facet
from .exact import ContractViolation
from .io import (
    MalformedDocument,
    certificate_to_json,
    digest,
    dumps,
    fmt,
    fmt_vec,
    function_to_document,
    load_function_bytes,
    oracle_to_json,
    parse_rational,
    plot_data,
    write_atomic,
)
from .plf import GridMismatchError, ValidationError

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INVALID = 2
EXIT_MALFORMED = 64
EXIT_GRID = 65
EXIT_UNSUPPORTED = 66


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(EXIT_MALFORMED, f"cannot read {path}: {exc}") from exc


def _load(path: str):
    data = _read(path)
    try:
        return load_function_bytes(data), digest(data)
    except MalformedDocument as exc:
        raise CliError(EXIT_MALFORMED, f"malformed document: {exc}") from exc
    except ContractViolation as exc:
        raise CliError(EXIT_MALFORMED, f"malformed document: {exc}") from exc
    except ValidationError as exc:
        msg = f"invalid function: {type(exc).__name__}: {exc}"
        if exc.witness is not None:
            msg += f"\nwitness: {_show(exc.witness)}"
        raise CliError(EXIT_INVALID, msg) from exc


def _show(obj):
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, dict):
        return {k: _show(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_show(v) for v in obj]
    return obj


def cmd_validate(args) -> int:
    try:
        phi, dig = _load(args.file)
    except CliError as exc:
        if args.json and exc.code == EXIT_INVALID:
            print(dumps({"format": 1, "valid": False, "error": str(exc)}), end="")
        raise
    _err(f"valid: k={phi.k}, {len(phi.cells)} cells, f={fmt_vec(phi.f)}")
    if args.json:
        print(dumps({"format": 1, "valid": True, "input_sha256": dig, "k": phi.k, "cells": len(phi.cells)}), end="")
    return EXIT_OK


def cmd_certify(args) -> int:
    phi, dig = _load(args.file)
    cert = certify_facet(phi)
    doc = certificate_to_json(cert, dig)
    if args.json:
        write_atomic(args.json, dumps(doc))
    line = f"verdict: {cert.verdict}"
    if cert.stage:
        line += f" (failed stage: {cert.stage})"
    print(line)
    print("gradients: " + ", ".join("(" + ", ".join(fmt_vec(g)) + ")" for g in cert.gradients))
    for name, info in cert.hypotheses.items():
        print(f"  {name}: {'pass' if info.get('passed') else 'FAIL'}")
        for w in info.get("witnesses", ()):
            pts = " ".join("(" + ", ".join(fmt_vec(p)) + ")" for p in w.points)
            print(f"    {w.kind} at {pts}: {fmt(w.lhs)} vs {fmt(w.rhs)}")
    for note in cert.notes:
        print(f"  note: {note}")
    return EXIT_OK if cert.verdict == FACET else EXIT_NEGATIVE


def cmd_oracle(args) -> int:
    from .oracle import oracle_extremality

    phi, dig = _load(args.file)
    try:
        rep = oracle_extremality(phi, args.q)
    except GridMismatchError as exc:
        raise CliError(EXIT_GRID, f"grid mismatch: {exc}") from exc
    except ContractViolation as exc:
        raise CliError(EXIT_MALFORMED, str(exc)) from exc
    doc = oracle_to_json(rep, dig)
    if args.json:
        print(dumps(doc), end="")
    else:
        print(f"verdict: {rep.verdict} (q={rep.q}, unknowns={rep.unknowns}, rank={rep.rank})")
        print(f"note: {rep.note}")
        if rep.verdict == "degenerate" and rep.epsilon is not None:
            print(f"perturbation pair: phi +- {fmt(rep.epsilon)} h, h = "
                  + " ".join(fmt(rep.perturbation[a]) for a in sorted(rep.perturbation)))
    return EXIT_OK if rep.verdict == "unique" else EXIT_NEGATIVE


def cmd_plot_data(args) -> int:
    phi, _ = _load(args.file)
    if phi.k > 2:
        raise CliError(EXIT_UNSUPPORTED, f"plot-data supports k in {{1, 2}}, got k={phi.k}")
    print(dumps(plot_data(phi)), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import verify_certificate

    data = _read(args.report)
    try:
        report = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_MALFORMED, f"malformed report: {exc}") from exc
    phi = None
    if args.function:
        phi, dig = _load(args.function)
        if report.get("input_sha256") not in (None, dig):
            _err("warning: report digest does not match the function document")
    res = verify_certificate(report, phi)
    if res.accepted:
        print("accepted")
        return EXIT_OK
    print("rejected")
    for p in res.problems:
        print(f"  {p}")
    return EXIT_NEGATIVE


def _rational(s: str) -> Fraction:
    try:
        return parse_rational(s)
    except MalformedDocument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


GENERATORS = ("gmi", "wrong-peak", "spike", "free-middle-slope", "diagonal-lift", "triangle-lifting", "random")


def cmd_gen(args) -> int:
    name = args.name
    try:
        if name == "gmi":
            phi = catalog.gmi(args.f if args.f is not None else Fraction(2, 5))
        elif name == "wrong-peak":
            phi = catalog.wrong_peak(args.f if args.f is not None else Fraction(2, 5))
        elif name == "spike":
            phi = catalog.spike()
        elif name == "free-middle-slope":
            phi = catalog.free_middle_slope()
        elif name == "diagonal-lift":
            base = catalog.gmi(args.f if args.f is not None else Fraction(2, 5))
            phi = catalog.diagonal_lift(base)
        elif name == "triangle-lifting":
            phi = catalog.triangle_lifting_fixture()
        elif name == "random":
            phi = catalog.random_plf(args.k, args.q, args.seed, args.shape)
        else:
            raise CliError(EXIT_MALFORMED, f"unknown fixture {name!r}; choose from {', '.join(GENERATORS)}")
    except ContractViolation as exc:
        raise CliError(EXIT_MALFORMED, f"bad parameters: {exc}") from exc
    text = dumps(function_to_document(phi))
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="groupcert", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"groupcert {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a function document")
    s.add_argument("file")
    s.add_argument("--json", action="store_true", help="machine-readable result on stdout")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("certify", help="run the facet certification pipeline")
    s.add_argument("file")
    s.add_argument("--json", metavar="OUT", help="write the certificate report here")
    s.set_defaults(run=cmd_certify)

    s = sub.add_parser("oracle", help="finite-group extremality test")
    s.add_argument("file")
    s.add_argument("--q", type=int, required=True, help="grid denominator")
    s.add_argument("--json", action="store_true", help="print the JSON report")
    s.set_defaults(run=cmd_oracle)

    s = sub.add_parser("plot-data", help="cells with slope-class indices as JSON")
    s.add_argument("file")
    s.set_defaults(run=cmd_plot_data)

    s = sub.add_parser("verify", help="replay a certificate report")
    s.add_argument("report")
    s.add_argument("--function", help="also compare against this function document")
    s.set_defaults(run=cmd_verify)

    s = sub.add_parser("gen", help="write a catalog function document")
    s.add_argument("name", help="one of: " + ", ".join(GENERATORS))
    s.add_argument("--f", type=_rational, help="f for gmi, wrong-peak and diagonal-lift")
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--q", type=int, default=6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--shape", default="any", choices=("any", "concave"))
    s.add_argument("-o", "--output", help="output path (default stdout)")
    s.set_defaults(run=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which collides with "invalid function"
        return EXIT_MALFORMED if exc.code not in (0, None) else 0
    try:
        return args.run(args)
    except CliError as exc:
        _err(str(exc))
        return exc.code
    except ContractViolation as exc:
        _err(f"contract violation: {exc}")
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
