"""JSON documents: functions, certificates, oracle reports.

Every rational crosses the boundary as a string ``"p"`` or ``"p/q"`` in lowest
terms.  Documents carry ``"format": 1``.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
from fractions import Fraction

from . import __version__
from .plf import PeriodicPLF, slope_partition, validate

FORMAT = 1
_RATIONAL = re.compile(r"-?[0-9]+(/[0-9]+)?")


class MalformedDocument(ValueError):
    pass


def fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_vec(v) -> list:
    return [fmt(x) for x in v]


def parse_rational(s) -> Fraction:
    if not isinstance(s, str) or not _RATIONAL.fullmatch(s):
        raise MalformedDocument(f"not a rational string: {s!r}")
    if "/" in s and int(s.split("/")[1]) == 0:
        raise MalformedDocument(f"zero denominator in {s!r}")
    return Fraction(s)


def parse_vec(v) -> tuple:
    if not isinstance(v, list):
        raise MalformedDocument(f"expected an array of rationals, got {v!r}")
    return tuple(parse_rational(x) for x in v)


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_cells(phi: PeriodicPLF) -> list:
    return sorted(phi.cells, key=lambda c: (sorted(c.simplex.vertices), c.simplex.vertices))


def function_to_document(phi: PeriodicPLF) -> dict:
    return {
        "format": FORMAT,
        "k": phi.k,
        "f": fmt_vec(phi.f),
        "cells": [
            {
                "vertices": [fmt_vec(v) for v in c.simplex.vertices],
                "gradient": fmt_vec(c.gradient),
                "offset": fmt(c.offset),
            }
            for c in canonical_cells(phi)
        ],
    }


def parse_function_document(doc) -> tuple:
    """Return (k, f, raw cells) from a decoded document, or raise MalformedDocument."""
    if not isinstance(doc, dict):
        raise MalformedDocument("top level must be an object")
    if doc.get("format", FORMAT) != FORMAT:
        raise MalformedDocument(f"unsupported format {doc.get('format')!r}")
    for key in ("k", "f", "cells"):
        if key not in doc:
            raise MalformedDocument(f"missing key {key!r}")
    k = doc["k"]
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise MalformedDocument(f"k must be a positive integer, got {k!r}")
    f = parse_vec(doc["f"])
    if len(f) != k:
        raise MalformedDocument(f"f has length {len(f)}, expected {k}")
    if not isinstance(doc["cells"], list):
        raise MalformedDocument("cells must be an array")
    cells = []
    for c in doc["cells"]:
        if not isinstance(c, dict) or not {"vertices", "gradient", "offset"} <= set(c):
            raise MalformedDocument(f"cell must have vertices, gradient and offset: {c!r}")
        if not isinstance(c["vertices"], list):
            raise MalformedDocument("cell vertices must be an array")
        cells.append(([parse_vec(v) for v in c["vertices"]], parse_vec(c["gradient"]), parse_rational(c["offset"])))
    return k, f, cells


def load_function_bytes(data: bytes) -> PeriodicPLF:
    """Decode and validate; MalformedDocument or ValidationError on failure."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    k, f, cells = parse_function_document(doc)
    return validate(k, f, cells)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# reports


def _header(kind: str, input_digest: str | None) -> dict:
    return {"format": FORMAT, "kind": kind, "tool": "groupcert", "version": __version__,
            "input_sha256": input_digest}


def witness_to_json(w) -> dict:
    return {"kind": w.kind, "points": [fmt_vec(p) for p in w.points], "lhs": fmt(w.lhs), "rhs": fmt(w.rhs)}


def _hypotheses_to_json(hyp: dict) -> dict:
    out = {}
    for name, info in hyp.items():
        entry = {}
        for key, val in info.items():
            if key == "witnesses":
                entry[key] = [witness_to_json(w) for w in val]
            elif key == "per_class":
                entry[key] = list(val)
            else:
                entry[key] = val
        out[name] = entry
    return out


def certificate_to_json(cert, input_digest: str | None = None) -> dict:
    from .certify import direction_products

    doc = _header("certificate", input_digest)
    doc.update({
        "verdict": cert.verdict,
        "failure_stage": cert.stage,
        "k": cert.k,
        "f": fmt_vec(cert.f),
        "hypotheses": _hypotheses_to_json(cert.hypotheses),
        "notes": list(cert.notes),
    })
    payload = {"gradients": [fmt_vec(g) for g in cert.gradients]}
    if cert.directions is not None:
        D = cert.directions
        payload["epsilon"] = fmt(D.epsilon)
        payload["directions"] = [fmt_vec(r) for r in D.directions]
        payload["direction_cells"] = [list(c) for c in D.witnesses]
        payload["direction_products"] = [fmt_vec(row) for row in direction_products(D, cert.gradients)]
    if cert.anchors is not None:
        payload["anchors"] = [fmt_vec(a) for a in cert.anchors.anchors]
        payload["anchor_shifts"] = [list(w) for w in cert.anchors.shifts]
        payload["mu"] = [fmt_vec(row) for row in cert.mu]
    if cert.system is not None:
        S = cert.system
        payload["system"] = {
            "status": S.status,
            "unknowns": S.unknowns,
            "equations": S.equations,
            "rank": S.rank,
            "square_rank": S.square_rank,
            "augmented_rank": S.augmented_rank,
            "anchor_matrix_rank": S.anchor_matrix_rank,
            "direction_block_ranks": list(S.direction_block_ranks),
            "nullspace": [fmt_vec(v) for v in S.nullspace],
        }
        payload["recovered_gradients"] = [fmt_vec(g) for g in S.solution] if S.solution else None
    doc["certificate"] = payload
    return doc


def _table(values: dict) -> list:
    return [{"index": list(idx), "value": fmt(v)} for idx, v in sorted(values.items())]


def oracle_to_json(rep, input_digest: str | None = None) -> dict:
    doc = _header("oracle", input_digest)
    doc.update({
        "verdict": rep.verdict,
        "q": rep.q,
        "k": rep.k,
        "unknowns": rep.unknowns,
        "equations": rep.equations,
        "rank": rep.rank,
        "nullspace_dimension": rep.dimension,
        "note": rep.note,
    })
    if rep.verdict == "degenerate":
        doc["perturbation"] = _table(rep.perturbation)
        doc["epsilon"] = None if rep.epsilon is None else fmt(rep.epsilon)
        doc["plus"] = None if rep.plus is None else _table(rep.plus)
        doc["minus"] = None if rep.minus is None else _table(rep.minus)
        doc["piecewise_on_cells"] = rep.piecewise_on_cells
        doc["refutes_extremality"] = rep.refutes_extremality
    return doc


def plot_data(phi: PeriodicPLF) -> dict:
    partition = slope_partition(phi)
    order = canonical_cells(phi)
    index = {id(c): i for i, c in enumerate(phi.cells)}
    return {
        "format": FORMAT,
        "k": phi.k,
        "f": fmt_vec(phi.f),
        "classes": [{"index": j, "gradient": fmt_vec(g)} for j, g in enumerate(partition.gradients)],
        "cells": [
            {"vertices": [fmt_vec(v) for v in c.simplex.vertices], "class": partition.class_of(index[id(c)])}
            for c in order
        ],
    }
