"""Exact checks of the minimality conditions for periodic PL functions.

A function is minimal valid iff it vanishes at the origin, is subadditive and
satisfies ``phi(x) + phi(-f - x) = 1``.  Periodicity holds by representation.
For k <= 2 every check is exact over the cell structure; for k >= 3 symmetry
and subadditivity are only sampled on a dense grid and the result says so.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import (
    ContractViolation,
    Vec,
    add,
    affine_min_over_polytope,
    clip_polygon_many,
    common_denominator,
    dot,
    frac_part,
    merge_convex_pieces,
    polygon_halfspaces,
    sub,
)
from .plf import (
    FiniteGroupModel,
    PeriodicPLF,
    breakpoint_denominator,
    evaluate,
    require_on_grid,
    restrict_to_grid,
)

EXACT = "exact"
GRID = "grid-verified"


@dataclass(frozen=True)
class ViolationWitness:
    """A point (or pair) where one minimality condition fails.

    ``lhs`` and ``rhs`` are the two sides of the violated relation:

    * origin: phi(0) and 0 (must be equal)
    * negativity: phi(x) and 0 (need lhs >= rhs)
    * symmetry: phi(x) + phi(-f-x) and 1 (must be equal)
    * subadditivity: phi(x) + phi(y) and phi(x+y) (need lhs >= rhs)
    """

    kind: str
    points: tuple
    lhs: Fraction
    rhs: Fraction

    def reproduce(self, phi: PeriodicPLF) -> bool:
        """Re-evaluate the condition at the stored points; True if it still fails."""
        if self.kind == "origin":
            return evaluate(phi, self.points[0]) != 0
        if self.kind == "negativity":
            return evaluate(phi, self.points[0]) < 0
        if self.kind == "symmetry":
            x = self.points[0]
            return evaluate(phi, x) + evaluate(phi, tuple(-a - b for a, b in zip(phi.f, x))) != 1
        if self.kind == "subadditivity":
            x, y = self.points
            return evaluate(phi, x) + evaluate(phi, y) < evaluate(phi, add(x, y))
        raise ValueError(f"unknown witness kind {self.kind!r}")


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    witness: ViolationWitness | None = None
    mode: str = EXACT


@dataclass(frozen=True)
class MinimalityReport:
    passed: bool
    witnesses: tuple = ()
    mode: str = EXACT
    checks: dict = field(default_factory=dict)


def _fail(kind, points, lhs, rhs, mode=EXACT) -> CheckResult:
    return CheckResult(False, ViolationWitness(kind, tuple(points), lhs, rhs), mode)


def worker_count() -> int:
    """Parallelism cap from GROUPCERT_THREADS; 1 (serial) when unset."""
    raw = os.environ.get("GROUPCERT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ContractViolation(f"GROUPCERT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ContractViolation(f"GROUPCERT_THREADS must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------------------
# origin and nonnegativity


def check_origin_and_nonnegativity(phi: PeriodicPLF) -> CheckResult:
    # affine pieces attain their minima at vertices
    low = min(phi.vertex_values.values())
    if low < 0:
        x = min(v for v, val in phi.vertex_values.items() if val == low)
        return _fail("negativity", [x], low, Fraction(0))
    zero = (Fraction(0),) * phi.k
    v0 = evaluate(phi, zero)
    if v0 != 0:
        return _fail("origin", [zero], v0, Fraction(0))
    return CheckResult(True)


# ---------------------------------------------------------------------------
# convex regions with one affine piece each


@dataclass(frozen=True)
class Region:
    halfspaces: tuple
    lo: Vec
    hi: Vec
    gradient: Vec
    offset: Fraction
    vertices: tuple = ()

    def value(self, x: Sequence) -> Fraction:
        return dot(self.gradient, x) + self.offset


def regions(phi: PeriodicPLF) -> list[Region]:
    """Maximal convex unions of cells sharing affine data (k <= 2)."""
    if phi.k == 1:
        cells = sorted(phi.cells, key=lambda c: min(v[0] for v in c.simplex.vertices))
        runs: list = []
        for c in cells:
            a = min(v[0] for v in c.simplex.vertices)
            b = max(v[0] for v in c.simplex.vertices)
            if runs and runs[-1][1] == a and runs[-1][2:] == (c.gradient, c.offset):
                runs[-1][1] = b
            else:
                runs.append([a, b, c.gradient, c.offset])
        one = Fraction(1)
        return [
            Region((((-one,), -a), ((one,), b)), (a,), (b,), g, off, ((a,), (b,)))
            for a, b, g, off in runs
        ]
    if phi.k == 2:
        pieces = [(c.simplex.vertices, (c.gradient, c.offset)) for c in phi.cells]
        out = []
        for poly, (g, off) in merge_convex_pieces(pieces):
            xs = [p[0] for p in poly]
            ys = [p[1] for p in poly]
            out.append(Region(tuple(polygon_halfspaces(poly)), (min(xs), min(ys)), (max(xs), max(ys)),
                              g, off, tuple(poly)))
        return out
    raise ContractViolation("exact region decomposition is available for k <= 2 only")


# ---------------------------------------------------------------------------
# symmetry


def _reflect(phi: PeriodicPLF, x: Sequence) -> Vec:
    return frac_part(tuple(-a - b for a, b in zip(phi.f, x)))


def _symmetry_k1(phi: PeriodicPLF) -> CheckResult:
    f = phi.f[0]
    bps = {v[0] for c in phi.cells for v in c.simplex.vertices}
    pts = sorted({b % 1 for b in bps} | {(-f - b) % 1 for b in bps})
    # s(x) = phi(x) + phi(-f-x) - 1 is affine between consecutive points
    for x in pts:
        xv = (x,)
        total = evaluate(phi, xv) + evaluate(phi, _reflect(phi, xv))
        if total != 1:
            return _fail("symmetry", [xv], total, Fraction(1))
    return CheckResult(True)


def _symmetry_k2(phi: PeriodicPLF, regs: list[Region]) -> CheckResult:
    f = phi.f
    for P in regs:
        for R in regs:
            # x in P with -f - x in R - w, i.e. x in w - f - R
            for w in itertools.product((1, 2), repeat=2):
                t = sub(w, f)
                hs = [(tuple(-ai for ai in a), b - dot(a, t)) for a, b in R.halfspaces]
                poly = clip_polygon_many(P.vertices, hs)
                bad = []
                for x in poly:
                    total = P.value(x) + R.value(sub(t, x))
                    if total != 1:
                        bad.append((x, total))
                if bad:
                    x, total = min(bad)
                    return _fail("symmetry", [x], total, Fraction(1))
    return CheckResult(True)


# ---------------------------------------------------------------------------
# subadditivity


def _triple_lp(P: Region, Qr: Region, R: Region, w: Sequence, k: int):
    """Constraints and objective of min phi_P(x) + phi_Q(y) - phi_R(x+y-w)."""
    zero = (Fraction(0),) * k
    cons = [(a + zero, b) for a, b in P.halfspaces]
    cons += [(zero + a, b) for a, b in Qr.halfspaces]
    cons += [(a + a, b + dot(a, w)) for a, b in R.halfspaces]
    c = tuple(gp - gr for gp, gr in zip(P.gradient, R.gradient)) + tuple(
        gq - gr for gq, gr in zip(Qr.gradient, R.gradient)
    )
    c0 = P.offset + Qr.offset - R.offset + dot(R.gradient, w)
    return (c, c0), cons


def _box_lower_bound(P: Region, Qr: Region, obj) -> Fraction:
    c, c0 = obj
    lo = list(P.lo) + list(Qr.lo)
    hi = list(P.hi) + list(Qr.hi)
    return c0 + sum(min(ci * l, ci * h) for ci, l, h in zip(c, lo, hi))


def _lexmin_optimum(obj, cons, value, dim):
    """Lexicographically smallest minimizer of obj over cons."""
    c, c0 = obj
    cons = list(cons) + [(c, value - c0)]
    point = []
    for i in range(dim):
        e = tuple(Fraction(1 if j == i else 0) for j in range(dim))
        res = affine_min_over_polytope((e, Fraction(0)), cons, dim)
        assert res.status == "optimal"
        point.append(res.value)
        cons.append((e, res.value))
        cons.append((tuple(-x for x in e), -res.value))
    return tuple(point)


def _sweep_from(args):
    """First violation among triples whose first index is ``ip``."""
    ip, regs, k = args
    P = regs[ip]
    shifts = list(itertools.product((0, 1, 2), repeat=k))
    for iq in range(ip, len(regs)):
        Qr = regs[iq]
        for ir, R in enumerate(regs):
            for w in shifts:
                # box of x + y - w must meet the box of R
                if any(P.lo[i] + Qr.lo[i] - w[i] > R.hi[i] or P.hi[i] + Qr.hi[i] - w[i] < R.lo[i]
                       for i in range(k)):
                    continue
                obj, cons = _triple_lp(P, Qr, R, w, k)
                if _box_lower_bound(P, Qr, obj) >= 0:
                    continue
                res = affine_min_over_polytope(obj, cons, 2 * k)
                if res.status == "optimal" and res.value < 0:
                    pt = _lexmin_optimum(obj, cons, res.value, 2 * k)
                    return (ip, iq, ir, w), pt
    return None


def _subadditivity_exact(phi: PeriodicPLF, regs: list[Region]) -> CheckResult:
    k = phi.k
    jobs = [(ip, regs, k) for ip in range(len(regs))]
    n = worker_count()
    hit = None
    if n > 1 and len(regs) > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            for res in pool.map(_sweep_from, jobs):
                if res is not None:
                    hit = res
                    break
    else:
        for job in jobs:
            hit = _sweep_from(job)
            if hit is not None:
                break
    if hit is None:
        return CheckResult(True)
    _, pt = hit
    x, y = pt[:k], pt[k:]
    lhs = evaluate(phi, x) + evaluate(phi, y)
    rhs = evaluate(phi, add(x, y))
    assert lhs < rhs, "LP witness does not reproduce"
    return _fail("subadditivity", [x, y], lhs, rhs)


# ---------------------------------------------------------------------------
# grid mode for k >= 3


def _grid_model(phi: PeriodicPLF) -> FiniteGroupModel:
    return restrict_to_grid(phi, 2 * breakpoint_denominator(phi))


def _symmetry_grid(phi: PeriodicPLF, model: FiniteGroupModel) -> CheckResult:
    for idx in sorted(model.values):
        r = model.reflect(idx)
        total = model.values[idx] + model.values[r]
        if total != 1:
            return _fail("symmetry", [model.point(idx)], total, Fraction(1), GRID)
    return CheckResult(True, mode=GRID)


def _subadditivity_grid(model: FiniteGroupModel, mode: str = GRID) -> CheckResult:
    vals = model.values
    keys = sorted(vals)
    for a in keys:
        for b in keys:
            s = model.add(a, b)
            if vals[a] + vals[b] < vals[s]:
                return _fail("subadditivity", [model.point(a), model.point(b)], vals[a] + vals[b], vals[s], mode)
    return CheckResult(True, mode=mode)


# ---------------------------------------------------------------------------
# public checks


def check_symmetry(phi: PeriodicPLF) -> CheckResult:
    if phi.k == 1:
        return _symmetry_k1(phi)
    if phi.k == 2:
        return _symmetry_k2(phi, regions(phi))
    return _symmetry_grid(phi, _grid_model(phi))


def check_subadditivity(phi: PeriodicPLF) -> CheckResult:
    if phi.k <= 2:
        return _subadditivity_exact(phi, regions(phi))
    return _subadditivity_grid(_grid_model(phi))


def check_minimality(phi: PeriodicPLF) -> MinimalityReport:
    checks = {
        "origin": check_origin_and_nonnegativity(phi),
        "symmetry": check_symmetry(phi),
        "subadditivity": check_subadditivity(phi),
    }
    witnesses = tuple(c.witness for c in checks.values() if c.witness is not None)
    mode = EXACT if phi.k <= 2 else GRID
    return MinimalityReport(not witnesses, witnesses, mode, checks)


def subadditivity_on_grid(phi: PeriodicPLF, q: int) -> CheckResult:
    """Sampled subadditivity over all pairs of the 1/q grid."""
    return _subadditivity_grid(restrict_to_grid(phi, q), mode="grid")


def additive_index_pairs(model: FiniteGroupModel) -> list[tuple]:
    """Index pairs (a, b) with u(a) + u(b) = u(a + b), in lexicographic order."""
    den = common_denominator(model.values.values())
    vals = {a: int(v * den) for a, v in model.values.items()}
    keys = sorted(vals)
    q = model.q
    return [(a, b) for a in keys for b in keys
            if vals[a] + vals[b] == vals[tuple((x + y) % q for x, y in zip(a, b))]]


def additivity_set_on_grid(phi: PeriodicPLF, q: int) -> set:
    require_on_grid(phi, q)
    model = restrict_to_grid(phi, q)
    return {(model.point(a), model.point(b)) for a, b in additive_index_pairs(model)}


__all__ = [
    "CheckResult",
    "MinimalityReport",
    "Region",
    "ViolationWitness",
    "additive_index_pairs",
    "additivity_set_on_grid",
    "check_minimality",
    "check_origin_and_nonnegativity",
    "check_subadditivity",
    "check_symmetry",
    "regions",
    "subadditivity_on_grid",
    "worker_count",
]
