"""Constructors for test and demonstration functions."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import (
    ContractViolation,
    Q,
    Vec,
    clip_polygon,
    common_denominator,
    convex_hull,
    cross2,
    dot,
    frac_part,
    merge_convex_pieces,
    polygon_area,
    vec,
)
from .plf import PeriodicPLF, validate


@dataclass(frozen=True)
class FixtureSpec:
    """A named fixture with the verdicts it is expected to produce.

    Expectations are documentation for humans and are re-derived by the test
    suite, never read back as truth.
    """

    name: str
    k: int
    f: tuple
    params: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)


def _sort_cells(cells):
    return sorted(cells, key=lambda c: (sorted(c[0]), c[0]))


def from_breakpoints(f, table: Sequence) -> PeriodicPLF:
    """k = 1 function interpolating ``(x, value)`` pairs from x = 0 to x = 1."""
    pts = [(Q(x), Q(y)) for x, y in table]
    if pts[0][0] != 0 or pts[-1][0] != 1:
        raise ContractViolation("breakpoint table must run from 0 to 1")
    cells = []
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x1 <= x0:
            raise ContractViolation("breakpoints must be strictly increasing")
        g = (y1 - y0) / (x1 - x0)
        cells.append((((x0,), (x1,)), (g,), y0 - g * x0))
    return validate(1, vec(f if isinstance(f, (tuple, list)) else (f,)), cells)


def gmi(f) -> PeriodicPLF:
    """Two-slope function with peak 1 at 1 - f."""
    f = Q(f)
    if not 0 < f < 1:
        raise ContractViolation(f"gmi needs 0 < f < 1, got {f}")
    return from_breakpoints(f, [(0, 0), (1 - f, 1), (1, 0)])


def wrong_peak(f) -> PeriodicPLF:
    """The gmi shape with its peak misplaced at f instead of 1 - f."""
    f = Q(f)
    if not 0 < f < 1:
        raise ContractViolation(f"wrong_peak needs 0 < f < 1, got {f}")
    return from_breakpoints(f, [(0, 0), (f, 1), (1, 0)])


def spike() -> PeriodicPLF:
    table = [(0, 0), (Fraction(1, 4), Fraction(1, 10)), (Fraction(1, 2), Fraction(9, 10)),
             (Fraction(3, 5), 1), (1, 0)]
    return from_breakpoints(Fraction(2, 5), table)


def free_middle_slope() -> PeriodicPLF:
    """Minimal 3-slope k = 1 function that is a midpoint of two gmi-like cuts.

    Breakpoints (0,0), (1/4,1/2), (1/2,1/2), (3/4,1), (1,0) with f = 1/4.  The
    value on the flat middle piece can move, so the function is not extreme.
    """
    table = [(0, 0), (Fraction(1, 4), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2)),
             (Fraction(3, 4), 1), (1, 0)]
    return from_breakpoints(Fraction(1, 4), table)


# ---------------------------------------------------------------------------
# k = 2 helpers


def _grid_triangles(q: int, diagonal: str = "main"):
    """Triangulate the 1/q grid of the unit square.

    ``main`` splits every grid square along (i,j)-(i+1,j+1); ``anti`` along
    (i+1,j)-(i,j+1).
    """
    tris = []
    for i, j in itertools.product(range(q), repeat=2):
        a = (Fraction(i, q), Fraction(j, q))
        b = (Fraction(i + 1, q), Fraction(j, q))
        c = (Fraction(i + 1, q), Fraction(j + 1, q))
        d = (Fraction(i, q), Fraction(j + 1, q))
        if diagonal == "main":
            tris += [(a, b, c), (a, c, d)]
        else:
            tris += [(a, b, d), (b, c, d)]
    return tris


def _affine_through(tri, values):
    """Gradient and offset of the affine map taking tri's vertices to values."""
    (x0, y0), (x1, y1), (x2, y2) = tri
    v0, v1, v2 = values
    det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    gx = ((v1 - v0) * (y2 - y0) - (v2 - v0) * (y1 - y0)) / det
    gy = ((x1 - x0) * (v2 - v0) - (x2 - x0) * (v1 - v0)) / det
    return (gx, gy), v0 - gx * x0 - gy * y0


def from_grid_values(f, q: int, value, diagonal: str = "main") -> PeriodicPLF:
    """k = 2 function interpolating ``value(i, j)`` at (i/q, j/q).

    ``value`` is read modulo q in both indices, so the result is periodic.
    """
    cells = []
    for tri in _grid_triangles(q, diagonal):
        vals = [Q(value(int(p[0] * q) % q, int(p[1] * q) % q)) for p in tri]
        g, off = _affine_through(tri, vals)
        cells.append((tri, g, off))
    return validate(2, vec(f), _sort_cells(cells))


def diagonal_lift(phi1: PeriodicPLF, f_target=None) -> PeriodicPLF:
    """theta(x, y) = phi1(x + y) on the square, for a k = 1 input."""
    if phi1.k != 1:
        raise ContractViolation("diagonal_lift takes a one-dimensional function")
    f1 = phi1.f[0]
    if f_target is None:
        f_target = (f1 / 2, f1 / 2)
    f_target = vec(f_target)
    if len(f_target) != 2 or frac_part((f_target[0] + f_target[1] - f1,))[0] != 0:
        raise ContractViolation(f"coordinates of f_target must sum to {f1} modulo 1")
    q = common_denominator([x for c in phi1.cells for v in c.simplex.vertices for x in v])
    q = common_denominator([Fraction(1, q)] + list(f_target))
    from .plf import evaluate

    # breakpoint lines x + y = c are unions of anti-diagonal grid edges
    return from_grid_values(f_target, q, lambda i, j: evaluate(phi1, (Fraction(i + j, q),)), "anti")


def random_plf(k: int, q: int, seed: int, shape: str = "any") -> PeriodicPLF:
    """Random rational function on the 1/q grid with value 0 at the origin.

    ``shape="concave"`` (k = 1 only) draws a concave breakpoint table, whose
    periodic extension is subadditive; ``"any"`` draws values independently.
    """
    rng = random.Random(seed)
    if q < 1:
        raise ContractViolation("q must be positive")
    f = tuple(Fraction(rng.randrange(q), q) for _ in range(k))
    if k == 1:
        if shape == "concave":
            # decreasing slopes summing to zero
            raw = sorted((Fraction(rng.randint(-3 * q, 3 * q), q) for _ in range(q)), reverse=True)
            mean = sum(raw, Fraction(0)) / q
            slopes = [s - mean for s in raw]
            ys = [Fraction(0)]
            for s in slopes:
                ys.append(ys[-1] + s / q)
            ys[-1] = Fraction(0)
            table = [(Fraction(i, q), ys[i]) for i in range(q + 1)]
        elif shape == "any":
            table = [(Fraction(0), Fraction(0))]
            table += [(Fraction(i, q), Fraction(rng.randint(0, 2 * q), 2 * q)) for i in range(1, q)]
            table.append((Fraction(1), Fraction(0)))
        else:
            raise ContractViolation(f"unknown shape {shape!r}")
        return from_breakpoints(f, table)
    if k == 2:
        if shape != "any":
            raise ContractViolation("only shape='any' is available for k = 2")
        vals = {(i, j): Fraction(rng.randint(0, 2 * q), 2 * q) for i in range(q) for j in range(q)}
        vals[(0, 0)] = Fraction(0)
        return from_grid_values(f, q, lambda i, j: vals[(i, j)], "main")
    raise ContractViolation("random_plf supports k in {1, 2}")


# ---------------------------------------------------------------------------
# Trivial lifting of a lattice-free triangle


def _simplify(poly):
    """Drop repeated and collinear vertices of a convex polygon."""
    pts = []
    for p in poly:
        if not pts or pts[-1] != p:
            pts.append(p)
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    changed = True
    while changed and len(pts) > 3:
        changed = False
        for i in range(len(pts)):
            if cross2(pts[i - 1], pts[i], pts[(i + 1) % len(pts)]) == 0:
                pts.pop(i)
                changed = True
                break
    return pts


def _split(poly, a, b):
    """Split a convex polygon by the line a . x = b into its two sides."""
    neg = clip_polygon(poly, a, b)
    pos = clip_polygon(poly, tuple(-x for x in a), -b)
    return _simplify(neg), _simplify(pos)


def _crosses(poly, a, b) -> bool:
    vals = [dot(a, p) - b for p in poly]
    return min(vals) < 0 < max(vals)


def _min_of_max_pieces(square, families):
    """Cells of min_w max_i L_{w,i} on a convex polygon.

    ``families`` maps a key w to a list of affine forms (g, c).  Returns a
    list of (polygon, g, c) with the function equal to g . x + c on each.
    """
    out = []
    stack = [(square, list(families))]
    while stack:
        poly, keys = stack.pop()
        if polygon_area(poly) == 0:
            continue
        affine = {}
        split = None
        # each convex max is affine on poly once one form dominates at every vertex
        for w in keys:
            forms = families[w]
            vals = [[dot(g, p) + c for p in poly] for g, c in forms]
            top = [i for i in range(len(forms)) if all(vals[i][v] >= max(vv[v] for vv in vals) for v in range(len(poly)))]
            if top:
                affine[w] = forms[top[0]]
        # prune keys that can never attain the minimum here
        ub = {}
        for w in keys:
            ub[w] = max(max(dot(g, p) + c for g, c in families[w]) for p in poly)
        best = min(ub.values())
        wbest = min((w for w in keys if ub[w] == best))
        alive = []
        for w in keys:
            lb = max(min(dot(g, p) + c for p in poly) for g, c in families[w])
            if w == wbest or lb < best:
                alive.append(w)
        for w in alive:
            if w not in affine:
                forms = families[w]
                for (g1, c1), (g2, c2) in itertools.combinations(forms, 2):
                    a = (g1[0] - g2[0], g1[1] - g2[1])
                    if a != (0, 0) and _crosses(poly, a, c2 - c1):
                        split = (a, c2 - c1)
                        break
                if split:
                    break
        if split is None:
            forms = [affine[w] for w in alive]
            vals = [[dot(g, p) + c for p in poly] for g, c in forms]
            low = [i for i in range(len(forms)) if all(vals[i][v] <= min(vv[v] for vv in vals) for v in range(len(poly)))]
            if low:
                g, c = forms[low[0]]
                out.append((poly, g, c))
                continue
            for (g1, c1), (g2, c2) in itertools.combinations(forms, 2):
                a = (g1[0] - g2[0], g1[1] - g2[1])
                if a != (0, 0) and _crosses(poly, a, c2 - c1):
                    split = (a, c2 - c1)
                    break
            assert split is not None, "no separating line found"
        left, right = _split(poly, *split)
        for part in (left, right):
            if len(part) >= 3:
                stack.append((part, alive))
    return out


def _merge_pieces(pieces):
    merged = merge_convex_pieces([(poly, (g, c)) for poly, g, c in pieces])
    return [(poly, g, c) for poly, (g, c) in merged]


def _fan_triangulate(pieces):
    cells = []
    for poly, g, c in pieces:
        poly = _simplify(convex_hull(poly))
        for i in range(1, len(poly) - 1):
            cells.append(((poly[0], poly[i], poly[i + 1]), g, c))
    return cells


def trivial_lifting(triangle: Sequence, f) -> PeriodicPLF:
    """Periodized gauge function of a lattice-free triangle with f inside.

    With psi the gauge of (triangle - f), the result is
    ``r -> min over w in Z^2 of psi(r + w)``.
    """
    f = vec(f)
    verts = [vec(v) for v in triangle]
    # facet forms a_i . r <= 1 for the translated triangle
    forms = []
    for i in range(3):
        p, r, o = verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]
        n = (r[1] - p[1], p[0] - r[0])
        if dot(n, o) > dot(n, p):
            n = (-n[0], -n[1])
        rhs = dot(n, p) - dot(n, f)
        if rhs <= 0:
            raise ContractViolation("f must lie in the interior of the triangle")
        forms.append(tuple(x / rhs for x in n))
    lo = [min(v[i] for v in verts) - f[i] for i in range(2)]
    hi = [max(v[i] for v in verts) - f[i] for i in range(2)]
    families = {}
    for w in itertools.product(range(-3, 4), repeat=2):
        # r + w must meet triangle - f for some r in the square
        if all(w[i] + 1 >= lo[i] and w[i] <= hi[i] for i in range(2)):
            families[w] = [(a, dot(a, w)) for a in forms]
    square = [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
              (Fraction(1), Fraction(1)), (Fraction(0), Fraction(1))]
    pieces = _merge_pieces(_min_of_max_pieces(square, families))
    cells = _fan_triangulate(pieces)
    return validate(2, f, _sort_cells(cells))


TRIANGLE = ((0, 0), (2, 0), (0, 2))
TRIANGLE_F = (Fraction(1, 2), Fraction(1, 2))


def triangle_lifting_fixture() -> PeriodicPLF:
    """Three-slope k = 2 function from the triangle conv{(0,0),(2,0),(0,2)}."""
    return trivial_lifting(TRIANGLE, TRIANGLE_F)


FIXTURES = {
    "gmi_2_5": FixtureSpec("gmi_2_5", 1, (Fraction(2, 5),), {"f": Fraction(2, 5)},
                           {"certify": "facet-certified"}),
    "wrong_peak_2_5": FixtureSpec("wrong_peak_2_5", 1, (Fraction(2, 5),), {"f": Fraction(2, 5)},
                                  {"certify": "hypothesis-failed", "stage": "minimality"}),
    "spike": FixtureSpec("spike", 1, (Fraction(2, 5),), {},
                         {"certify": "hypothesis-failed", "stage": "minimality"}),
    "free_middle_slope": FixtureSpec("free_middle_slope", 1, (Fraction(1, 4),), {},
                                     {"certify": "hypothesis-failed", "oracle": "degenerate"}),
    "diagonal_lift": FixtureSpec("diagonal_lift", 2, (Fraction(1, 5), Fraction(1, 5)),
                                 {"base": "gmi_2_5"},
                                 {"certify": "hypothesis-failed", "stage": "genuine-dimensionality"}),
    "triangle_lifting": FixtureSpec("triangle_lifting", 2, TRIANGLE_F, {"triangle": TRIANGLE},
                                    {"certify": "facet-certified", "oracle": "unique"}),
}


def build_fixture(name: str) -> PeriodicPLF:
    if name == "gmi_2_5":
        return gmi(Fraction(2, 5))
    if name == "wrong_peak_2_5":
        return wrong_peak(Fraction(2, 5))
    if name == "spike":
        return spike()
    if name == "free_middle_slope":
        return free_middle_slope()
    if name == "diagonal_lift":
        return diagonal_lift(gmi(Fraction(2, 5)), (Fraction(1, 5), Fraction(1, 5)))
    if name == "triangle_lifting":
        return triangle_lifting_fixture()
    raise KeyError(name)
