"""Continuous Z^k-periodic piecewise linear functions.

A function is stored by a finite list of simplicial cells covering the unit
cube [0,1]^k, each carrying an affine piece ``gradient . x + offset``.  The
periodic extension is implicit: evaluation reduces its argument modulo Z^k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact import (
    ContractViolation,
    Q,
    Simplex,
    Vec,
    add,
    common_denominator,
    affine_min_over_polytope,
    dot,
    frac_part,
    norm_1,
    vec,
)


class ValidationError(ValueError):
    """A candidate function description does not define a valid PLF."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class GapOrOverlapError(ValidationError):
    pass


class DiscontinuityError(ValidationError):
    pass


class NonSimplexError(ValidationError):
    pass


@dataclass(frozen=True)
class AffineCell:
    simplex: Simplex
    gradient: Vec
    offset: Fraction

    def value(self, x: Sequence) -> Fraction:
        return dot(self.gradient, x) + self.offset


@dataclass(frozen=True)
class PeriodicPLF:
    k: int
    f: Vec
    cells: tuple
    vertex_values: Mapping
    boxes: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if not self.boxes:
            object.__setattr__(self, "boxes", tuple(c.simplex.bbox() for c in self.cells))

    def locate(self, x: Sequence) -> list[int]:
        """Indices of cells whose closure contains x (x inside [0,1]^k)."""
        out = []
        for i, cell in enumerate(self.cells):
            lo, hi = self.boxes[i]
            if all(l <= xi <= h for l, xi, h in zip(lo, x, hi)) and cell.simplex.contains(x):
                out.append(i)
        return out

    def __call__(self, x: Sequence) -> Fraction:
        return evaluate(self, x)


@dataclass(frozen=True)
class SlopeClass:
    gradient: Vec
    members: tuple


@dataclass(frozen=True)
class SlopePartition:
    classes: tuple

    @property
    def n(self) -> int:
        return len(self.classes)

    @property
    def gradients(self) -> list[Vec]:
        return [c.gradient for c in self.classes]

    def class_of(self, cell_index: int) -> int:
        for j, c in enumerate(self.classes):
            if cell_index in c.members:
                return j
        raise KeyError(cell_index)


def cube_corners(k: int):
    return [tuple(Fraction(b) for b in bits) for bits in itertools.product((0, 1), repeat=k)]


def _parse_cell(raw, k: int):
    if isinstance(raw, Mapping):
        verts, grad, off = raw["vertices"], raw["gradient"], raw["offset"]
    else:
        verts, grad, off = raw
    verts = tuple(vec(v) for v in verts)
    grad = vec(grad)
    if len(grad) != k:
        raise NonSimplexError(f"gradient {grad} does not have length {k}")
    if len(verts) != k + 1 or any(len(v) != k for v in verts):
        raise NonSimplexError(f"cell with {len(verts)} vertices is not a simplex in R^{k}", verts)
    try:
        simplex = Simplex(verts)
    except ContractViolation as exc:
        raise NonSimplexError(f"degenerate cell {verts}: {exc}", verts) from exc
    return AffineCell(simplex, grad, Q(off))


def _overlap_point(a: Simplex, b: Simplex):
    """A point in the common interior of two simplices, or None."""
    k = a.dim
    cons = []
    # maximize s with lambda_i(x) >= s for all barycentric forms of a and b
    for S in (a, b):
        for c, c0 in S._bary:
            cons.append((tuple(-ci for ci in c) + (Fraction(1),), c0))
    cons.append(((Fraction(0),) * k + (Fraction(1),), Fraction(1)))  # s <= 1 keeps it bounded
    res = affine_min_over_polytope(((Fraction(0),) * k + (Fraction(-1),), 0), cons, k + 1)
    if res.status == "optimal" and res.value < 0:
        return res.point[:k]
    return None


def _boxes_meet(b1, b2) -> bool:
    return all(l1 < h2 and l2 < h1 for l1, h1, l2, h2 in zip(b1[0], b1[1], b2[0], b2[1]))


def _find_gap_point(cells: Sequence[AffineCell], k: int):
    """Best-effort search for a point of [0,1]^k covered by no cell."""
    den = common_denominator(x for c in cells for v in c.simplex.vertices for x in v)
    for refine in (2, 4, 8):
        q = den * refine
        for idx in itertools.product(range(q), repeat=k):
            x = tuple(Fraction(2 * i + 1, 2 * q) for i in idx)
            if not any(c.simplex.contains(x) for c in cells):
                return x
    return None


def validate(k: int, f: Sequence, cells: Iterable) -> PeriodicPLF:
    """Check a raw description and return the immutable function object.

    ``cells`` holds ``(vertices, gradient, offset)`` triples or mappings with
    those keys.  Raises a :class:`ValidationError` subclass with a witness
    when the cells fail to tile [0,1]^k, the pieces disagree at a vertex, or
    a cell is not a full-dimensional simplex.
    """
    if not isinstance(k, int) or k < 1:
        raise ContractViolation(f"dimension must be a positive integer, got {k!r}")
    f = vec(f)
    if len(f) != k:
        raise ContractViolation(f"f has length {len(f)}, expected {k}")
    f = frac_part(f)
    parsed = [_parse_cell(raw, k) for raw in cells]
    if not parsed:
        raise GapOrOverlapError("no cells given", None)

    for cell in parsed:
        for v in cell.simplex.vertices:
            if any(x < 0 or x > 1 for x in v):
                raise GapOrOverlapError(f"vertex {v} lies outside the unit cube", v)

    boxes = [c.simplex.bbox() for c in parsed]
    for i, j in itertools.combinations(range(len(parsed)), 2):
        if not _boxes_meet(boxes[i], boxes[j]):
            continue
        pt = _overlap_point(parsed[i].simplex, parsed[j].simplex)
        if pt is not None:
            raise GapOrOverlapError(f"cells {i} and {j} overlap", pt)

    total = sum((c.simplex.volume() for c in parsed), Fraction(0))
    if total != 1:
        pt = _find_gap_point(parsed, k)
        raise GapOrOverlapError(f"cells cover volume {total}, not 1", pt)

    def values_at(u):
        out = []
        for idx, other in enumerate(parsed):
            lo, hi = boxes[idx]
            if all(l <= x <= h for l, x, h in zip(lo, u, hi)) and other.simplex.contains(u):
                out.append((other.value(u), idx, u))
        return out

    def check(vals):
        first = vals[0][0]
        for val, idx, u in vals:
            if val != first:
                raise DiscontinuityError(
                    f"point {tuple(str(x) for x in u)} gets value {val} from cell {idx} "
                    f"but {first} from cell {vals[0][1]}",
                    {"point": u, "values": sorted({x[0] for x in vals})},
                )
        return first

    # continuity across shared faces first, then across the periodic boundary
    verts = sorted({v for c in parsed for v in c.simplex.vertices})
    direct = {}
    for v in verts:
        direct[v] = check(values_at(v))
    values: dict = {}
    shifts = list(itertools.product((-1, 0, 1), repeat=k))
    for v in verts:
        if v in values:
            continue
        images = [u for u in (add(v, w) for w in shifts) if all(0 <= x <= 1 for x in u)]
        vals = []
        for u in images:
            vals.extend(values_at(u) if u not in direct else [(direct[u], -1, u)])
        first = check(vals)
        for u in images:
            values[u] = first
    return PeriodicPLF(k, f, tuple(parsed), values, tuple(boxes))


def evaluate(phi: PeriodicPLF, x: Sequence) -> Fraction:
    x = frac_part(vec(x))
    if len(x) != phi.k:
        raise ContractViolation(f"point has length {len(x)}, expected {phi.k}")
    for i, cell in enumerate(phi.cells):
        lo, hi = phi.boxes[i]
        if all(l <= xi <= h for l, xi, h in zip(lo, x, hi)) and cell.simplex.contains(x):
            return cell.value(x)
    raise AssertionError(f"no cell contains {x}; the function was not validated")


def slope_partition(phi: PeriodicPLF) -> SlopePartition:
    order: list = []
    members: dict = {}
    for i, cell in enumerate(phi.cells):
        if cell.gradient not in members:
            order.append(cell.gradient)
            members[cell.gradient] = []
        members[cell.gradient].append(i)
    return SlopePartition(tuple(SlopeClass(g, tuple(members[g])) for g in order))


def lipschitz_constant(phi: PeriodicPLF) -> Fraction:
    """Global Lipschitz constant for the sup-norm: max L1 norm of a gradient."""
    return max(norm_1(c.gradient) for c in phi.cells)


def origin_incidence(phi: PeriodicPLF, partition: SlopePartition | None = None) -> list[bool]:
    if partition is None:
        partition = slope_partition(phi)
    corners = cube_corners(phi.k)
    return [
        any(phi.cells[i].simplex.contains(c) for i in cls.members for c in corners)
        for cls in partition.classes
    ]


def grid_points(k: int, q: int):
    """Index tuples of (1/q)Z^k intersected with [0,1)^k, in lexicographic order."""
    return list(itertools.product(range(q), repeat=k))


def on_grid(x: Sequence, q: int) -> bool:
    return all((xi * q).denominator == 1 for xi in x)


def breakpoint_denominator(phi: PeriodicPLF) -> int:
    """Smallest q with every cell vertex and f on (1/q)Z^k."""
    vals = [x for c in phi.cells for v in c.simplex.vertices for x in v] + list(phi.f)
    return common_denominator(vals)


@dataclass(frozen=True)
class FiniteGroupModel:
    """Values of a function on the grid (1/q)Z^k / Z^k.

    ``values`` maps integer index tuples ``i`` (the point ``i/q``) to exact
    values.  ``f_index`` is None when f is not a grid point.
    """

    q: int
    k: int
    f_index: tuple | None
    values: Mapping

    def point(self, idx: Sequence[int]) -> Vec:
        return tuple(Fraction(i, self.q) for i in idx)

    def index(self, x: Sequence) -> tuple:
        if not on_grid(x, self.q):
            raise ContractViolation(f"{x} is not on the 1/{self.q} grid")
        return tuple(int(xi * self.q) % self.q for xi in x)

    def add(self, a: Sequence[int], b: Sequence[int]) -> tuple:
        return tuple((x + y) % self.q for x, y in zip(a, b))

    def neg(self, a: Sequence[int]) -> tuple:
        return tuple((-x) % self.q for x in a)

    def reflect(self, a: Sequence[int]) -> tuple:
        """Index of -f - x."""
        return tuple((-fi - x) % self.q for fi, x in zip(self.f_index, a))


def restrict_to_grid(phi: PeriodicPLF, q: int) -> FiniteGroupModel:
    if not isinstance(q, int) or q < 1:
        raise ContractViolation(f"grid denominator must be a positive integer, got {q!r}")
    values = {}
    for idx in grid_points(phi.k, q):
        values[idx] = evaluate(phi, tuple(Fraction(i, q) for i in idx))
    f_index = tuple(int(x * q) for x in phi.f) if on_grid(phi.f, q) else None
    return FiniteGroupModel(q, phi.k, f_index, values)


class GridMismatchError(ValueError):
    """Breakpoints or f do not lie on the requested grid."""


def require_on_grid(phi: PeriodicPLF, q: int) -> None:
    if not isinstance(q, int) or q < 1:
        raise ContractViolation(f"grid denominator must be a positive integer, got {q!r}")
    if breakpoint_denominator(phi) and q % breakpoint_denominator(phi):
        raise GridMismatchError(
            f"breakpoints and f need denominator {breakpoint_denominator(phi)}, which does not divide {q}"
        )
