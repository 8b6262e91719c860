"""Exact rational linear algebra and low-dimensional polyhedral primitives.

Everything here works on :class:`fractions.Fraction`.  Vectors are tuples of
fractions, matrices are sequences of such tuples.  Nothing in this module
touches floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Vec = tuple  # tuple[Fraction, ...]
HalfSpace = tuple  # (a, b) meaning a . x <= b


class ContractViolation(ValueError):
    """Raised when a caller breaks an operation's documented preconditions."""


def Q(x) -> Fraction:
    """Coerce ints, strings like ``"-3/5"`` and fractions to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise ContractViolation("floats are not accepted; pass exact rationals")
    return Fraction(x)


def vec(xs: Iterable) -> Vec:
    return tuple(Q(x) for x in xs)


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Sequence, v: Sequence) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, u: Sequence) -> Vec:
    return tuple(c * a for a in u)


def frac_part(u: Sequence) -> Vec:
    """Reduce a vector modulo Z^k into [0, 1)^k."""
    return tuple(a - (a.numerator // a.denominator) for a in u)


def is_integral(u: Sequence) -> bool:
    return all(a.denominator == 1 for a in u)


def norm_inf(u: Sequence) -> Fraction:
    return max((abs(a) for a in u), default=Fraction(0))


def norm_1(u: Sequence) -> Fraction:
    return sum((abs(a) for a in u), Fraction(0))


def common_denominator(values: Iterable[Fraction]) -> int:
    return reduce(lcm, (Q(v).denominator for v in values), 1)


# ---------------------------------------------------------------------------
# Gaussian elimination


def _check_matrix(A: Sequence[Sequence]) -> int:
    if not A:
        return 0
    n = len(A[0])
    for row in A:
        if len(row) != n:
            raise ContractViolation("matrix rows have unequal lengths")
    return n


def row_reduce(A: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form.  Returns (rows, pivot_columns)."""
    if ncols is None:
        ncols = _check_matrix(A)
    M = [[Q(x) for x in row] for row in A]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                m = M[i][c]
                M[i] = [x - m * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


def rank(A: Sequence[Sequence]) -> int:
    if not A:
        return 0
    return len(row_reduce(A)[1])


def nullspace(A: Sequence[Sequence], ncols: int | None = None) -> list[Vec]:
    """Basis of {y : A y = 0}, one vector per free column."""
    if ncols is None:
        ncols = _check_matrix(A)
    if not A:
        return [tuple(Fraction(int(i == j)) for i in range(ncols)) for j in range(ncols)]
    M, pivots = row_reduce(A, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        y = [Fraction(0)] * ncols
        y[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            y[pc] = -M[r][fc]
        basis.append(tuple(y))
    return basis


@dataclass(frozen=True)
class SolveReport:
    """Outcome of :func:`rank_and_solve`.

    ``status`` is ``"none"``, ``"unique"`` or ``"multiple"``; ``solution`` is a
    particular solution whenever one exists and ``basis`` spans the
    homogeneous solution space.
    """

    status: str
    rank: int
    augmented_rank: int
    solution: Vec | None = None
    basis: tuple = ()

    @property
    def dimension(self) -> int:
        return len(self.basis)


def rank_and_solve(A: Sequence[Sequence], b: Sequence) -> SolveReport:
    ncols = _check_matrix(A)
    if len(b) != len(A):
        raise ContractViolation(f"right-hand side has length {len(b)}, expected {len(A)}")
    if not A:
        raise ContractViolation("empty system")
    aug = [list(row) + [Q(bi)] for row, bi in zip(A, b)]
    M, pivots = row_reduce(aug, ncols + 1)
    if ncols in pivots:
        return SolveReport("none", len(pivots) - 1, len(pivots))
    y = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        y[pc] = M[r][ncols]
    y = tuple(y)
    for row, bi in zip(A, b):
        assert dot(row, y) == Q(bi), "back-substitution failed exact re-check"
    basis = tuple(nullspace(A, ncols))
    status = "unique" if not basis else "multiple"
    return SolveReport(status, len(pivots), len(pivots), y, basis)


def det(A: Sequence[Sequence]) -> Fraction:
    n = len(A)
    M = [[Q(x) for x in row] for row in A]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            d = -d
        d *= M[c][c]
        for i in range(c + 1, n):
            if M[i][c]:
                m = M[i][c] / M[c][c]
                M[i] = [x - m * y for x, y in zip(M[i], M[c])]
    return d


def inverse(A: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(A)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    M, pivots = row_reduce(aug, n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ContractViolation("matrix is singular")
    return [row[n:] for row in M[:n]]


# ---------------------------------------------------------------------------
# Fourier-Motzkin linear programming


def _normalize(a: Sequence[Fraction], b: Fraction):
    """Scale a.x <= b to a primitive integer row.  Returns (a_int, b_int)."""
    d = common_denominator(list(a) + [b])
    ai = [int(x * d) for x in a]
    bi = int(b * d)
    g = reduce(gcd, ai, abs(bi)) or 1
    return tuple(x // g for x in ai), bi // g


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    point: Vec | None = None


def affine_min_over_polytope(objective, constraints: Sequence[HalfSpace], dim: int | None = None) -> LPResult:
    """Minimize ``c . x + c0`` subject to ``a . x <= b`` for every (a, b).

    ``objective`` is a pair ``(c, c0)``.  Solved exactly by Fourier-Motzkin
    elimination of the decision variables against an epigraph variable.  Rows
    with equal left-hand sides keep only the tightest bound.  The witness
    is recovered by back substitution, taking the smallest feasible value of
    each variable.
    """
    c, c0 = objective
    c = vec(c)
    d = len(c) if dim is None else dim
    if len(c) != d:
        raise ContractViolation("objective length does not match dimension")
    t = d  # epigraph variable index
    rows: dict = {}

    def put(store, a, b):
        old = store.get(a)
        if old is None or b < old:
            store[a] = b

    for idx, (a, b) in enumerate(constraints):
        a = vec(a)
        if len(a) != d:
            raise ContractViolation("constraint length does not match dimension")
        ai, bi = _normalize(list(a) + [Fraction(0)], Q(b))
        if not any(ai):
            if bi < 0:
                return LPResult("infeasible")
            continue
        put(rows, ai, bi)
    ai, bi = _normalize(list(c) + [Fraction(-1)], -Q(c0))
    put(rows, ai, bi)

    stages = []
    remaining = list(range(d))
    for _ in range(d):
        # eliminate the variable with the fewest generated rows
        def cost(v):
            p = sum(1 for a in rows if a[v] > 0)
            n = sum(1 for a in rows if a[v] < 0)
            return p * n - p - n

        v = min(remaining, key=cost)
        remaining.remove(v)
        stages.append((v, dict(rows)))
        pos = [(a, b) for a, b in rows.items() if a[v] > 0]
        neg = [(a, b) for a, b in rows.items() if a[v] < 0]
        new: dict = {}
        for a, b in rows.items():
            if a[v] == 0:
                put(new, a, b)
        for ap, bp in pos:
            for an, bn in neg:
                cp, cn = ap[v], -an[v]
                a = tuple(cn * x + cp * y for x, y in zip(ap, an))
                b = cn * bp + cp * bn
                if not any(a):
                    if b < 0:
                        return LPResult("infeasible")
                    continue
                g = reduce(gcd, a, abs(b)) or 1
                put(new, tuple(x // g for x in a), b // g)
        rows = new

    lower = None
    upper = None
    for a, b in rows.items():
        coef = a[t]
        if coef == 0:
            if b < 0:
                return LPResult("infeasible")
        elif coef < 0:
            val = Fraction(b, coef)
            lower = val if lower is None or val > lower else lower
        else:
            val = Fraction(b, coef)
            upper = val if upper is None or val < upper else upper
    if lower is None:
        # the epigraph row always gives an upper side; no lower side means the
        # objective is unbounded below unless the region is empty
        if _feasible_point(constraints, d) is None:
            return LPResult("infeasible")
        return LPResult("unbounded")
    if upper is not None and upper < lower:
        return LPResult("infeasible")

    x = [Fraction(0)] * (d + 1)
    x[t] = lower
    assigned = {t}
    for v, stage_rows in reversed(stages):
        lo = hi = None
        for a, b in stage_rows.items():
            if a[v] == 0:
                continue
            rest = b - sum(a[j] * x[j] for j in assigned)
            bound = Fraction(rest) / a[v]
            if a[v] > 0:
                hi = bound if hi is None or bound < hi else hi
            else:
                lo = bound if lo is None or bound > lo else lo
        if lo is not None:
            x[v] = lo
        elif hi is not None:
            x[v] = hi
        else:
            x[v] = Fraction(0)
        assigned.add(v)
    point = tuple(x[:d])
    for a, b in constraints:
        assert dot(vec(a), point) <= Q(b), "Fourier-Motzkin witness violates a constraint"
    value = dot(c, point) + Q(c0)
    assert value == lower, "Fourier-Motzkin witness does not attain the bound"
    return LPResult("optimal", value, point)


def _feasible_point(constraints, d):
    res = affine_min_over_polytope(((Fraction(0),) * d, 0), constraints, d)
    return res.point if res.status == "optimal" else None


def feasible(constraints: Sequence[HalfSpace], dim: int) -> Vec | None:
    """A point satisfying every constraint, or None."""
    return _feasible_point(constraints, dim)


# ---------------------------------------------------------------------------
# Cones


def in_cone(vectors: Sequence[Vec], target: Vec) -> bool:
    """True iff target is a nonnegative combination of vectors (exact LP)."""
    m = len(vectors)
    k = len(target)
    cons = []
    for j in range(k):
        row = tuple(v[j] for v in vectors)
        cons.append((row, target[j]))
        cons.append((tuple(-x for x in row), -target[j]))
    for i in range(m):
        cons.append((tuple(Fraction(-1 if i == l else 0) for l in range(m)), Fraction(0)))
    return feasible(cons, m) is not None


def cone_spans(vectors: Sequence[Sequence]) -> bool:
    """True iff the conic hull of ``vectors`` is all of R^k.

    Decided by testing that every signed unit vector lies in the cone.
    """
    vs = [vec(v) for v in vectors]
    if not vs:
        raise ContractViolation("cone_spans needs at least one vector")
    k = len(vs[0])
    if k == 0:
        raise ContractViolation("zero-dimensional input")
    if any(len(v) != k for v in vs):
        raise ContractViolation("vectors have different dimensions")
    if rank(vs) < k:
        return False
    for j in range(k):
        for s in (1, -1):
            e = tuple(Fraction(s if i == j else 0) for i in range(k))
            if not in_cone(vs, e):
                return False
    return True


def proper_subsets_independent(vectors: Sequence[Sequence]) -> bool:
    vs = [vec(v) for v in vectors]
    if not vs:
        raise ContractViolation("no vectors")
    k = len(vs[0])
    if len(vs) != k + 1:
        raise ContractViolation(f"expected {k + 1} vectors in R^{k}, got {len(vs)}")
    return all(rank(list(sub_)) == k for sub_ in itertools.combinations(vs, k))


# ---------------------------------------------------------------------------
# Simplices


@dataclass(frozen=True)
class Simplex:
    """Full-dimensional simplex given by k+1 affinely independent vertices."""

    vertices: tuple
    _bary: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(vec(v) for v in self.vertices)
        if not verts:
            raise ContractViolation("simplex without vertices")
        k = len(verts[0])
        if len(verts) != k + 1 or any(len(v) != k for v in verts):
            raise ContractViolation(f"a simplex in R^{k} needs {k + 1} vertices of length {k}")
        object.__setattr__(self, "vertices", verts)
        edges = [sub(v, verts[0]) for v in verts[1:]]
        M = [[edges[j][i] for j in range(k)] for i in range(k)]  # columns are edges
        if det(M) == 0:
            raise ContractViolation("simplex vertices are affinely dependent")
        Minv = inverse(M)
        # lambda_i(x) = Minv[i-1] . (x - v0) for i >= 1, lambda_0 = 1 - sum
        forms = []
        for i in range(k):
            coef = tuple(Minv[i])
            forms.append((coef, -dot(coef, verts[0])))
        c0 = tuple(-sum(f[0][j] for f in forms) for j in range(k))
        const0 = 1 - sum(f[1] for f in forms)
        object.__setattr__(self, "_bary", ((c0, const0),) + tuple(forms))

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def barycentric(self, x: Sequence) -> Vec:
        return tuple(dot(c, x) + c0 for c, c0 in self._bary)

    def contains(self, x: Sequence) -> bool:
        return all(l >= 0 for l in self.barycentric(x))

    def contains_interior(self, x: Sequence) -> bool:
        return all(l > 0 for l in self.barycentric(x))

    def halfspaces(self) -> list:
        """H-representation as (a, b) pairs with a . x <= b."""
        return [(tuple(-ci for ci in c), c0) for c, c0 in self._bary]

    def volume(self) -> Fraction:
        k = self.dim
        edges = [sub(v, self.vertices[0]) for v in self.vertices[1:]]
        fact = 1
        for i in range(2, k + 1):
            fact *= i
        return abs(det(edges)) / fact

    def bbox(self):
        k = self.dim
        return (tuple(min(v[i] for v in self.vertices) for i in range(k)),
                tuple(max(v[i] for v in self.vertices) for i in range(k)))

    def translate(self, w: Sequence) -> "Simplex":
        return Simplex(tuple(add(v, w) for v in self.vertices))


def segment_simplex_clip(p: Sequence, q: Sequence, S: Simplex):
    """Parameter interval of {p + t (q - p) : t in [0, 1]} inside S, or None.

    A degenerate segment (p = q) gives the point interval (0, 0) when p is in S.
    """
    p, q = vec(p), vec(q)
    d = sub(q, p)
    if not any(d):
        return (Fraction(0), Fraction(0)) if S.contains(p) else None
    lo, hi = Fraction(0), Fraction(1)
    for c, c0 in S._bary:
        alpha = dot(c, p) + c0
        beta = dot(c, d)
        # alpha + t beta >= 0
        if beta == 0:
            if alpha < 0:
                return None
        elif beta > 0:
            lo = max(lo, -alpha / beta)
        else:
            hi = min(hi, -alpha / beta)
        if lo > hi:
            return None
    return (lo, hi)


# ---------------------------------------------------------------------------
# Planar polygons (k = 2)


def cross2(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def polygon_area(poly: Sequence[Vec]) -> Fraction:
    n = len(poly)
    s = Fraction(0)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2


def convex_hull(points: Iterable[Vec]) -> list[Vec]:
    """Counter-clockwise hull without collinear points (monotone chain)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def clip_polygon(poly: Sequence[Vec], a: Sequence, b) -> list[Vec]:
    """Clip a convex polygon to the half-plane a . x <= b."""
    out: list = []
    n = len(poly)
    for i in range(n):
        P, R = poly[i], poly[(i + 1) % n]
        sp, sr = dot(a, P) - b, dot(a, R) - b
        if sp <= 0:
            out.append(P)
        if (sp < 0 < sr) or (sr < 0 < sp):
            t = sp / (sp - sr)
            out.append(tuple(p + t * (r - p) for p, r in zip(P, R)))
    # drop repeated points
    dedup: list = []
    for p in out:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def clip_polygon_many(poly: Sequence[Vec], halfspaces: Iterable[HalfSpace]) -> list[Vec]:
    out = list(poly)
    for a, b in halfspaces:
        if not out:
            break
        out = clip_polygon(out, a, b)
    return out


def polygon_halfspaces(poly: Sequence[Vec]) -> list:
    """Half-planes of a counter-clockwise convex polygon."""
    hs = []
    n = len(poly)
    for i in range(n):
        p, r = poly[i], poly[(i + 1) % n]
        # interior on the left: cross(p, r, x) >= 0
        a = (r[1] - p[1], -(r[0] - p[0]))
        hs.append((a, dot(a, p)))
    return hs


def merge_convex_pieces(pieces: Sequence) -> list:
    """Greedily merge ``(polygon, payload)`` pairs with equal payloads.

    Two polygons are merged when their convex hull has exactly their summed
    area, i.e. their union is convex.  Output order follows the first
    appearance of each payload and is deterministic.
    """
    groups: dict = {}
    for poly, payload in pieces:
        groups.setdefault(payload, []).append(list(poly))
    merged = []
    for payload, polys in groups.items():
        changed = True
        while changed:
            changed = False
            for i, j in itertools.combinations(range(len(polys)), 2):
                hull = convex_hull(polys[i] + polys[j])
                if polygon_area(hull) == polygon_area(polys[i]) + polygon_area(polys[j]):
                    polys[i] = hull
                    polys.pop(j)
                    changed = True
                    break
        for p in polys:
            merged.append((convex_hull(p), payload))
    return merged
