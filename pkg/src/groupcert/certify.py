"""Constructive facet certification for (k+1)-slope functions.

Pipeline: minimality, slope count, genuine k-dimensionality, origin
incidence, then direction discovery in the local fan at the origin, anchor
choice in Z^k - f, and the exact gradient system.  A function is reported
``facet-certified`` only when every hypothesis holds and the system has its
own gradients as unique solution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import (
    ContractViolation,
    Vec,
    cone_spans,
    dot,
    frac_part,
    norm_inf,
    proper_subsets_independent,
    rank,
    rank_and_solve,
    scale,
    segment_simplex_clip,
    sub,
    vec,
)
from .minimality import check_minimality
from .plf import (
    PeriodicPLF,
    SlopePartition,
    cube_corners,
    origin_incidence,
    slope_partition,
)

FACET = "facet-certified"
FAILED = "hypothesis-failed"
DEGENERATE = "system-degenerate"


class DirectionsNotFound(ValueError):
    def __init__(self, message: str, fan=None):
        super().__init__(message)
        self.fan = fan


class InconsistentSystemError(ArithmeticError):
    """The function's own gradients do not solve its system."""


class AnchorSearchExhausted(ValueError):
    pass


@dataclass(frozen=True)
class SegmentDecomposition:
    target: Vec
    masses: tuple
    intervals: tuple  # per class: tuple of (lo, hi) parameter intervals


@dataclass(frozen=True)
class DirectionSet:
    directions: tuple
    witnesses: tuple  # per direction: cell indices, one per other class
    epsilon: Fraction


@dataclass(frozen=True)
class AnchorSet:
    anchors: tuple
    shifts: tuple  # integer vectors w with anchor = w - f


@dataclass(frozen=True)
class SystemReport:
    status: str  # "unique" | "degenerate"
    unknowns: int
    equations: int
    rank: int
    solution: tuple | None
    nullspace: tuple
    square_rank: int
    augmented_rank: int
    anchor_matrix_rank: int
    direction_block_ranks: tuple
    matches_gradients: bool


@dataclass
class Certificate:
    verdict: str
    k: int
    f: Vec
    stage: str | None = None
    hypotheses: dict = field(default_factory=dict)
    gradients: tuple = ()
    directions: DirectionSet | None = None
    anchors: AnchorSet | None = None
    mu: tuple = ()
    system: SystemReport | None = None
    notes: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# hypotheses


def genuinely_k_dimensional(partition: SlopePartition) -> bool:
    """Gradient cone equals R^k.

    Sufficient for genuine k-dimensionality, and necessary for functions that
    meet the remaining hypotheses.
    """
    return cone_spans(partition.gradients)


def gradient_cone_rank(partition: SlopePartition) -> int:
    return rank([list(g) for g in partition.gradients])


def check_slope_hypothesis(partition: SlopePartition, k: int) -> bool:
    return partition.n <= k + 1


# ---------------------------------------------------------------------------
# segment decomposition


def _class_of_point(phi: PeriodicPLF, partition: SlopePartition, x: Sequence) -> int:
    x = frac_part(x)
    for i, cell in enumerate(phi.cells):
        lo, hi = phi.boxes[i]
        if all(l <= xi <= h for l, xi, h in zip(lo, x, hi)) and cell.simplex.contains(x):
            return partition.class_of(i)
    raise AssertionError(f"no cell contains {x}")


def segment_mu(phi: PeriodicPLF, partition: SlopePartition, r: Sequence) -> SegmentDecomposition:
    """Parameter length of [0, r] spent in each slope class."""
    r = vec(r)
    k = phi.k
    n = partition.n
    if all(x == 0 for x in r):
        masses = (Fraction(1),) + (Fraction(0),) * (n - 1)
        return SegmentDecomposition(r, masses, tuple(() for _ in range(n)))
    zero = (Fraction(0),) * k
    # integer translates of the cube that the segment can meet
    lo = [min(Fraction(0), x) for x in r]
    hi = [max(Fraction(0), x) for x in r]
    ranges = [range(int(l // 1) - 1, int(h // 1) + 1) for l, h in zip(lo, hi)]
    cuts = {Fraction(0), Fraction(1)}
    for w in itertools.product(*ranges):
        p, q = sub(zero, w), sub(r, w)
        # parameter range inside the unit cube; a single point adds no length
        t0, t1 = Fraction(0), Fraction(1)
        for a, b in zip(p, q):
            if a == b:
                if not 0 <= a <= 1:
                    t0, t1 = Fraction(1), Fraction(0)
                continue
            s0, s1 = (0 - a) / (b - a), (1 - a) / (b - a)
            t0, t1 = max(t0, min(s0, s1)), min(t1, max(s0, s1))
        if t0 >= t1:
            continue
        c0 = [a + t0 * (b - a) for a, b in zip(p, q)]
        c1 = [a + t1 * (b - a) for a, b in zip(p, q)]
        seg_lo = [min(a, b) for a, b in zip(c0, c1)]
        seg_hi = [max(a, b) for a, b in zip(c0, c1)]
        for i, cell in enumerate(phi.cells):
            blo, bhi = phi.boxes[i]
            if any(sh < bl or sl > bh for sl, sh, bl, bh in zip(seg_lo, seg_hi, blo, bhi)):
                continue
            iv = segment_simplex_clip(p, q, cell.simplex)
            if iv is not None:
                cuts.update(iv)
    cuts = sorted(cuts)
    masses = [Fraction(0)] * n
    intervals: list = [[] for _ in range(n)]
    for a, b in zip(cuts, cuts[1:]):
        mid = (a + b) / 2
        j = _class_of_point(phi, partition, scale(mid, r))
        masses[j] += b - a
        if intervals[j] and intervals[j][-1][1] == a:
            intervals[j][-1] = (intervals[j][-1][0], b)
        else:
            intervals[j].append((a, b))
    return SegmentDecomposition(r, tuple(masses), tuple(tuple(iv) for iv in intervals))


# ---------------------------------------------------------------------------
# directions


def local_fan(phi: PeriodicPLF):
    """Cells incident to a lattice point, translated so that point is 0.

    Returns a list of (cell index, class index, translated vertices).
    """
    partition = slope_partition(phi)
    fan = []
    for i, cell in enumerate(phi.cells):
        for c in cube_corners(phi.k):
            if c in cell.simplex.vertices:
                fan.append((i, partition.class_of(i), tuple(sub(v, c) for v in cell.simplex.vertices)))
    return fan


def _fan_epsilon(fan) -> Fraction:
    mags = [abs(x) for _, _, verts in fan for v in verts for x in v if x != 0]
    return min(mags) / 2


def fan_cone_contains(verts: Sequence[Vec], x: Sequence) -> bool:
    """x in the cone at 0 spanned by the nonzero vertices of a fan simplex."""
    gens = [v for v in verts if any(c != 0 for c in v)]
    sol = rank_and_solve([list(col) for col in zip(*gens)], list(x))
    return sol.status == "unique" and all(c >= 0 for c in sol.solution)


def find_directions(phi: PeriodicPLF, partition: SlopePartition) -> DirectionSet:
    k = phi.k
    n = partition.n
    if n != k + 1:
        raise DirectionsNotFound(f"need {k + 1} slope classes, found {n}")
    fan = local_fan(phi)
    if not fan:
        raise DirectionsNotFound("no cell touches a lattice point", fan)
    eps = _fan_epsilon(fan)
    # candidate rays: edges through the origin, scaled to sup-norm eps
    rays = []
    for _, _, verts in fan:
        for v in verts:
            if any(c != 0 for c in v):
                d = scale(eps / norm_inf(v), v)
                if d not in rays:
                    rays.append(d)
    rays.sort()
    options = []
    for i in range(n):
        found = []
        for d in rays:
            cells = []
            for j in range(n):
                if j == i:
                    continue
                hit = [ci for ci, cj, verts in fan if cj == j and fan_cone_contains(verts, d)]
                if not hit:
                    break
                cells.append(min(hit))
            else:
                found.append((d, tuple(cells)))
        if not found:
            raise DirectionsNotFound(f"no ray of the local fan lies in every class other than {i}", fan)
        options.append(found)
    for combo in itertools.product(*options):
        dirs = [d for d, _ in combo]
        if cone_spans(dirs) and proper_subsets_independent(dirs):
            ds = DirectionSet(tuple(dirs), tuple(c for _, c in combo), eps)
            _check_directions(ds, partition)
            return ds
    raise DirectionsNotFound("no choice of candidate rays spans R^k", fan)


def direction_products(ds: DirectionSet, gradients: Sequence[Vec]) -> list[list[Fraction]]:
    return [[dot(r, g) for g in gradients] for r in ds.directions]


def _check_directions(ds: DirectionSet, partition: SlopePartition) -> None:
    dirs = list(ds.directions)
    assert cone_spans(dirs)
    assert proper_subsets_independent(dirs)
    prods = direction_products(ds, partition.gradients)
    for i, row in enumerate(prods):
        others = [v for j, v in enumerate(row) if j != i]
        assert len(set(others)) <= 1, f"direction {i} sees unequal products {others}"
        assert all(v > 0 for v in others), f"direction {i} has a nonpositive product"


# ---------------------------------------------------------------------------
# anchors


def choose_anchors(f: Sequence, k: int) -> AnchorSet:
    f = vec(f)
    if len(f) != k:
        raise ContractViolation(f"f has length {len(f)}, expected {k}")
    if k == 1:
        default = [(1,), (0,)]
    else:
        default = [tuple(1 if t == s else 0 for t in range(k)) for s in range(k)] + [(-1,) * k]
    cand = [sub(w, f) for w in default]
    if cone_spans(cand):
        return AnchorSet(tuple(cand), tuple(default))
    shifts = list(itertools.product(range(-2, 3), repeat=k))
    for combo in itertools.combinations(shifts, k + 1):
        cand = [sub(w, f) for w in combo]
        if cone_spans(cand):
            return AnchorSet(tuple(cand), tuple(combo))
    raise AnchorSearchExhausted(f"no spanning anchor set for f = {f}")


# ---------------------------------------------------------------------------
# the gradient system


def assemble_system(k: int, mu, anchors, directions):
    """Rows of the integral and direction equations over g^1..g^{k+1}."""
    n = k + 1
    A, b = [], []
    for i in range(n):
        row = [Fraction(0)] * (n * k)
        for j in range(n):
            for t in range(k):
                row[j * k + t] += mu[i][j] * anchors[i][t]
        A.append(row)
        b.append(Fraction(1))
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for j, l in itertools.combinations(others, 2):
            row = [Fraction(0)] * (n * k)
            for t in range(k):
                row[j * k + t] += directions[i][t]
                row[l * k + t] -= directions[i][t]
            A.append(row)
            b.append(Fraction(0))
    return A, b


def assemble_square_system(k: int, mu, anchors, directions):
    """Square form with one extra unknown z_i per direction.

    Unknowns are g^1..g^{k+1} followed by z; the direction rows read
    r^j . g^i - z_j = 0 for j != i.
    """
    n = k + 1
    width = n * k + n
    A, b = [], []
    for i in range(n):
        row = [Fraction(0)] * width
        for j in range(n):
            for t in range(k):
                row[j * k + t] = mu[i][j] * anchors[i][t]
        A.append(row)
        b.append(Fraction(1))
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            row = [Fraction(0)] * width
            for t in range(k):
                row[i * k + t] = directions[j][t]
            row[n * k + j] = Fraction(-1)
            A.append(row)
            b.append(Fraction(0))
    return A, b


def build_and_solve_system(phi: PeriodicPLF, partition: SlopePartition, D: DirectionSet, A: AnchorSet,
                           mu=None) -> SystemReport:
    k = phi.k
    n = k + 1
    if mu is None:
        mu = [segment_mu(phi, partition, a).masses for a in A.anchors]
    rows, rhs = assemble_system(k, mu, A.anchors, D.directions)
    own = [x for g in partition.gradients for x in g]
    for row, v in zip(rows, rhs):
        if dot(row, own) != v:
            raise InconsistentSystemError(f"the function's gradients violate an equation: {row} = {v}")
    sol = rank_and_solve(rows, rhs)
    sq, sq_b = assemble_square_system(k, mu, A.anchors, D.directions)
    square_rank = rank(sq)
    augmented_rank = rank([[v] + row for row, v in zip(sq, sq_b)])
    anchor_rank = rank([[Fraction(1)] + list(a) for a in A.anchors])
    block_ranks = tuple(rank([list(D.directions[j]) for j in range(n) if j != i]) for i in range(n))
    if sol.status == "unique":
        solution = tuple(tuple(sol.solution[j * k:(j + 1) * k]) for j in range(n))
        return SystemReport("unique", n * k, len(rows), sol.rank, solution, (), square_rank, augmented_rank,
                            anchor_rank, block_ranks, list(solution) == partition.gradients)
    return SystemReport("degenerate", n * k, len(rows), sol.rank, None, tuple(sol.basis), square_rank,
                        augmented_rank, anchor_rank, block_ranks, False)


# ---------------------------------------------------------------------------


def certify_facet(phi: PeriodicPLF) -> Certificate:
    k = phi.k
    partition = slope_partition(phi)
    cert = Certificate(FAILED, k, phi.f, gradients=tuple(partition.gradients))

    def fail(stage):
        if cert.stage is None:
            cert.stage = stage

    mini = check_minimality(phi)
    cert.hypotheses["minimality"] = {"passed": mini.passed, "mode": mini.mode, "witnesses": mini.witnesses}
    if mini.mode != "exact":
        cert.notes.append("minimality is grid-verified only in this dimension, so no certificate is issued")
        fail("minimality")
        return cert
    if not mini.passed:
        fail("minimality")
        return cert

    slopes_ok = check_slope_hypothesis(partition, k)
    cert.hypotheses["slope-count"] = {"passed": slopes_ok, "count": partition.n, "limit": k + 1}
    if not slopes_ok:
        fail("slope-count")

    genuine = genuinely_k_dimensional(partition)
    cert.hypotheses["genuine-dimensionality"] = {
        "passed": genuine,
        "gradient_rank": gradient_cone_rank(partition),
    }
    if not genuine:
        fail("genuine-dimensionality")

    incidence = origin_incidence(phi, partition)
    cert.hypotheses["origin-incidence"] = {"passed": all(incidence), "per_class": incidence}
    if not all(incidence):
        fail("origin-incidence")

    if slopes_ok and genuine:
        # a spanning cone needs at least k+1 generators, so the count is exact
        assert partition.n == k + 1, "slope count and spanning gradient cone disagree"

    if cert.stage is not None:
        return cert

    try:
        D = find_directions(phi, partition)
    except DirectionsNotFound as exc:
        cert.hypotheses["directions"] = {"passed": False, "error": str(exc)}
        fail("directions")
        return cert
    cert.directions = D
    cert.hypotheses["directions"] = {"passed": True}

    A = choose_anchors(phi.f, k)
    cert.anchors = A
    cert.mu = tuple(segment_mu(phi, partition, a).masses for a in A.anchors)
    cert.system = build_and_solve_system(phi, partition, D, A, cert.mu)
    if cert.system.status == "unique" and cert.system.matches_gradients:
        cert.verdict = FACET
    else:
        cert.verdict = DEGENERATE
        fail("system")
    return cert
