from __future__ import annotations

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupcert.exact import (
    ContractViolation,
    Simplex,
    affine_min_over_polytope,
    clip_polygon,
    cone_spans,
    convex_hull,
    dot,
    in_cone,
    nullspace,
    polygon_area,
    proper_subsets_independent,
    rank,
    rank_and_solve,
    segment_simplex_clip,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def brute_force_min(obj, cons, dim):
    """Minimum of an affine form over a bounded polytope by vertex enumeration."""
    c, c0 = obj
    best = None
    for rows in itertools.combinations(cons, dim):
        sol = rank_and_solve([list(a) for a, _ in rows], [b for _, b in rows])
        if sol.status != "unique":
            continue
        x = sol.solution
        if all(dot(a, x) <= b for a, b in cons):
            v = dot(c, x) + c0
            if best is None or v < best:
                best = v
    return best


# rank_and_solve


def test_one_by_one():
    rep = rank_and_solve([[2]], [1])
    assert rep.status == "unique" and rep.solution == (F(1, 2),)


def test_redundant_row():
    rep = rank_and_solve([[1, 0], [0, 1], [1, 0]], [3, 4, 3])
    assert rep.status == "unique" and rep.solution == (3, 4)


def test_gmi_two_equations():
    # (3/5) g1 = 1 and (-2/5) g2 = 1
    rep = rank_and_solve([[F(3, 5), 0], [0, F(-2, 5)]], [1, 1])
    assert rep.solution == (F(5, 3), F(-5, 2))


def test_inconsistent_and_multiple():
    assert rank_and_solve([[1, 1], [1, 1]], [0, 1]).status == "none"
    rep = rank_and_solve([[1, 1]], [2])
    assert rep.status == "multiple" and rep.dimension == 1


def test_dimension_mismatch():
    with pytest.raises(ContractViolation):
        rank_and_solve([[1, 2]], [1, 2])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_solution_reproduces_rhs(m, n, data):
    A = [[data.draw(small) for _ in range(n)] for _ in range(m)]
    y = [data.draw(small) for _ in range(n)]
    b = [dot(row, y) for row in A]
    rep = rank_and_solve(A, b)
    assert rep.status in ("unique", "multiple")
    assert [dot(row, rep.solution) for row in A] == b
    for v in rep.basis:
        assert all(dot(row, v) == 0 for row in A)
    assert rep.rank + len(nullspace(A, n)) == n


# LP


def test_lp_examples():
    res = affine_min_over_polytope(((F(1),), 0), [((F(-1),), 0), ((F(1),), 1)])
    assert res.status == "optimal" and res.value == 0 and res.point == (0,)
    tri = [((F(-1), F(0)), 0), ((F(0), F(-1)), 0), ((F(1), F(1)), 1)]
    res = affine_min_over_polytope(((F(1), F(1)), 0), tri)
    assert res.value == 0 and res.point == (0, 0)
    assert affine_min_over_polytope(((F(1),), 0), [((F(1),), 0), ((F(-1),), -1)]).status == "infeasible"
    assert affine_min_over_polytope(((F(1),), 0), [((F(1),), 0)]).status == "unbounded"


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 3), st.data())
def test_lp_matches_vertex_enumeration(dim, data):
    # box keeps the polytope bounded; extra random cuts
    cons = []
    for i in range(dim):
        e = tuple(F(int(i == j)) for j in range(dim))
        cons.append((e, F(2)))
        cons.append((tuple(-x for x in e), F(2)))
    for _ in range(data.draw(st.integers(0, 4))):
        cons.append((tuple(data.draw(small) for _ in range(dim)), data.draw(small)))
    obj = (tuple(data.draw(small) for _ in range(dim)), data.draw(small))
    res = affine_min_over_polytope(obj, cons, dim)
    expected = brute_force_min(obj, cons, dim)
    if expected is None:
        assert res.status == "infeasible"
    else:
        assert res.status == "optimal" and res.value == expected
        assert all(dot(a, res.point) <= b for a, b in cons)
        assert dot(obj[0], res.point) + obj[1] == res.value


def test_lp_with_duplicate_rows_keeps_projection():
    # merged rows with equal left-hand sides once lost constraints here
    h = F(1, 2)
    cons = [
        ((h, -h, 0, 0), 0), ((0, h, 0, 0), F(1, 4)), ((-h, 0, 0, 0), 0),
        ((0, 0, h, -h), F(1, 4)), ((0, 0, 0, h), F(1, 4)), ((0, 0, -h, 0), F(-1, 4)),
        ((h, -h, h, -h), 0), ((0, h, 0, h), h), ((-h, 0, -h, 0), F(-1, 4)),
    ]
    cons = [(tuple(F(x) for x in a), F(b)) for a, b in cons]
    obj = ((F(3, 2), F(3, 2), h, F(1)), F(-3, 4))
    res = affine_min_over_polytope(obj, cons, 4)
    assert res.value == brute_force_min(obj, cons, 4) == 0
    assert all(dot(a, res.point) <= b for a, b in cons)


# cones


def test_cone_examples():
    assert cone_spans([(F(5, 3),), (F(-5, 2),)])
    assert not cone_spans([(1, 1), (2, 2)])
    assert cone_spans([(1, 0), (0, 1), (-1, -1)])
    assert proper_subsets_independent([(1, 0), (0, 1), (-1, -1)])
    assert not proper_subsets_independent([(1, 0), (2, 0), (0, 1)])
    with pytest.raises(ContractViolation):
        cone_spans([])
    with pytest.raises(ContractViolation):
        proper_subsets_independent([(1, 0), (0, 1)])


vec2 = st.tuples(small, small)


@settings(max_examples=80, deadline=None)
@given(st.lists(vec2, min_size=1, max_size=4), vec2)
def test_spanning_cone_contains_everything(vs, x):
    if cone_spans(vs):
        assert in_cone(vs, x)
    elif rank([list(v) for v in vs]) == 2:
        # a full-rank non-spanning cone misses some coordinate direction
        units = [(1, 0), (-1, 0), (0, 1), (0, -1)]
        assert not all(in_cone(vs, u) for u in units)


@settings(max_examples=80, deadline=None)
@given(st.lists(vec2, min_size=3, max_size=3))
def test_spanning_triple_is_independent(vs):
    if cone_spans(vs):
        assert proper_subsets_independent(vs)


# simplices and segments


def test_segment_clip_examples():
    S = Simplex(((F(0),), (F(3, 5),)))
    assert segment_simplex_clip((0,), (1,), S) == (0, F(3, 5))
    T = Simplex(((F(0), F(0)), (F(1), F(0)), (F(1), F(1))))
    assert segment_simplex_clip((0, 0), (1, 1), T) == (0, 1)
    assert segment_simplex_clip((2, 2), (3, 3), T) is None
    assert segment_simplex_clip((F(1, 2), F(1, 4)), (F(1, 2), F(1, 4)), T) == (0, 0)


def test_degenerate_simplex():
    with pytest.raises(ContractViolation):
        Simplex(((F(0), F(0)), (F(1), F(1)), (F(2), F(2))))


SQUARE_MAIN = [
    Simplex(((F(0), F(0)), (F(1), F(0)), (F(1), F(1)))),
    Simplex(((F(0), F(0)), (F(1), F(1)), (F(0), F(1)))),
]
unit = st.fractions(min_value=0, max_value=1, max_denominator=12)


@settings(max_examples=80, deadline=None)
@given(st.tuples(unit, unit), st.tuples(unit, unit))
def test_clip_intervals_tile_segment(p, q):
    ivs = [iv for S in SQUARE_MAIN if (iv := segment_simplex_clip(p, q, S)) is not None]
    ivs.sort()
    if p == q:
        assert ivs and all(iv == (0, 0) for iv in ivs)
        return
    assert ivs[0][0] == 0 and max(hi for _, hi in ivs) == 1
    # consecutive pieces meet without interior overlap
    proper = [iv for iv in ivs if iv[0] < iv[1]]
    for (a0, a1), (b0, b1) in zip(proper, proper[1:]):
        assert a1 <= b0 or (a0, a1) == (b0, b1)
    covered = sum(hi - lo for lo, hi in {iv for iv in proper})
    assert covered == 1


def test_polygon_helpers():
    sq = [(F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))]
    assert polygon_area(sq) == 1
    half = clip_polygon(sq, (F(1), F(1)), F(1))
    assert polygon_area(half) == F(1, 2)
    assert convex_hull(sq + [(F(1, 2), F(1, 2))]) == sq
