from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupcert import catalog
from groupcert.exact import rank
from groupcert.minimality import additive_index_pairs, check_minimality
from groupcert.oracle import (
    cross_check,
    grid_solution_space,
    natural_q,
    oracle_extremality,
    oracle_minimality,
)
from groupcert.plf import FiniteGroupModel, GridMismatchError, restrict_to_grid, validate


def dense_rank(model: FiniteGroupModel) -> int:
    """Rank of the grid system built directly as a dense matrix."""
    keys = sorted(model.values)
    col = {a: i for i, a in enumerate(keys)}
    n = len(keys)
    rows = []
    row = [F(0)] * n
    row[col[keys[0]]] = F(1)
    rows.append(row)
    for a in keys:
        row = [F(0)] * n
        row[col[a]] += 1
        row[col[model.reflect(a)]] += 1
        rows.append(row)
    vals = model.values
    for a in keys:
        for b in keys:
            s = model.add(a, b)
            if vals[a] + vals[b] == vals[s]:
                row = [F(0)] * n
                row[col[a]] += 1
                row[col[b]] += 1
                row[col[s]] -= 1
                rows.append(row)
    return rank(rows)


def relabel(model: FiniteGroupModel, m: int) -> FiniteGroupModel:
    vals = {a: model.values[tuple(m * x % model.q for x in a)] for a in model.values}
    return FiniteGroupModel(model.q, model.k, model.f_index, vals)


def test_gmi_unique(gmi25):
    for q in (5, 10, 15):
        rep = oracle_extremality(gmi25, q)
        assert rep.verdict == "unique" and rep.rank == rep.unknowns == q


def test_free_middle_slope_refuted(fixtures):
    phi = fixtures["free_middle_slope"]
    assert check_minimality(phi).passed
    for q in (4, 12):
        rep = oracle_extremality(phi, q)
        assert rep.verdict == "degenerate" and rep.dimension >= 1
        assert rep.piecewise_on_cells and rep.refutes_extremality
        assert oracle_minimality(FiniteGroupModel(q, 1, (q // 4,), rep.plus)).passed
        assert rep.plus != rep.minus


def test_triangle_unique_at_natural_grid(triangle):
    q = natural_q(triangle)
    assert q == 12
    rep = oracle_extremality(triangle, q)
    assert rep.verdict == "unique" and rep.unknowns == 144


def test_grid_mismatch(gmi25):
    with pytest.raises(GridMismatchError):
        oracle_extremality(gmi25, 4)
    model = restrict_to_grid(gmi25, 4)
    assert model.f_index is None
    with pytest.raises(GridMismatchError):
        grid_solution_space(model)


def test_oracle_minimality_witnesses(fixtures):
    rep = oracle_minimality(restrict_to_grid(fixtures["spike"], 20))
    assert not rep.passed
    w = rep.checks["subadditivity"].witness
    assert w.points == ((F(1, 4),), (F(1, 4),))
    assert (w.lhs, w.rhs) == (F(1, 5), F(9, 10))
    assert rep.checks["symmetry"].witness.points == ((F(1, 20),),)
    rep = oracle_minimality(restrict_to_grid(fixtures["wrong_peak_2_5"], 5))
    w = rep.checks["symmetry"].witness
    assert w.points == ((0,),) and w.lhs == F(2, 3)


@pytest.mark.parametrize("name,q", [("gmi_2_5", 5), ("gmi_2_5", 10), ("free_middle_slope", 4),
                                    ("free_middle_slope", 12), ("triangle_lifting", 6)])
def test_rank_matches_dense_elimination(fixtures, name, q):
    phi = fixtures[name]
    model = restrict_to_grid(phi, q)
    if model.f_index is None:
        pytest.skip("f off grid")
    assert grid_solution_space(model).rank == dense_rank(model)


@pytest.mark.parametrize("name,f,q,m", [
    ("gmi", F(1, 2), 4, 3),
    ("gmi", F(1, 2), 8, 3),
    ("gmi", F(1, 2), 8, 5),
    ("free_middle_slope", None, 12, 5),
])
def test_rank_invariant_under_units_fixing_f(name, f, q, m):
    phi = catalog.gmi(f) if name == "gmi" else catalog.free_middle_slope()
    model = restrict_to_grid(phi, q)
    moved = relabel(model, m)
    assert grid_solution_space(moved).rank == grid_solution_space(model).rank
    assert len(additive_index_pairs(moved)) == len(additive_index_pairs(model))


def test_cross_check(gmi25, fixtures):
    rep = cross_check(gmi25, [5, 10])
    assert rep.consistent and [e["oracle"] for e in rep.entries] == ["unique", "unique"]
    rep = cross_check(fixtures["free_middle_slope"], [4])
    assert rep.consistent and rep.entries[0]["oracle"] == "degenerate"


def test_zero_f_grid():
    # f = 0 gives a table whose symmetry rows are inconsistent with u(0) = 0
    phi = validate(1, (0,), [(((0,), (1,)), (0,), 0)])
    assert not oracle_minimality(restrict_to_grid(phi, 3)).passed


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 12).flatmap(lambda d: st.tuples(st.just(d), st.integers(1, d - 1))))
def test_gmi_unique_on_its_grid(df):
    d, num = df
    f = F(num, d)
    phi = catalog.gmi(f)
    rep = oracle_extremality(phi, natural_q(phi))
    assert rep.verdict == "unique"
