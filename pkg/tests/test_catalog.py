from __future__ import annotations

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupcert import catalog
from groupcert.certify import certify_facet
from groupcert.exact import ContractViolation, dot
from groupcert.io import canonical_cells
from groupcert.minimality import check_minimality, check_subadditivity
from groupcert.plf import breakpoint_denominator, evaluate, slope_partition

TRIANGLE_NORMALS = [(F(-2), F(0)), (F(0), F(-2)), (F(1), F(1))]


def lifting_value(r):
    """min over nearby integer shifts of the gauge of the shifted triangle."""
    best = None
    for w in itertools.product(range(-3, 4), repeat=2):
        x = (r[0] + w[0], r[1] + w[1])
        v = max(dot(a, x) for a in TRIANGLE_NORMALS)
        best = v if best is None or v < best else best
    return best


def gmi_value(f, x):
    x = x - (x.numerator // x.denominator)
    return x / (1 - f) if x <= 1 - f else (1 - x) / f


unit = st.fractions(min_value=0, max_value=1, max_denominator=30)
rat = st.fractions(min_value=-2, max_value=2, max_denominator=30)


@settings(max_examples=80, deadline=None)
@given(rat, rat)
def test_triangle_fixture_matches_pointwise_lifting(triangle, x, y):
    assert evaluate(triangle, (x, y)) == lifting_value((x, y))


def test_triangle_fixture_shape(triangle):
    assert len(triangle.cells) == 10
    assert breakpoint_denominator(triangle) == 12
    assert sorted(slope_partition(triangle).gradients) == sorted(TRIANGLE_NORMALS)
    assert evaluate(triangle, (F(-1, 2), F(-1, 2))) == 1


@settings(max_examples=30, deadline=None)
@given(unit.filter(lambda f: 0 < f < 1), rat)
def test_gmi_values(f, x):
    assert evaluate(catalog.gmi(f), (x,)) == gmi_value(f, x)


def test_gmi_rejects_bad_f():
    for f in (0, 1, F(3, 2)):
        with pytest.raises(ContractViolation):
            catalog.gmi(f)


def test_wrong_peak_and_spike_values():
    wp = catalog.wrong_peak(F(2, 5))
    assert evaluate(wp, (F(2, 5),)) == 1 and evaluate(wp, (F(-2, 5),)) == F(2, 3)
    sp = catalog.spike()
    assert evaluate(sp, (F(1, 4),)) == F(1, 10) and evaluate(sp, (F(1, 2),)) == F(9, 10)


@settings(max_examples=30, deadline=None)
@given(rat, rat)
def test_diagonal_lift_is_composition(gmi25, lift, x, y):
    assert evaluate(lift, (x, y)) == evaluate(gmi25, (x + y,))


def test_diagonal_lift_contract():
    base = catalog.gmi(F(2, 5))
    with pytest.raises(ContractViolation):
        catalog.diagonal_lift(base, (F(1, 5), F(1, 4)))
    with pytest.raises(ContractViolation):
        catalog.diagonal_lift(catalog.build_fixture("diagonal_lift"))
    moved = catalog.diagonal_lift(base, (F(1, 10), F(3, 10)))
    assert check_minimality(moved).passed


def test_random_plf_is_deterministic():
    for k, q in ((1, 5), (2, 3)):
        a = catalog.random_plf(k, q, seed=7)
        b = catalog.random_plf(k, q, seed=7)
        assert canonical_cells(a) == canonical_cells(b) and a.f == b.f
        assert a.vertex_values == b.vertex_values
        assert evaluate(a, (F(0),) * k) == 0
    c = catalog.random_plf(1, 5, seed=8)
    assert c.vertex_values != catalog.random_plf(1, 5, seed=7).vertex_values


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10**6))
def test_concave_tables_are_subadditive(q, seed):
    phi = catalog.random_plf(1, q, seed, "concave")
    assert check_subadditivity(phi).passed


def test_random_plf_contract():
    with pytest.raises(ContractViolation):
        catalog.random_plf(3, 2, 0)
    with pytest.raises(ContractViolation):
        catalog.random_plf(2, 2, 0, "concave")
    with pytest.raises(ContractViolation):
        catalog.random_plf(1, 0, 0)


@pytest.mark.parametrize("name", sorted(catalog.FIXTURES))
def test_fixture_specs_hold(name):
    entry = catalog.FIXTURES[name]
    phi = catalog.build_fixture(name)
    assert phi.k == entry.k and tuple(phi.f) == entry.f
    cert = certify_facet(phi)
    assert cert.verdict == entry.expected["certify"]
    if "stage" in entry.expected:
        assert cert.stage == entry.expected["stage"]


def test_unknown_fixture():
    with pytest.raises(KeyError):
        catalog.build_fixture("nope")
