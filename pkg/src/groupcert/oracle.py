"""Brute-force extremality evidence on a finite grid.

The function is restricted to (1/q)Z^k / Z^k.  Any grid function u that is
minimal and additive wherever the restriction is additive solves

    u(0) = 0,   u(x) + u(-f-x) = 1,   u(a) + u(b) = u(a+b) for tight (a, b).

If the restriction is the only solution the verdict is ``unique``; otherwise
a nullspace direction h gives two distinct grid functions u +- eps h.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import rank_and_solve
from .minimality import (
    CheckResult,
    MinimalityReport,
    ViolationWitness,
    additive_index_pairs,
    check_minimality,
)
from .plf import (
    FiniteGroupModel,
    GridMismatchError,
    PeriodicPLF,
    breakpoint_denominator,
    require_on_grid,
    restrict_to_grid,
    validate,
)

MAX_HALVINGS = 20


@dataclass(frozen=True)
class OracleReport:
    verdict: str  # "unique" | "degenerate"
    q: int
    k: int
    unknowns: int
    equations: int
    rank: int
    dimension: int
    perturbation: dict | None = None
    epsilon: Fraction | None = None
    plus: dict | None = None
    minus: dict | None = None
    piecewise_on_cells: bool = False
    refutes_extremality: bool = False
    note: str = ""


def _fail(kind, points, lhs, rhs) -> CheckResult:
    return CheckResult(False, ViolationWitness(kind, tuple(points), lhs, rhs), "grid")


def oracle_minimality(model: FiniteGroupModel) -> MinimalityReport:
    """Exhaustive minimality test of a grid table.

    Each clause reports its own witness.  The subadditivity witness is the
    pair with the most negative ``u(a) + u(b) - u(a+b)``, ties broken
    lexicographically.
    """
    vals = model.values
    keys = sorted(vals)
    zero = keys[0]
    checks = {}

    low = min(vals.values())
    if low < 0:
        a = min(x for x in keys if vals[x] == low)
        checks["origin"] = _fail("negativity", [model.point(a)], low, Fraction(0))
    elif vals[zero] != 0:
        checks["origin"] = _fail("origin", [model.point(zero)], vals[zero], Fraction(0))
    else:
        checks["origin"] = CheckResult(True, mode="grid")

    if model.f_index is None:
        checks["symmetry"] = CheckResult(False, None, "grid")
    else:
        checks["symmetry"] = CheckResult(True, mode="grid")
        for a in keys:
            total = vals[a] + vals[model.reflect(a)]
            if total != 1:
                checks["symmetry"] = _fail("symmetry", [model.point(a)], total, Fraction(1))
                break

    worst = None
    for a in keys:
        for b in keys:
            s = model.add(a, b)
            gap = vals[a] + vals[b] - vals[s]
            if gap < 0 and (worst is None or gap < worst[0]):
                worst = (gap, a, b)
    if worst is None:
        checks["subadditivity"] = CheckResult(True, mode="grid")
    else:
        _, a, b = worst
        checks["subadditivity"] = _fail(
            "subadditivity", [model.point(a), model.point(b)], vals[a] + vals[b], vals[model.add(a, b)]
        )
    witnesses = tuple(c.witness for c in checks.values() if c.witness is not None)
    passed = all(c.passed for c in checks.values())
    return MinimalityReport(passed, witnesses, "grid", checks)


# ---------------------------------------------------------------------------
# exact sparse elimination


def _system_rows(model: FiniteGroupModel):
    """Equation rows as {column: coefficient}; column n holds the right side."""
    keys = sorted(model.values)
    col = {a: i for i, a in enumerate(keys)}
    n = len(keys)
    rows = []
    seen = set()

    def push(coeffs: dict, rhs):
        row = {c: Fraction(v) for c, v in coeffs.items() if v != 0}
        if rhs:
            row[n] = Fraction(rhs)
        key = tuple(sorted(row.items()))
        if row and key not in seen:
            seen.add(key)
            rows.append(row)

    push({col[keys[0]]: 1}, 0)
    for a in keys:
        r = model.reflect(a)
        coeffs: dict = {}
        coeffs[col[a]] = coeffs.get(col[a], 0) + 1
        coeffs[col[r]] = coeffs.get(col[r], 0) + 1
        push(coeffs, 1)
    for a, b in additive_index_pairs(model):
        if b < a:
            continue
        coeffs = {}
        for idx, c in ((a, 1), (b, 1), (model.add(a, b), -1)):
            coeffs[col[idx]] = coeffs.get(col[idx], 0) + c
        push(coeffs, 0)
    return keys, rows


def _eliminate(rows: Sequence[dict], n: int, stop_when_full: bool = True) -> dict:
    """Echelon pivots keyed by their smallest column; early exit at full rank."""
    pivots: dict = {}
    for raw in rows:
        row = dict(raw)
        while row:
            c = min(row)
            if c == n:
                raise ArithmeticError("grid system is inconsistent")
            if c not in pivots:
                lead = row[c]
                pivots[c] = {j: v / lead for j, v in row.items()}
                break
            factor = row[c]
            for j, v in pivots[c].items():
                nv = row.get(j, 0) - factor * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
        if stop_when_full and len(pivots) == n:
            break
    return pivots


PRIME = (1 << 61) - 1


def _rank_mod_p(rows: Sequence[dict], n: int, p: int = PRIME) -> int:
    """Rank of the coefficient part modulo a prime, with early exit at n.

    Full rank modulo p implies full rank over the rationals, since some
    n x n minor is then nonzero modulo p and hence nonzero.
    """
    pivots: dict = {}
    for raw in rows:
        row = {}
        for j, v in raw.items():
            if j < n:
                assert v.denominator == 1
                row[j] = v.numerator % p
        row = {j: v for j, v in row.items() if v}
        while row:
            c = min(row)
            if c not in pivots:
                inv = pow(row[c], -1, p)
                pivots[c] = {j: v * inv % p for j, v in row.items()}
                break
            factor = row[c]
            for j, v in pivots[c].items():
                nv = (row.get(j, 0) - factor * v) % p
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
        if len(pivots) == n:
            break
    return len(pivots)


def _nullspace(pivots: dict, n: int) -> list[list[Fraction]]:
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for fj in free:
        x = [Fraction(0)] * n
        x[fj] = Fraction(1)
        for c in sorted(pivots, reverse=True):
            x[c] = -sum((v * x[j] for j, v in pivots[c].items() if j != c and j < n), Fraction(0))
        basis.append(x)
    return basis


# ---------------------------------------------------------------------------


def _affine_on_cells(phi: PeriodicPLF, model: FiniteGroupModel, h: dict) -> bool:
    """True when h interpolates affinely on every cell of phi."""
    q = model.q
    for cell in phi.cells:
        verts = cell.simplex.vertices
        hv = [h[model.index(v)] for v in verts]
        lo, hi = cell.simplex.bbox()
        ranges = [range(int(l * q), int(u * q) + 1) for l, u in zip(lo, hi)]
        for idx in itertools.product(*ranges):
            x = tuple(Fraction(i, q) for i in idx)
            if not cell.simplex.contains(x):
                continue
            lam = cell.simplex.barycentric(x)
            if sum((l * v for l, v in zip(lam, hv)), Fraction(0)) != h[model.index(x)]:
                return False
    return True


def _cell_rows(phi: PeriodicPLF, model: FiniteGroupModel, keys) -> list[dict]:
    """Rows forcing a grid function to interpolate affinely on each cell."""
    col = {a: i for i, a in enumerate(keys)}
    q = model.q
    rows = []
    for cell in phi.cells:
        vcols = [col[model.index(v)] for v in cell.simplex.vertices]
        lo, hi = cell.simplex.bbox()
        ranges = [range(int(l * q), int(u * q) + 1) for l, u in zip(lo, hi)]
        for idx in itertools.product(*ranges):
            x = tuple(Fraction(i, q) for i in idx)
            if not cell.simplex.contains(x):
                continue
            row: dict = {col[model.index(x)]: Fraction(-1)}
            for c, lam in zip(vcols, cell.simplex.barycentric(x)):
                row[c] = row.get(c, 0) + lam
            row = {c: v for c, v in row.items() if v}
            if row:
                rows.append(row)
    return rows


def _perturbed_plf(phi: PeriodicPLF, model: FiniteGroupModel, h: dict, eps: Fraction) -> PeriodicPLF:
    cells = []
    for cell in phi.cells:
        verts = cell.simplex.vertices
        vals = [cell.value(v) + eps * h[model.index(v)] for v in verts]
        g, off = _affine_fit(verts, vals)
        cells.append((verts, g, off))
    return validate(phi.k, phi.f, cells)


def _affine_fit(verts, vals):
    k = len(verts[0])
    A = [list(v) + [Fraction(1)] for v in verts]
    sol = rank_and_solve(A, vals)
    assert sol.status == "unique"
    return tuple(sol.solution[:k]), sol.solution[k]


@dataclass(frozen=True)
class SolutionSpace:
    keys: tuple
    rows: tuple
    rank: int
    pivots: dict | None  # exact echelon form, only computed when rank < n

    @property
    def dimension(self) -> int:
        return len(self.keys) - self.rank


def grid_solution_space(model: FiniteGroupModel) -> SolutionSpace:
    """Rank of the grid system for a table that is assumed to solve it."""
    if model.f_index is None:
        raise GridMismatchError(f"f is not on the 1/{model.q} grid")
    keys, rows = _system_rows(model)
    n = len(keys)
    u = [model.values[a] for a in keys]
    for row in rows:
        lhs = sum((v * u[j] for j, v in row.items() if j < n), Fraction(0))
        assert lhs == row.get(n, 0), "grid table violates its own equations"
    if _rank_mod_p(rows, n) == n:
        return SolutionSpace(tuple(keys), tuple(rows), n, None)
    pivots = _eliminate(rows, n)
    return SolutionSpace(tuple(keys), tuple(rows), len(pivots), pivots)


def oracle_extremality(phi: PeriodicPLF, q: int) -> OracleReport:
    require_on_grid(phi, q)
    model = restrict_to_grid(phi, q)
    space = grid_solution_space(model)
    keys, rows, r, pivots = list(space.keys), list(space.rows), space.rank, space.pivots
    n = len(keys)
    if r == n:
        return OracleReport("unique", q, phi.k, n, len(rows), r, 0,
                            note="grid solution is unique; evidence for extremality at this grid")
    basis = _nullspace(pivots, n)
    hvec = basis[0]
    # prefer a direction that is affine on every cell of phi
    homogeneous = [{j: v for j, v in row.items() if j < n} for row in rows]
    cellwise = _nullspace(_eliminate(homogeneous + _cell_rows(phi, model, keys), n, False), n)
    if cellwise:
        hvec = cellwise[0]
    scale = max(abs(x) for x in hvec)
    h = {a: hvec[i] / scale for i, a in enumerate(keys)}

    eps = None
    plus = minus = None
    for m in range(MAX_HALVINGS + 1):
        e = Fraction(1, 2**m)
        mp = FiniteGroupModel(q, phi.k, model.f_index, {a: model.values[a] + e * h[a] for a in keys})
        mm = FiniteGroupModel(q, phi.k, model.f_index, {a: model.values[a] - e * h[a] for a in keys})
        if oracle_minimality(mp).passed and oracle_minimality(mm).passed:
            eps, plus, minus = e, mp.values, mm.values
            break

    on_cells = _affine_on_cells(phi, model, h)
    refutes = False
    note = "degenerate at grid scale only"
    if eps is not None and on_cells and phi.k <= 2:
        p1 = _perturbed_plf(phi, model, h, eps)
        p2 = _perturbed_plf(phi, model, h, -eps)
        refutes = check_minimality(p1).passed and check_minimality(p2).passed
        if refutes:
            note = "perturbation is piecewise linear on the same cells and both sides are minimal: not extreme"
    if eps is None:
        note = "degenerate; no perturbation size 1/2^m with m <= 20 keeps both sides minimal"
    return OracleReport("degenerate", q, phi.k, n, len(rows), r, n - r, h, eps, plus, minus,
                        on_cells, refutes, note)


def natural_q(phi: PeriodicPLF) -> int:
    """Smallest grid containing every breakpoint and f."""
    return breakpoint_denominator(phi)


@dataclass(frozen=True)
class CrossCheckReport:
    consistent: bool
    entries: tuple = ()
    defects: tuple = ()
    note: str = ""


def cross_check(phi: PeriodicPLF, qs: Sequence[int], certificate=None) -> CrossCheckReport:
    """Check the one-directional implications between exact and grid results."""
    from .certify import certify_facet

    exact = check_minimality(phi)
    cert = certificate if certificate is not None else certify_facet(phi)
    entries = []
    defects = []
    for q in qs:
        model = restrict_to_grid(phi, q)
        grid_min = oracle_minimality(model)
        rep = oracle_extremality(phi, q)
        entries.append({"q": q, "grid_minimal": grid_min.passed, "oracle": rep.verdict})
        if exact.passed and not grid_min.passed:
            defects.append({"q": q, "issue": "exact minimality passed but grid minimality failed",
                            "witnesses": grid_min.witnesses})
        if cert.verdict == "facet-certified" and rep.verdict != "unique":
            defects.append({"q": q, "issue": "facet-certified but grid solution not unique",
                            "perturbation": rep.perturbation})
    note = "no implication violated" if not defects else "implication violated"
    return CrossCheckReport(not defects, tuple(entries), tuple(defects), note)
