"""Replay a serialized facet certificate without recomputing it.

Only the stored rationals are used.  Every equation the certificate claims is
re-evaluated, the gradient system is rebuilt from the stored mu, anchors and
directions and solved again, and the result must match both gradient lists.
When the function itself is supplied, its gradients and values at the
directions and anchors are compared as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .certify import assemble_square_system, assemble_system
from .exact import cone_spans, dot, is_integral, norm_inf, proper_subsets_independent, rank, rank_and_solve
from .io import MalformedDocument, parse_rational, parse_vec


@dataclass
class VerifyResult:
    accepted: bool
    problems: list = field(default_factory=list)


def verify_certificate(report: dict, phi=None) -> VerifyResult:
    problems: list = []

    def need(cond, msg):
        if not cond:
            problems.append(msg)
        return cond

    try:
        if report.get("verdict") != "facet-certified":
            return VerifyResult(False, ["report is not a facet certificate"])
        k = report["k"]
        n = k + 1
        f = parse_vec(report["f"])
        c = report["certificate"]
        grads = [parse_vec(g) for g in c["gradients"]]
        recovered = [parse_vec(g) for g in c["recovered_gradients"]]
        dirs = [parse_vec(r) for r in c["directions"]]
        prods = [parse_vec(row) for row in c["direction_products"]]
        anchors = [parse_vec(a) for a in c["anchors"]]
        shifts = [tuple(w) for w in c["anchor_shifts"]]
        mu = [parse_vec(row) for row in c["mu"]]
        eps = parse_rational(c["epsilon"])
        cells = [[int(x) for x in row] for row in c["direction_cells"]]
        system = c["system"]
    except (KeyError, TypeError, MalformedDocument) as exc:
        return VerifyResult(False, [f"certificate is incomplete: {exc}"])

    shapes = (len(grads), len(recovered), len(dirs), len(prods), len(anchors), len(mu))
    if not need(all(s == n for s in shapes), f"expected {n} entries in every list, got {shapes}"):
        return VerifyResult(False, problems)
    vectors = grads + recovered + dirs + anchors
    if not need(all(len(v) == k for v in vectors) and len(f) == k, "vector length differs from k"):
        return VerifyResult(False, problems)

    need(len(set(grads)) == n, "gradients are not pairwise distinct")
    need(cone_spans(grads), "gradient cone does not span R^k")

    # anchors
    for i, (a, w) in enumerate(zip(anchors, shifts)):
        need(is_integral(tuple(x + y for x, y in zip(a, f))), f"anchor {i} is not in Z^k - f")
        need(tuple(Fraction(x) for x in w) == tuple(x + y for x, y in zip(a, f)), f"anchor {i} shift mismatch")
    need(cone_spans(anchors), "anchors do not span R^k")

    # directions
    need(cone_spans(dirs), "directions do not span R^k")
    need(proper_subsets_independent(dirs), "a proper subset of directions is dependent")
    need(all(norm_inf(r) == eps for r in dirs), "a direction does not have sup-norm epsilon")
    for i in range(n):
        for j in range(n):
            need(prods[i][j] == dot(dirs[i], grads[j]), f"direction product ({i},{j}) is wrong")
        others = [prods[i][j] for j in range(n) if j != i]
        need(len(set(others)) <= 1, f"direction {i} products differ across other classes")
        need(all(v > 0 for v in others), f"direction {i} has a nonpositive product")

    # segment masses and the integral equations
    for i, row in enumerate(mu):
        need(sum(row, Fraction(0)) == 1, f"mu row {i} does not sum to 1")
        need(all(x >= 0 for x in row), f"mu row {i} has a negative entry")
        lhs = sum((row[j] * dot(anchors[i], grads[j]) for j in range(n)), Fraction(0))
        need(lhs == 1, f"integral equation {i} evaluates to {lhs}")

    # rebuild and solve
    A, b = assemble_system(k, mu, anchors, dirs)
    sol = rank_and_solve(A, b)
    if need(sol.status == "unique", f"rebuilt system is {sol.status}"):
        got = [tuple(sol.solution[j * k:(j + 1) * k]) for j in range(n)]
        need(got == grads, "rebuilt system solution differs from the gradients")
        need(got == recovered, "rebuilt system solution differs from the recovered gradients")
    sq, sq_b = assemble_square_system(k, mu, anchors, dirs)
    need(system.get("status") == "unique", "stored system status is not unique")
    need(system.get("unknowns") == n * k, "stored unknown count differs")
    need(system.get("equations") == len(A), "stored equation count differs")
    need(system.get("nullspace") == [], "stored nullspace is not empty")
    need(system.get("rank") == sol.rank, "stored rank differs")
    need(system.get("square_rank") == rank(sq) == n * n, "square system is not of full rank")
    need(system.get("augmented_rank") == rank([[v] + r for r, v in zip(sq, sq_b)]), "augmented rank differs")
    need(system.get("anchor_matrix_rank") == rank([[Fraction(1)] + list(a) for a in anchors]) == n,
         "anchor matrix rank differs")
    blocks = [rank([list(dirs[j]) for j in range(n) if j != i]) for i in range(n)]
    need(system.get("direction_block_ranks") == blocks and all(r == k for r in blocks),
         "direction block ranks differ")

    need(len(cells) == n and all(len(row) == k for row in cells), "direction cell table has the wrong shape")

    if phi is not None:
        from .certify import fan_cone_contains, local_fan
        from .plf import evaluate, slope_partition

        partition = slope_partition(phi)
        need(partition.gradients == grads, "gradients differ from the function")
        fan = local_fan(phi)
        for i, row in enumerate(cells):
            others = [j for j in range(n) if j != i]
            for j, ci in zip(others, row):
                ok = any(fi == ci and cj == j and fan_cone_contains(verts, dirs[i]) for fi, cj, verts in fan)
                need(ok, f"direction {i} is not in the stated cell {ci} of class {j}")
        need(tuple(phi.f) == tuple(f), "f differs from the function")
        for i, r in enumerate(dirs):
            for j in range(n):
                if j != i:
                    need(evaluate(phi, r) == prods[i][j], f"function value at direction {i} differs")
        for i, a in enumerate(anchors):
            need(evaluate(phi, a) == 1, f"function value at anchor {i} is not 1")

    return VerifyResult(not problems, problems)
