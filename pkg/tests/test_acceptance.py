"""Acceptance criteria 1 to 8, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line.  The lines are
also collected in ACCEPTANCE_LINES and repeated in the terminal summary.
"""

from __future__ import annotations

import copy
import json
import random
import time
from fractions import Fraction as F

import pytest

from groupcert import catalog
from groupcert.certify import FACET, certify_facet, segment_mu
from groupcert.exact import cone_spans, dot, is_integral, proper_subsets_independent
from groupcert.io import certificate_to_json
from groupcert.minimality import check_minimality, check_subadditivity, subadditivity_on_grid
from groupcert.oracle import natural_q, oracle_extremality
from groupcert.plf import evaluate, slope_partition
from groupcert.verify import verify_certificate

from conftest import ALL_FIXTURES
from test_verify import RATIONAL_KEYS, mutate, rational_paths

ACCEPTANCE_LINES: list = []

LISTED_F = [F(1, 5), F(2, 5), F(1, 2), F(3, 7), F(7, 11)]


def random_fs(n=20, seed=2024, max_den=30):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        d = rng.randint(2, max_den)
        f = F(rng.randint(1, d - 1), d)
        if f not in out and f not in LISTED_F:
            out.append(f)
    return out


GMI_F = LISTED_F + random_fs()


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def gmi_certificates():
    start = time.perf_counter()
    certs = {f: certify_facet(catalog.gmi(f)) for f in GMI_F}
    return certs, time.perf_counter() - start


@pytest.fixture(scope="module")
def triangle_certificate(triangle):
    start = time.perf_counter()
    cert = certify_facet(triangle)
    return cert, time.perf_counter() - start


def test_criterion_1_gmi_family(gmi_certificates):
    certs, elapsed = gmi_certificates
    bad = [f for f, c in certs.items()
           if c.verdict != FACET or c.system.solution != ((1 / (1 - f),), (-1 / f,))]
    report(1, not bad and elapsed < 5, f"{len(certs)} values of f, {len(bad)} wrong, {elapsed:.2f}s")


def test_criterion_2_oracle_agreement(gmi_certificates):
    certs, _ = gmi_certificates
    start = time.perf_counter()
    bad = []
    runs = 0
    for f, c in certs.items():
        if c.verdict != FACET:
            continue
        phi = catalog.gmi(f)
        for q in (f.denominator, 2 * f.denominator, 3 * f.denominator):
            runs += 1
            if oracle_extremality(phi, q).verdict != "unique":
                bad.append((f, q))
    elapsed = time.perf_counter() - start
    report(2, not bad and elapsed < 10, f"{runs} oracle runs, {len(bad)} not unique, {elapsed:.2f}s")


def test_criterion_3_negative_fixtures(fixtures):
    problems = []
    rep = check_minimality(fixtures["wrong_peak_2_5"])
    w = rep.checks["symmetry"].witness
    if rep.passed or w is None or w.points != ((0,),) or w.lhs != F(2, 3):
        problems.append("wrong_peak symmetry witness")
    rep = check_minimality(fixtures["spike"])
    w = rep.checks["subadditivity"].witness
    if rep.passed or w is None or w.points != ((F(1, 4),), (F(1, 4),)) or (w.lhs, w.rhs) != (F(1, 5), F(9, 10)):
        problems.append("spike subadditivity witness")
    cert = certify_facet(fixtures["diagonal_lift"])
    hyp = cert.hypotheses.get("genuine-dimensionality", {})
    if cert.stage != "genuine-dimensionality" or hyp.get("gradient_rank") != 1:
        problems.append("diagonal lift dimensionality")
    report(3, not problems, ", ".join(problems) or "all three witnesses exact")


def test_criterion_4_triangle(triangle, triangle_certificate):
    cert, cert_time = triangle_certificate
    start = time.perf_counter()
    problems = []
    p = slope_partition(triangle)
    if p.n != 3:
        problems.append(f"{p.n} slopes")
    if cert.verdict != FACET or not cone_spans(p.gradients):
        problems.append(f"verdict {cert.verdict}")
    elif cert.system.status != "unique" or list(cert.system.solution) != p.gradients:
        problems.append("system solution differs from gradients")
    q = natural_q(triangle)
    verdicts = [oracle_extremality(triangle, qq).verdict for qq in (q, 2 * q)]
    if verdicts != ["unique", "unique"]:
        problems.append(f"oracle {verdicts}")
    elapsed = cert_time + time.perf_counter() - start
    ok = not problems and elapsed < 60
    report(4, ok, (", ".join(problems) or f"certified, oracle unique at q={q},{2 * q}") + f", {elapsed:.2f}s")


def test_criterion_5_segment_identity(fixtures):
    rng = random.Random(5)
    failures = 0
    checked = 0
    for name in ALL_FIXTURES:
        phi = fixtures[name]
        p = slope_partition(phi)
        zero = (F(0),) * phi.k
        for _ in range(100):
            r = tuple(F(rng.randint(-60, 60), rng.randint(1, 12)) for _ in range(phi.k))
            mu = segment_mu(phi, p, r).masses
            checked += 1
            lhs = evaluate(phi, r) - evaluate(phi, zero)
            rhs = sum((m * dot(g, r) for m, g in zip(mu, p.gradients)), F(0))
            if sum(mu) != 1 or min(mu) < 0 or lhs != rhs:
                failures += 1
    gmi = fixtures["gmi_2_5"]
    special = segment_mu(gmi, slope_partition(gmi), (1,)).masses == (F(3, 5), F(2, 5))
    report(5, failures == 0 and special, f"{checked} targets, {failures} failures, gmi r=1 exact: {special}")


def test_criterion_6_linear_algebra(gmi_certificates, triangle_certificate):
    certs, _ = gmi_certificates
    all_certs = list(certs.values()) + [triangle_certificate[0]]
    problems = 0
    sets = 0
    for c in all_certs:
        if c.directions is not None:
            sets += 1
            dirs = list(c.directions.directions)
            if not cone_spans(dirs) or not proper_subsets_independent(dirs):
                problems += 1
            for i, r in enumerate(dirs):
                if any(dot(r, g) <= 0 for j, g in enumerate(c.gradients) if j != i):
                    problems += 1
        if c.anchors is not None:
            sets += 1
            A = c.anchors.anchors
            if not cone_spans(A) or not all(is_integral(tuple(a + b for a, b in zip(x, c.f))) for x in A):
                problems += 1
    report(6, problems == 0 and sets > 0, f"{sets} direction and anchor sets, {problems} violations")


def test_criterion_7_subadditivity_cross_check():
    disagreements = 0
    passes = fails = 0
    for seed in range(50):
        q = 2 + seed % 7
        phi = catalog.random_plf(1, q, seed, "concave" if seed % 2 else "any")
        res = check_subadditivity(phi)
        if res.passed:
            passes += 1
            if not subadditivity_on_grid(phi, 2 * q).passed:
                disagreements += 1
        else:
            fails += 1
            w = res.witness
            x, y = w.points
            if not evaluate(phi, x) + evaluate(phi, y) < evaluate(phi, (x[0] + y[0],)):
                disagreements += 1
    report(7, disagreements == 0, f"50 instances, {passes} pass, {fails} fail, {disagreements} disagreements")


def test_criterion_8_certificate_replay(gmi_certificates, triangle, triangle_certificate):
    certs, _ = gmi_certificates
    docs = [(catalog.gmi(f), certificate_to_json(c)) for f, c in certs.items() if c.verdict == FACET]
    docs.append((triangle, certificate_to_json(triangle_certificate[0])))
    docs = [(phi, json.loads(json.dumps(d))) for phi, d in docs]
    rejected_genuine = sum(not verify_certificate(copy.deepcopy(d)).accepted for _, d in docs)
    mutations = survived = 0
    for phi, d in docs:
        for k in RATIONAL_KEYS:
            for path in rational_paths(d[k]):
                full = (k,) + path
                mutations += 1
                # cell labels are replayed against the function itself
                against = phi if "direction_cells" in full else None
                if verify_certificate(mutate(d, full), against).accepted:
                    survived += 1
    ok = rejected_genuine == 0 and survived == 0
    report(8, ok, f"{len(docs)} certificates accepted: {rejected_genuine == 0}, "
                  f"{mutations} mutations, {survived} accepted")
