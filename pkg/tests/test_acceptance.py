"""End-to-end acceptance checks. Each check prints one PASS/FAIL line; the lines are
repeated in the pytest terminal summary. All comparisons are exact rationals; the
only tolerances are wall-clock budgets.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``.
"""
import csv
import io
import json
import random
import time
from fractions import Fraction

import pytest

from helpers import random_complete_fan, record
from toridiv.catalog import projective_plane, quadric_cone
from toridiv.cli import run
from toridiv.divisor import (
    NotQCartier,
    ToricDivisor,
    anticanonical,
    canonical,
    cartier_status,
    detect_quasi_polynomial,
    is_globally_generated,
    local_polyhedron,
    polytope_PD,
    prime_divisor,
    rational_cartier_data,
    section_hilbert_function,
    vertex_denominator,
)
from toridiv.exact_linear import dot, lcm_of_denominators
from toridiv.fan import locate
from toridiv.mld import (
    ACC_COLUMNS,
    U_E,
    acc_column_lp,
    acc_family,
    acc_family_fan,
    finite_level_valuation,
    pullback_coefficient,
)
from toridiv.polyhedra import h_to_v
from toridiv.qnef import (
    bisect_threshold,
    check_gg_conjecture,
    is_nef_qcartier,
    is_qnef,
    qcartierize,
    qd_facet_data,
    qnt,
)

ACC_RANGE = range(1, 31)
ACC_BUDGET_S = 60.0
CARTIER_BUDGET_S = 1.0
SECTIONS_BUDGET_S = 1.0
QUASI_POLY_BUDGET_S = 120.0
FINITE_LEVEL_MAX_K = 60
FAR_A = 1000
FAR_GAP = Fraction(1, 100)


def closed_form(a: int) -> Fraction:
    return Fraction(4 * a + 5, a + 2)


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def sample_local_lcm(d: ToricDivisor) -> int:
    f = d.fan
    return lcm_of_denominators(
        x for k in range(len(f.max_cones)) for v in h_to_v(local_polyhedron(d, k)).vertices for x in v
    )


@pytest.fixture(scope="module")
def acc_rows():
    t = time.perf_counter()
    code, out, err = cli("acc-family", "--a", f"{ACC_RANGE[0]}..{ACC_RANGE[-1]}")
    elapsed = time.perf_counter() - t
    assert code == 0, err
    return list(csv.DictReader(io.StringIO(out))), elapsed


# ---------------------------------------------------------------------------
# criterion 1: accumulating family


def test_acc_family_closed_form(acc_rows):
    rows, elapsed = acc_rows
    values = [Fraction(r["closed_form"]) for r in rows]
    exact = values == [closed_form(a) for a in ACC_RANGE] and [int(r["a"]) for r in rows] == list(ACC_RANGE)
    increasing = all(x < y for x, y in zip(values, values[1:]))
    below = all(v < 4 for v in values)
    ok = record(
        "criterion 1 closed form",
        exact and increasing and below and elapsed < ACC_BUDGET_S,
        f"a=1..30 in {elapsed:.2f}s (budget {ACC_BUDGET_S}s); exact={exact}, strictly increasing={increasing}, all < 4={below}",
    )
    assert ok


@pytest.mark.parametrize("column", ACC_COLUMNS)
def test_acc_lp_column_accumulates(acc_rows, column):
    rows, _ = acc_rows
    values = [Fraction(r[column]) for r in rows]
    limit = acc_column_lp(column, None)
    increasing = all(x < y for x, y in zip(values, values[1:]))
    below = all(v < limit for v in values)
    far = acc_column_lp(column, FAR_A)
    approaching = far < limit and limit - far < FAR_GAP
    ok = record(
        f"criterion 1(i) {column} accumulates from below",
        increasing and below and approaching,
        f"limit LP {limit}; values a=1,2,30: {values[0]}, {values[1]}, {values[-1]}; a={FAR_A}: {far}; "
        f"strictly increasing={increasing}, below limit={below}, within {FAR_GAP} of limit at a={FAR_A}={approaching}",
    )
    assert ok


def test_acc_lp_columns_against_closed_form(acc_rows):
    rows, _ = acc_rows
    matching = [c for c in ACC_COLUMNS if all(Fraction(r[c]) == Fraction(r["closed_form"]) for r in rows)]
    mismatched = [c for c in ACC_COLUMNS if c not in matching]
    # the routes inside acc_family already agree with direct LPs; rerun one row as an outside check
    direct = acc_family([7])[0]
    consistent = all(getattr(direct, c) == acc_column_lp(c, 7) for c in ACC_COLUMNS)
    ok = record(
        "criterion 1(ii) LP columns vs closed form",
        bool(matching) and consistent,
        f"equal for every a: {', '.join(matching) or 'none'}; differing (documented finding): {', '.join(mismatched) or 'none'}",
    )
    assert ok


# ---------------------------------------------------------------------------
# criterion 2: non-Q-Cartier detection


def test_non_q_cartier_detection():
    t = time.perf_counter()
    quad = cartier_status(prime_divisor(quadric_cone(), 0))
    family = {a: cartier_status(canonical(acc_family_fan(a))) for a in (1, 2, 3, 5, 10)}
    elapsed = time.perf_counter() - t
    flags = [isinstance(quad, NotQCartier)] + [isinstance(s, NotQCartier) for s in family.values()]
    ok = record(
        "criterion 2 non-Q-Cartier detection",
        all(flags) and elapsed < CARTIER_BUDGET_S,
        f"quadric prime divisor and K_X for a in 1,2,3,5,10 all NotQCartier={all(flags)} in {elapsed:.3f}s",
    )
    assert ok


# ---------------------------------------------------------------------------
# criterion 3: section counts


def test_projective_plane_section_counts():
    t = time.perf_counter()
    values = section_hilbert_function(prime_divisor(projective_plane(), 2), 10)
    elapsed = time.perf_counter() - t
    expected = [(m + 1) * (m + 2) // 2 for m in range(11)]
    ok = record(
        "criterion 3 projective plane section counts",
        values == expected and elapsed < SECTIONS_BUDGET_S,
        f"h0(mH), m=0..10 = {values} in {elapsed:.3f}s",
    )
    assert ok


# ---------------------------------------------------------------------------
# criterion 4: quasi-polynomial Hilbert functions


def test_hilbert_functions_become_quasi_polynomial():
    rng = random.Random(2024)
    t = time.perf_counter()
    failures = []
    periods = []
    for trial in range(20):
        n = 2 + trial % 2
        f = random_complete_fan(rng, n)
        d = ToricDivisor(f, tuple(rng.randint(-3, 3) for _ in f.rays))
        values = section_hilbert_function(d, 40)
        fit = detect_quasi_polynomial(values, n)
        if fit is None:
            failures.append((trial, d.coeffs))
            continue
        periods.append(fit.period)
        if vertex_denominator(d) % fit.period:
            failures.append((trial, "period does not divide the vertex denominator"))
    elapsed = time.perf_counter() - t
    ok = record(
        "criterion 4 quasi-polynomial section counts",
        not failures and elapsed < QUASI_POLY_BUDGET_S,
        f"20 divisors, m <= 40, periods {periods}, failures {failures}, {elapsed:.1f}s",
    )
    assert ok


# ---------------------------------------------------------------------------
# criterion 5: q-nef three ways


def test_qnef_agrees_with_nef_and_growing_multiples():
    rng = random.Random(43)
    discrepancies = []
    qnef_count = 0
    for trial in range(100):
        n = 2 + trial % 2
        f = random_complete_fan(rng, n)
        d = ToricDivisor(f, tuple(rng.randint(1, 4) for _ in f.rays))
        q = bool(is_qnef(d))
        nef = is_nef_qcartier(qcartierize(d, "relative").dbar)
        step = sample_local_lcm(d)
        growing = [bool(is_globally_generated(d.scaled(j * step))) for j in range(1, 6)]
        qnef_count += q
        if q != nef or any(g != q for g in growing):
            discrepancies.append((trial, d.coeffs, q, nef, growing))
    ok = record(
        "criterion 5 q-nef vs nef on Q-Cartierization vs global generation of multiples",
        not discrepancies,
        f"100 instances, {qnef_count} q-nef, discrepancies {discrepancies}",
    )
    assert ok


# ---------------------------------------------------------------------------
# criterion 6: globally generated divisors


def test_globally_generated_divisors_and_their_refinement(tmp_path):
    rng = random.Random(7)
    checked = tried = 0
    violations = []
    exit_codes = set()
    while checked < 30 and tried < 300:
        tried += 1
        n = 2 + tried % 2
        f = random_complete_fan(rng, n)
        d = ToricDivisor(f, tuple(rng.randint(1, 4) for _ in f.rays))
        if not is_globally_generated(d):
            continue
        checked += 1
        qc = qcartierize(d, "polar")
        p = polytope_PD(d)
        if set(h_to_v(p).vertices) != set(qc.cartier_data):
            violations.append((tried, "vertices of P_D differ from the Cartier data"))
        if not all(p.contains(m) for m in qd_facet_data(d)):
            violations.append((tried, "facet datum outside P_D"))
        if not all(w.value > 0 for w in qc.extracted_walls):
            violations.append((tried, "extracted wall with nonpositive crossing"))
        if set(qc.fan_prime.rays) != set(f.rays):
            violations.append((tried, "refinement adds rays"))
        fan_path = tmp_path / f"fan{tried}.json"
        div_path = tmp_path / f"div{tried}.json"
        fan_path.write_text(json.dumps(f.to_dict()))
        div_path.write_text(json.dumps(d.to_dict()))
        exit_codes.add(cli("qcartierize", fan_path, div_path)[0])
    ok = record(
        "criterion 6 globally generated divisors",
        checked == 30 and not violations and exit_codes == {0},
        f"{checked} divisors from {tried} draws, violations {violations}, CLI exit codes {sorted(exit_codes)}",
    )
    assert ok


# ---------------------------------------------------------------------------
# criterion 7: pullback


def random_query(rng, n):
    while True:
        u = tuple(rng.randint(-6, 6) for _ in range(n))
        if any(u):
            return u


def test_pullback_matches_classical_on_q_cartier():
    rng = random.Random(77)
    done, mismatches = 0, []
    while done < 100:
        n = rng.choice([2, 3])
        f = random_complete_fan(rng, n)
        d = ToricDivisor(f, tuple(Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in f.rays))
        if isinstance(cartier_status(d), NotQCartier):
            continue
        done += 1
        data = rational_cartier_data(d)
        for _ in range(3):
            u = random_query(rng, n)
            classical = -dot(data[locate(f, u)[0]], u)
            if pullback_coefficient(d, u).coefficient != classical:
                mismatches.append((f.rays, d.coeffs, u))
    ok = record("criterion 7 pullback equals classical pullback", not mismatches, f"100 divisors x 3 queries, mismatches {mismatches}")
    assert ok


def test_pullback_of_effective_divisors_is_effective():
    rng = random.Random(78)
    negatives = []
    for _ in range(100):
        n = rng.choice([2, 3])
        f = random_complete_fan(rng, n)
        d = ToricDivisor(f, tuple(rng.randint(0, 5) for _ in f.rays))
        for _ in range(3):
            u = random_query(rng, n)
            c = pullback_coefficient(d, u).coefficient
            if c < 0:
                negatives.append((d.coeffs, u, c))
    ok = record("criterion 7 pullback effectivity", not negatives, f"100 effective divisors x 3 queries, negative coefficients {negatives}")
    assert ok


def finite_level_cases():
    q = quadric_cone()
    for i in range(4):
        for sign in (1, -1):
            for u in ((1, 1, 1), (1, 1, 2), (2, 1, 1), (3, 1, 2), (1, 2, 3)):
                yield f"quadric {sign:+d}D{i} at {u}", prime_divisor(q, i, sign), u
    for a in (1, 2, 3, 5, 10):
        f = acc_family_fan(a)
        yield f"family a={a} K_X at u_E", canonical(f), U_E
        yield f"family a={a} -K_X at u_E", anticanonical(f), U_E


def test_finite_level_valuations_reach_lp():
    unstable = []
    worst = 0
    cases = 0
    for label, d, u in finite_level_cases():
        cases += 1
        target = pullback_coefficient(d, u).coefficient
        hit = None
        for k in range(1, FINITE_LEVEL_MAX_K + 1):
            v = finite_level_valuation(d, u, k)
            if v < target:
                unstable.append((label, k, "below LP", v, target))
                break
            if v == target:
                hit = k
                break
        # after the first hit the value must stay put on multiples
        if hit is None or finite_level_valuation(d, u, 2 * hit) != target:
            unstable.append((label, hit, target))
        else:
            worst = max(worst, hit)
    ok = record(
        "criterion 7 finite-level valuations reach the LP value",
        not unstable,
        f"{cases} cases, largest k needed {worst} (limit {FINITE_LEVEL_MAX_K}), failures {unstable}",
    )
    assert ok


# ---------------------------------------------------------------------------
# criterion 8: threshold exactness


def threshold_instances():
    h = prime_divisor(projective_plane(), 2)
    yield "projective plane -H", -h, h
    yield "projective plane 3H", h.scaled(3), h
    rng = random.Random(8)
    for trial in range(20):
        n = 2 + trial % 2
        f = random_complete_fan(rng, n)
        a = anticanonical(f)
        a = a.scaled(getattr(cartier_status(a), "index", 1))
        yield f"random {trial}", ToricDivisor(f, tuple(rng.randint(-3, 3) for _ in f.rays)), a


def test_threshold_is_exact():
    bad = []
    count = 0
    for label, d, a in threshold_instances():
        count += 1
        r = qnt(d, a)
        above = bool(is_qnef(d + a.scaled(r.value + 1)))
        below = bool(is_qnef(d + a.scaled(r.value - 1)))
        lo, hi = bisect_threshold(d, a, r.value - 2, r.value + 2, 30)
        if not above or below or not lo <= r.value <= hi:
            bad.append((label, r.value, above, below, (lo, hi)))
    ok = record("criterion 8 qnef threshold", not bad, f"{count} instances, q-nef at qnt+1 and not at qnt-1, inside bisection interval; failures {bad}")
    assert ok


# ---------------------------------------------------------------------------
# criterion 9: global generation of m(D + A)


def test_multiples_of_d_plus_ample_are_generated():
    rng = random.Random(9)
    findings = []
    for trial in range(20):
        n = 2 + trial % 2
        f = random_complete_fan(rng, n)
        minus_k = anticanonical(f)
        index = getattr(cartier_status(minus_k), "index", 1)
        a = minus_k.scaled(12 * max(1, n - 1) * index)
        d = ToricDivisor(f, tuple(rng.randint(-3, 3) for _ in f.rays))
        rep = check_gg_conjecture(d, a, 6)
        if not rep.all_generated:
            findings.append((trial, d.coeffs, [m for m, g in rep.rows if not g]))
    ok = record(
        "criterion 9 m(D + A) globally generated for m = 1..6",
        not findings,
        f"20 divisors, A = 12 max(1, n-1) L (-K_X); instances with a non-generated multiple: {findings}",
    )
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
