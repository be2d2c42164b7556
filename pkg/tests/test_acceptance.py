"""Acceptance suite: eight end-to-end criteria, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` to see the lines; each criterion
is timed against its budget and the budget is part of the verdict.
"""

import time
from fractions import Fraction

import pytest

from fixlab import conditions as cnd
from fixlab.conditions import ConditionId as C, Verdict
from fixlab.gallery import build
from fixlab.metric import Point, harmonic_space, real
from fixlab.orbits import Evidence, cauchy_diagnostics, picard_orbit
from fixlab.search import SearchConfig, find_separation

import lattice
import oracles

GRID = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))


class Criterion:
    def __init__(self, capsys, number, title, budget):
        self.capsys, self.number, self.title, self.budget = capsys, number, title, budget
        self.failures = []

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def expect(self, ok, what):
        if not ok:
            self.failures.append(what)

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        if elapsed > self.budget:
            self.failures.append(f"took {elapsed:.1f}s, budget {self.budget}s")
        status = "PASS" if not self.failures else "FAIL"
        with self.capsys.disabled():
            print(f"\n[{status}] criterion {self.number}: {self.title} ({elapsed:.2f}s / {self.budget}s)"
                  + ("" if not self.failures else " :: " + "; ".join(self.failures)))
        assert not self.failures, self.failures
        return False


def test_c1_halving_cm_k_witness(capsys):
    with Criterion(capsys, 1, "Tx = x/2 fails CM_K at (1, 0) with 1/2 vs 1/4", 1) as c:
        inst = build("HALVING", 10)
        rep = cnd.check_pointwise(C.CM_K, inst.space, inst.map, [(real(1), real(0))])
        c.expect(rep.verdict is Verdict.FAILS, f"verdict {rep.verdict}")
        c.expect((rep.witness.lhs, rep.witness.rhs) == (Fraction(1, 2), Fraction(1, 4)), "witness values")


def test_c2_piecewise(capsys):
    with Criterion(capsys, 2, "piecewise map: CM_B witness 23/1000 > 1/100, Kannan 1/3 on the 1/1000 grid", 30) as c:
        inst = build("PIECEWISE", 10)
        rep = cnd.check_pointwise(C.CM_B, inst.space, inst.map, [(real("1/2"), real("51/100"))])
        c.expect(rep.failed, "CM_B did not fail")
        c.expect((rep.witness.lhs, rep.witness.rhs) == (Fraction(23, 1000), Fraction(1, 100)), "witness values")
        grid = inst.space.points()
        c.expect(len(grid) >= 1001, f"grid has {len(grid)} points")
        k = cnd.kannan_constant_holds(inst.space, inst.map, grid, Fraction(1, 3))
        c.expect(not k.failed, f"Kannan 1/3 fails at {k.witness}")


def test_c3_l1_example(capsys):
    with Criterion(capsys, 3, "l1 family: CM_K up to 300, CJM_K decay at eps=2, K_IV positive, delta1=1/2", 60) as c:
        big = build("KANNAN_L1", 300)
        rep = cnd.check_pointwise(C.CM_K, big.space, big.map, cnd.all_pairs(big.space.points()))
        c.expect(not rep.failed and rep.checked == 601 * 600 // 2, "CM_K on all pairs")
        values = []
        for n in (3, 10, 100):
            inst = build("KANNAN_L1", n)
            got = cnd.modulus_at(C.CJM_K, inst.space, inst.map, cnd.point_domain(inst.space, n), Fraction(2))
            brute = oracles.brute_modulus(
                oracles.point_pairs("CJM_K", inst.space.distance, inst.map, inst.space.points()), Fraction(2))
            closed = Fraction(3, 2 * n) + Fraction(3, 2 * (n - 1))
            c.expect(got == brute == closed, f"N={n}: {got} vs brute {brute} vs closed {closed}")
            values.append(got)
        c.expect(values[0] > values[1] > values[2] > 0, f"not strictly decreasing {values}")
        inst = build("KANNAN_L1", 10)
        dom = cnd.orbit_domain(inst.space, inst.map, Point("X", 1), 10)
        for eps in (Fraction(1, 2), Fraction(1), Fraction(2)):
            v = cnd.modulus_at(C.K_IV, inst.space, inst.map, dom, eps)
            c.expect(v > 0, f"K_IV at {eps} is {v}")
        audit = cnd.kannan_equivalence_audit(inst.space, inst.map, Point("X", 1), 10)
        c.expect(audit.delta1 == Fraction(1, 2), f"delta1 {audit.delta1}")


def test_c4_harmonic(capsys):
    with Criterion(capsys, 4, "harmonic: CM_B to 500, gaps 1/(n+1), B2(1/3)=2/3, B1(1) shrinking below 1/100",
                   120) as c:
        space = harmonic_space(1100)
        t = build("HARMONIC", 3).map
        pts = space.points(500)
        rep = cnd.check_pointwise(C.CM_B, space, t, cnd.all_pairs(pts))
        c.expect(not rep.failed and rep.checked == 501 * 500 // 2, "CM_B on all pairs")
        orb = picard_orbit(space, t, Point("A", 0), 1001)
        c.expect(orb.gaps == tuple(Fraction(1, n + 1) for n in range(1001)), "gaps")
        a0 = Point("A", 0)
        dom = cnd.orbit_domain(space, t, a0, 1000)
        d = lambda p, q: oracles.harmonic_gap_sum(p.n, q.n)  # noqa: E731
        table = oracles.harmonic_table(1001)
        fast_d = lambda p, q: abs(table[p.n] - table[q.n])  # noqa: E731
        b2 = cnd.modulus_at(C.B2, space, t, dom, Fraction(1, 3))
        b2_brute = oracles.brute_modulus(oracles.orbit_pairs("B2", d, oracles.orbit_points(t, a0, 1000)),
                                         Fraction(1, 3))
        c.expect(b2 == b2_brute == Fraction(2, 3), f"B2 {b2} vs {b2_brute}")
        b1 = {}
        for n in (100, 1000):
            got = cnd.modulus_at(C.B1, space, t, cnd.orbit_domain(space, t, a0, n), Fraction(1))
            brute = oracles.brute_modulus(oracles.orbit_pairs("B1", fast_d, oracles.orbit_points(t, a0, n)), 1)
            c.expect(got == brute, f"B1 N={n}: {got} vs brute {brute}")
            b1[n] = got
        c.expect(b1[100] > b1[1000] > 0, f"B1 not shrinking {b1}")
        c.expect(b1[1000] < Fraction(1, 100), f"B1 N=1000 is {b1[1000]}")


def test_c5_cauchy_discrimination(capsys):
    with Criterion(capsys, 5, "harmonic orbit of length 5000: G-Cauchy evidence-for, Cauchy evidence-against",
                   120) as c:
        space = harmonic_space(5000)
        orb = picard_orbit(space, build("HARMONIC", 3).map, Point("A", 0), 5000, truncate=False)
        rep = cauchy_diagnostics(orb, 10, 500, lambda p: Fraction(p, 501), Fraction(2))
        c.expect(rep.g_cauchy is Evidence.FOR, f"g_cauchy {rep.g_cauchy}")
        c.expect(all(m <= Fraction(p, 501) for p, m in enumerate(rep.window_max, start=1)), "window bound")
        c.expect(rep.cauchy is Evidence.AGAINST, f"cauchy {rep.cauchy}")
        u, v = rep.spread_witness
        c.expect(space.distance(u, v) == rep.spread > 2, f"witness distance {rep.spread}")
        c.expect(rep.spread == oracles.harmonic_gap_sum(u.n, v.n), "witness re-evaluation")


def test_c6_lattice(capsys):
    with Criterion(capsys, 6, "implication lattice and antitonicity on the gallery and 100 random instances",
                   300) as c:
        bad = []
        for case in lattice.gallery_cases():
            bad += lattice.lattice_violations(case)
        cases = list(lattice.random_cases(100))
        c.expect(len(cases) == 100, f"{len(cases)} random cases")
        for case in cases:
            bad += lattice.lattice_violations(case)
        for name in ("KANNAN_L1", "HARMONIC"):
            case = next(k for k in lattice.gallery_cases() if k.name == name)
            bad += lattice.pair_antitone_violations(case, (3, 6, 10))
        c.expect(bad == [], f"{len(bad)} violations, first {bad[:1]}")


@pytest.mark.slow
def test_c7_exhaustion(capsys):
    with Criterion(capsys, 7, "exhaustive search to 4 points: CM_B/B1 and CM_K/K_IV exhausted, CM_B vs CM_K "
                              "separated both ways", 600) as c:
        cfg = SearchConfig(4, GRID)
        for hold, fail in ((C.CM_B, C.B1), (C.CM_K, C.K_IV)):
            res = find_separation([hold], [fail], cfg)
            c.expect(res.exhausted, f"{hold.value}/{fail.value}: {res.certificate()}")
        for hold, fail in ((C.CM_B, C.CM_K), (C.CM_K, C.CM_B)):
            res = find_separation([hold], [fail], cfg)
            c.expect(res.witness is not None, f"{hold.value}/{fail.value}: no witness")
            if res.witness is not None:
                w = res.witness
                c.expect(cnd.decide_finite(hold, w.space, w.map) and not cnd.decide_finite(fail, w.space, w.map),
                         "witness does not re-verify")


def test_c8_scaling(capsys):
    with Criterion(capsys, 8, "scaling by 3/2 multiplies every sampled modulus by 3/2", 120) as c:
        bad = []
        for case in lattice.gallery_cases():
            bad += lattice.scaling_violations(case, Fraction(3, 2))
        c.expect(bad == [], f"{len(bad)} violations, first {bad[:1]}")
