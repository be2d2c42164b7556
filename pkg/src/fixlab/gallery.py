"""Built-in example constructions, each with machine-checkable facts."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import conditions as cnd
from .conditions import ConditionId as C
from .metric import (
    HARMONIC,
    ZERO,
    GridSpace,
    MetricSpace,
    Point,
    SelfMap,
    fmt,
    harmonic_space,
    l1_kannan_map,
    l1_kannan_space,
    piecewise_linear_map,
    real,
    shift_map,
    verify_triangle,
)
from .orbits import cauchy_diagnostics, picard_orbit, solve_fixed_point

DEFAULT_GRID_STEP = Fraction(1, 1000)


class GalleryId(str, enum.Enum):
    HALVING = "HALVING"
    PIECEWISE = "PIECEWISE"
    KANNAN_L1 = "KANNAN_L1"
    HARMONIC = "HARMONIC"

    @classmethod
    def parse(cls, text: str) -> "GalleryId":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown gallery id {text!r}; expected one of {[g.value for g in cls]}") from None


DESCRIPTIONS = {
    GalleryId.HALVING: "Tx = x/2 on a rational grid of [0, 1]",
    GalleryId.PIECEWISE: "Tx = x/4 on [0, 1/2], x/5 on (1/2, 1], rational grid of [0, 1]",
    GalleryId.KANNAN_L1: "x_n=(3+4/n)e_n, u_n=(1+1/n)e_n, 0 in l1; Tx_n=u_n, Tu_n=0, T0=0",
    GalleryId.HARMONIC: "a_n = 1 + 1/2 + ... + 1/n on the real line; Ta_n = a_{n+1}",
}


@dataclass(frozen=True)
class FactOutcome:
    passed: bool
    detail: str


@dataclass(frozen=True)
class CertifiedFact:
    description: str
    subject: str
    expected: str
    operation: str
    checker: Callable[[], FactOutcome] = field(repr=False, compare=False)

    def check(self) -> FactOutcome:
        return self.checker()


@dataclass(frozen=True)
class GalleryInstance:
    id: GalleryId
    cutoff: int
    space: MetricSpace
    map: SelfMap
    facts: tuple[CertifiedFact, ...]
    witnesses: tuple[tuple[Point, Point], ...] = ()


def _show(value) -> str:
    if isinstance(value, (str, bool)):
        return str(value)
    if isinstance(value, tuple):
        shown = [_show(v) for v in value[:6]]
        return "(" + ", ".join(shown) + (", ...)" if len(value) > 6 else ")")
    if isinstance(value, Point):
        return value.label
    return fmt(value)


def _expect_equal(actual, expected) -> FactOutcome:
    return FactOutcome(actual == expected, f"got {_show(actual)}, expected {_show(expected)}")


def _report_outcome(report: cnd.ConditionReport, want_fail: bool) -> FactOutcome:
    ok = report.failed == want_fail
    if report.witness:
        w = report.witness
        detail = f"{report.verdict.value} at {[p.label for p in w.where]}: lhs {fmt(w.lhs)} vs rhs {fmt(w.rhs)}"
    else:
        detail = f"{report.verdict.value} over {report.checked} pairs"
    return FactOutcome(ok, detail)


def _fact(description, subject, expected, operation, checker) -> CertifiedFact:
    return CertifiedFact(description, subject, expected, operation, checker)


def build(gid: GalleryId | str, cutoff: int, grid_step: Fraction = DEFAULT_GRID_STEP) -> GalleryInstance:
    """Construct a gallery example truncated at ``cutoff``.

    ``grid_step`` only affects the interval examples, whose grid always
    contains the distinguished witness points.
    """
    gid = GalleryId.parse(gid) if isinstance(gid, str) else gid
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    return _BUILDERS[gid](cutoff, Fraction(grid_step))


def _halving(cutoff: int, step: Fraction) -> GalleryInstance:
    space = GridSpace.uniform(step, extra=("0", "1/2", "1"))
    tmap = piecewise_linear_map([(Fraction(1), Fraction(1, 2))])
    one, zero = real(1), real(0)
    pairs = lambda: cnd.all_pairs(space.points())  # noqa: E731
    facts = (
        _fact("CM_K fails at (1, 0): d(T1,T0) = 1/2 against 1/4", "CM_K", "fails 1/2 vs 1/4", "check_pointwise",
              lambda: _witness_values(C.CM_K, space, tmap, (one, zero), Fraction(1, 2), Fraction(1, 4))),
        _fact("CM_B holds on every grid pair", "CM_B", "holds", "check_pointwise",
              lambda: _report_outcome(cnd.check_pointwise(C.CM_B, space, tmap, pairs()), want_fail=False)),
        _fact("orbit of 1 halves its gap each step", "gaps", "s_n = 2^-(n+1)", "picard_orbit",
              lambda: _expect_equal(picard_orbit(space, tmap, one, 10).gaps,
                                    tuple(Fraction(1, 2 ** (n + 1)) for n in range(10)))),
        _fact("0 is the fixed point reached from 0", "fixed point", "0", "solve_fixed_point",
              lambda: _expect_equal(solve_fixed_point(space, tmap, zero, 5).point, zero)),
    )
    return GalleryInstance(GalleryId.HALVING, cutoff, space, tmap, facts, ((one, zero),))


def _piecewise(cutoff: int, step: Fraction) -> GalleryInstance:
    x, y = real("1/2"), real("51/100")
    space = GridSpace.uniform(step, extra=("0", "1/2", "51/100", "1"))
    tmap = piecewise_linear_map([(Fraction(1, 2), Fraction(1, 4)), (Fraction(1), Fraction(1, 5))])
    facts = (
        _fact("CM_B fails at (1/2, 51/100): 23/1000 > 1/100", "CM_B", "fails 23/1000 vs 1/100", "check_pointwise",
              lambda: _witness_values(C.CM_B, space, tmap, (x, y), Fraction(23, 1000), Fraction(1, 100))),
        _fact(f"Kannan constant 1/3 holds on the grid of step {step}", "kannan 1/3", "holds",
              "kannan_constant_holds",
              lambda: _report_outcome(cnd.kannan_constant_holds(space, tmap, space.points(), Fraction(1, 3)),
                                      want_fail=False)),
        _fact("CM_K holds on every pair of the coarse grid of step 1/100", "CM_K", "holds", "check_pointwise",
              lambda: _report_outcome(
                  cnd.check_pointwise(C.CM_K, space, tmap,
                                      cnd.all_pairs([p for p in space.points() if (p.n * 100).denominator == 1])),
                  want_fail=False)),
    )
    return GalleryInstance(GalleryId.PIECEWISE, cutoff, space, tmap, facts, ((x, y),))


def _kannan_l1(cutoff: int, step: Fraction) -> GalleryInstance:
    space = l1_kannan_space(cutoff)
    tmap = l1_kannan_map()
    x1 = Point("X", 1)
    eps2 = Fraction(2)

    def cjm_k_decay() -> FactOutcome:
        depths = sorted({3, max(3, cutoff // 10), cutoff})
        values = [cnd.modulus_at(C.CJM_K, space, tmap, cnd.point_domain(space, n), eps2) for n in depths]
        closed = [Fraction(3, 2 * n) + Fraction(3, 2 * (n - 1)) for n in depths]
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        return FactOutcome(values == closed and decreasing,
                           f"depths {depths}: {[fmt(v) for v in values]} (closed form {[fmt(v) for v in closed]})")

    def k_iv_positive() -> FactOutcome:
        bad = []
        for p in space.points():
            dom = cnd.orbit_domain(space, tmap, p, 6)
            cons = list(cnd.constraint_stream(C.K_IV, space, tmap, dom))
            for eps in cnd.DEFAULT_EPS:
                if not cnd.modulus_detail(C.K_IV, space, tmap, dom, eps, cons).delta > 0:
                    bad.append((p.label, fmt(eps)))
        return FactOutcome(not bad, f"non-positive K_IV moduli at {bad}" if bad else "K_IV positive on every orbit")

    def audit() -> FactOutcome:
        a = cnd.kannan_equivalence_audit(space, tmap, x1, 10)
        ok = a.equivalence == "confirmed" and a.delta1 == Fraction(1, 2) and a.delta2 is not None and a.delta2 > 0
        return FactOutcome(ok, f"equivalence {a.equivalence}, delta1 {fmt(a.delta1)}, delta2 {fmt(a.delta2)}")

    facts = (
        _fact(f"CM_K holds on all pairs with parameters <= {cutoff}", "CM_K", "holds", "check_pointwise",
              lambda: _report_outcome(cnd.check_pointwise(C.CM_K, space, tmap, cnd.all_pairs(space.points())),
                                      want_fail=False)),
        _fact("triangle inequality on the truncation (parameters <= 10)", "metric", "holds", "verify_triangle",
              lambda: FactOutcome(verify_triangle(space, min(cutoff, 10)).ok, "exhaustive triples")),
        _fact("orbit of x_1 is x_1, u_1, 0 with gaps 5, 2, 0", "orbit", "(5, 2, 0)", "picard_orbit",
              lambda: _expect_equal(picard_orbit(space, tmap, x1, 5).gaps, (Fraction(5), Fraction(2), Fraction(0)))),
        _fact("every orbit reaches 0 within two steps", "fixed point", "0", "solve_fixed_point",
              lambda: FactOutcome(all(solve_fixed_point(space, tmap, p, 3).point == ZERO
                                      and solve_fixed_point(space, tmap, p, 3).iterations <= 2
                                      for p in space.points()), "all starts")),
        _fact("CJM_K modulus at eps=2 is 3/(2N) + 3/(2(N-1)) and decreases with N", "CJM_K", "closed form",
              "modulus_at", cjm_k_decay),
        _fact("K_IV modulus positive on every orbit at eps in {1/3, 1/2, 1, 2}", "K_IV", "positive",
              "modulus_at", k_iv_positive),
        _fact("orbit of x_1: K_II/K_III/K_IV agree, delta1 = 1/2", "audit", "confirmed",
              "kannan_equivalence_audit", audit),
    )
    return GalleryInstance(GalleryId.KANNAN_L1, cutoff, space, tmap, facts)


def _harmonic(cutoff: int, step: Fraction) -> GalleryInstance:
    space = harmonic_space(cutoff)
    tmap = shift_map("A")
    a0 = Point("A", 0)

    def b2_modulus() -> FactOutcome:
        dom = cnd.orbit_domain(space, tmap, a0, cutoff)
        return _expect_equal(cnd.modulus_at(C.B2, space, tmap, dom, Fraction(1, 3)), Fraction(2, 3))

    def b1_decay() -> FactOutcome:
        shallow, deep = max(3, cutoff // 10), cutoff
        v = [cnd.modulus_at(C.B1, space, tmap, cnd.orbit_domain(space, tmap, a0, n), Fraction(1))
             for n in (shallow, deep)]
        return FactOutcome(v[0] > v[1] > 0, f"N={shallow}: {fmt(v[0])}, N={deep}: {fmt(v[1])}")

    def g_cauchy() -> FactOutcome:
        orbit = picard_orbit(space, tmap, a0, cutoff, truncate=False)
        tail = cutoff // 10
        rep = cauchy_diagnostics(orbit, 5, tail, lambda p: Fraction(p, tail + 1), Fraction(1000))
        return FactOutcome(rep.g_cauchy.value == "evidence-for", f"g_cauchy {rep.g_cauchy.value}")

    facts = (
        _fact(f"CM_B holds on all pairs i < j <= {cutoff}", "CM_B", "holds", "check_pointwise",
              lambda: _report_outcome(cnd.check_pointwise(C.CM_B, space, tmap, cnd.all_pairs(space.points())),
                                      want_fail=False)),
        _fact(f"d(a_0, a_3) = 11/6", "distance", "11/6", "distance",
              lambda: _expect_equal(space.distance(a0, Point("A", 3)), Fraction(11, 6))),
        _fact(f"gaps s_n = 1/(n+1) for n < {cutoff}", "gaps", "1/(n+1)", "picard_orbit",
              lambda: _expect_equal(picard_orbit(space, tmap, a0, cutoff).gaps,
                                    tuple(Fraction(1, n + 1) for n in range(cutoff)))),
        _fact("no fixed point within the budget; gaps strictly decreasing", "fixed point", "none",
              "solve_fixed_point",
              lambda: (lambda r: FactOutcome(not r.found and r.monotone_strict
                                             and r.alpha_upper == Fraction(1, cutoff + 1),
                                             f"found={r.found}, alpha_upper={fmt(r.alpha_upper)}"))(
                  solve_fixed_point(space, tmap, a0, cutoff))),
        _fact("B2 modulus at eps = 1/3 is 2/3", "B2", "2/3", "modulus_at", b2_modulus),
        _fact("B1 modulus at eps = 1 is positive and shrinks with the prefix", "B1", "decreasing", "modulus_at",
              b1_decay),
        _fact("orbit of a_0 shows G-Cauchy evidence", "G-Cauchy", "evidence-for", "cauchy_diagnostics", g_cauchy),
        _fact("CM_K fails at (a_1, a_10)", "CM_K", "fails", "check_pointwise",
              lambda: _report_outcome(cnd.check_pointwise(C.CM_K, space, tmap, [(Point("A", 1), Point("A", 10))]),
                                      want_fail=True)),
    )
    return GalleryInstance(GalleryId.HARMONIC, cutoff, space, tmap, facts)


def _witness_values(cond, space, tmap, pair, lhs, rhs) -> FactOutcome:
    rep = cnd.check_pointwise(cond, space, tmap, [pair])
    ok = rep.failed and rep.witness.lhs == lhs and rep.witness.rhs == rhs
    return _report_outcome(rep, want_fail=True) if ok else FactOutcome(False, _report_outcome(rep, True).detail)


_BUILDERS = {
    GalleryId.HALVING: _halving,
    GalleryId.PIECEWISE: _piecewise,
    GalleryId.KANNAN_L1: _kannan_l1,
    GalleryId.HARMONIC: _harmonic,
}


@dataclass(frozen=True)
class FactResult:
    fact: CertifiedFact
    outcome: FactOutcome


@dataclass(frozen=True)
class CertificationReport:
    id: GalleryId
    cutoff: int
    results: tuple[FactResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.outcome.passed for r in self.results)

    @property
    def first_failure(self) -> FactResult | None:
        return next((r for r in self.results if not r.outcome.passed), None)

    def to_dict(self) -> dict:
        return {
            "id": self.id.value,
            "cutoff": self.cutoff,
            "passed": self.passed,
            "facts": [
                {
                    "description": r.fact.description,
                    "operation": r.fact.operation,
                    "expected": r.fact.expected,
                    "passed": r.outcome.passed,
                    "detail": r.outcome.detail,
                }
                for r in self.results
            ],
        }


def run_certification(gid: GalleryId | str, cutoff: int, grid_step: Fraction = DEFAULT_GRID_STEP) -> CertificationReport:
    inst = build(gid, cutoff, grid_step)
    results = []
    for fact in inst.facts:
        try:
            outcome = fact.check()
        except Exception as exc:  # a crashing checker is a failed fact
            outcome = FactOutcome(False, f"{type(exc).__name__}: {exc}")
        results.append(FactResult(fact, outcome))
    return CertificationReport(inst.id, cutoff, tuple(results))


def harmonic_partial_sum(n: int) -> Fraction:
    return HARMONIC[n]
