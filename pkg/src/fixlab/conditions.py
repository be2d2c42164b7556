"""Contractive conditions and their exact epsilon-delta moduli.

Every epsilon-delta condition in the catalog has the shape

    premise < eps + delta   implies   conclusion <= eps

over some set of constraint instances.  At a level ``eps`` the violation
set is ``E = {c : c.conclusion > eps}`` and the largest admissible budget
is

    delta*(eps) = min_{c in E} (c.premise - eps)      (+inf if E is empty).

The condition holds at ``eps`` on the domain iff ``delta*(eps) > 0``; any
``delta`` strictly below it is admissible.  On a finite truncation this is
only an upper bound on the true modulus of an infinite family.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .formats import decimal_str
from .metric import FiniteSpace, MetricSpace, Point, SelfMap, fmt
from .orbits import OrbitRecord, picard_orbit

INF = math.inf
HALF = Fraction(1, 2)
DEFAULT_EPS = (Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(2))

Modulus = Fraction | float


class ConditionId(str, enum.Enum):
    CM_B = "CM_B"
    CM_K = "CM_K"
    CJM_B = "CJM_B"
    CJM_K = "CJM_K"
    B1 = "B1"
    B2 = "B2"
    K_II = "K_II"
    K_III = "K_III"
    K_IV = "K_IV"

    @classmethod
    def parse(cls, text: str) -> "ConditionId":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown condition {text!r}; expected one of {[c.value for c in cls]}") from None


POINTWISE = frozenset({ConditionId.CM_B, ConditionId.CM_K})
PAIRWISE = frozenset({ConditionId.CJM_B, ConditionId.CJM_K})
ORBITWISE = frozenset({ConditionId.B1, ConditionId.B2, ConditionId.K_II, ConditionId.K_III, ConditionId.K_IV})


class Verdict(str, enum.Enum):
    HOLDS_ON_TRUNCATION = "holds-on-truncation"
    FAILS = "fails-with-witness"
    CERTIFIED = "holds-with-certificate"


# -- domains -----------------------------------------------------------------


@dataclass(frozen=True)
class OrbitDomain:
    """Indices ``0..N-1`` of an orbit whose points ``x_0..x_N`` are known."""

    orbit: OrbitRecord

    @property
    def depth(self) -> int:
        return self.orbit.prefix

    @property
    def label(self) -> str:
        return f"orbit({self.orbit.start.label})[N={self.depth}]"

    def excluded_eps(self) -> frozenset[Fraction]:
        """``{s_k : 1 <= k <= N-1}``, the levels excluded for K_III."""
        return frozenset(self.orbit.gaps[1:])


@dataclass(frozen=True)
class PointDomain:
    """An explicit finite point set (all unordered distinct pairs)."""

    points: tuple[Point, ...]
    depth: int

    @property
    def label(self) -> str:
        return f"points[N={self.depth}]"


Domain = OrbitDomain | PointDomain


def orbit_domain(space: MetricSpace, selfmap: SelfMap, x0: Point, prefix: int) -> OrbitDomain:
    return OrbitDomain(picard_orbit(space, selfmap, x0, prefix, truncate=False))


def point_domain(space: MetricSpace, cutoff: int | None = None) -> PointDomain:
    pts = space.points(cutoff)
    return PointDomain(pts, len(pts) if cutoff is None else cutoff)


# -- constraint instances ----------------------------------------------------


@dataclass(frozen=True)
class ConstraintInstance:
    premise: Fraction
    conclusion: Fraction
    where: tuple

    def where_label(self) -> str:
        return "(" + ", ".join(w.label if isinstance(w, Point) else str(w) for w in self.where) + ")"


def constraint_stream(
    cond: ConditionId, space: MetricSpace, selfmap: SelfMap, domain: Domain
) -> Iterator[ConstraintInstance]:
    """Every ``(premise, conclusion)`` instance of ``cond`` on ``domain``.

    Orbit conditions index ``i <= j`` in ``0..N-1`` (``B2``/``K_II`` use
    ``i`` in ``0..N-2``); pair conditions run over distinct enumerated
    points in enumeration order.
    """
    cond = ConditionId(cond)
    if cond in ORBITWISE:
        if not isinstance(domain, OrbitDomain):
            raise ValueError(f"{cond.value} needs an orbit-prefix domain")
        yield from _orbit_constraints(cond, domain.orbit)
    elif cond in PAIRWISE:
        if not isinstance(domain, PointDomain):
            raise ValueError(f"{cond.value} needs a point-set domain")
        yield from _pair_constraints(cond, space, selfmap, domain.points)
    else:
        raise ValueError(f"{cond.value} is a pointwise condition; use check_pointwise")


def _orbit_constraints(cond: ConditionId, orbit: OrbitRecord) -> Iterator[ConstraintInstance]:
    s = orbit.gaps
    n = len(s)
    if cond is ConditionId.B2:
        for i in range(n - 1):
            yield ConstraintInstance(s[i], s[i + 1], (i, i + 1))
    elif cond is ConditionId.K_II:
        for i in range(n - 1):
            yield ConstraintInstance(HALF * (s[i] + s[i + 1]), s[i + 1], (i, i + 1))
    elif cond is ConditionId.B1:
        dist = orbit.dist
        for i in range(n):
            for j in range(i, n):
                yield ConstraintInstance(dist(i, j), dist(i + 1, j + 1), (i, j))
    else:  # K_III, K_IV
        dist = orbit.dist
        for i in range(n):
            for j in range(i, n):
                yield ConstraintInstance(HALF * (s[i] + s[j]), dist(i + 1, j + 1), (i, j))


def _pair_constraints(
    cond: ConditionId, space: MetricSpace, selfmap: SelfMap, pts: Sequence[Point]
) -> Iterator[ConstraintInstance]:
    images = [selfmap(p) for p in pts]
    if cond is ConditionId.CJM_K:
        moves = [space.distance(p, tp) for p, tp in zip(pts, images)]
        for a, b in itertools.combinations(range(len(pts)), 2):
            yield ConstraintInstance(
                HALF * (moves[a] + moves[b]), space.distance(images[a], images[b]), (pts[a], pts[b])
            )
    else:
        for a, b in itertools.combinations(range(len(pts)), 2):
            yield ConstraintInstance(
                space.distance(pts[a], pts[b]), space.distance(images[a], images[b]), (pts[a], pts[b])
            )


# -- moduli ------------------------------------------------------------------


@dataclass(frozen=True)
class ModulusResult:
    cond: ConditionId
    eps: Fraction
    delta: Modulus
    witness: ConstraintInstance | None
    violations: int
    constraints: int

    @property
    def holds(self) -> bool:
        return self.delta > 0


def _check_eps(cond: ConditionId, domain: Domain, eps: Fraction) -> Fraction:
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if cond is ConditionId.K_III and isinstance(domain, OrbitDomain) and eps in domain.excluded_eps():
        raise ValueError(
            f"eps = {fmt(eps)} equals a successive gap d(T^k x, T^(k+1) x) with k >= 1; "
            "K_III is only posed at levels outside that set"
        )
    return eps


def modulus_detail(
    cond: ConditionId,
    space: MetricSpace,
    selfmap: SelfMap,
    domain: Domain,
    eps: Fraction,
    constraints: Iterable[ConstraintInstance] | None = None,
) -> ModulusResult:
    cond = ConditionId(cond)
    eps = _check_eps(cond, domain, eps)
    if constraints is None:
        constraints = constraint_stream(cond, space, selfmap, domain)
    best: Modulus = INF
    witness = None
    count = violations = 0
    for c in constraints:
        count += 1
        if c.conclusion > eps:
            violations += 1
            gap = c.premise - eps
            if gap < best:
                best, witness = gap, c
    return ModulusResult(cond, eps, best, witness, violations, count)


def modulus_at(
    cond: ConditionId, space: MetricSpace, selfmap: SelfMap, domain: Domain, eps: Fraction
) -> Modulus:
    """``min over the violation set of (premise - eps)``, or ``inf``."""
    return modulus_detail(cond, space, selfmap, domain, eps).delta


@dataclass(frozen=True)
class ModulusSample:
    domain: str
    depth: int
    eps: Fraction
    delta: Modulus


@dataclass(frozen=True)
class ModulusProfile:
    condition: ConditionId
    samples: tuple[ModulusSample, ...]
    excluded_eps: tuple[Fraction, ...] = ()

    def values(self, eps: Fraction) -> list[Modulus]:
        return [s.delta for s in self.samples if s.eps == eps]

    def is_antitone(self) -> bool:
        """Deeper truncations never give a larger modulus."""
        for eps in {s.eps for s in self.samples}:
            row = sorted((s for s in self.samples if s.eps == eps), key=lambda s: s.depth)
            if any(b.delta > a.delta for a, b in zip(row, row[1:])):
                return False
        return True

    def to_csv(self, decimal: int | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["condition", "domain", "eps", "delta"]
        if decimal is not None:
            header.append("delta_approx")
        w.writerow(header)
        for s in self.samples:
            row = [self.condition.value, s.domain, fmt(s.eps), fmt(s.delta)]
            if decimal is not None:
                row.append(decimal_str(s.delta, decimal))
            w.writerow(row)
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "samples": [
                {"domain": s.domain, "depth": s.depth, "eps": fmt(s.eps), "delta": fmt(s.delta)}
                for s in self.samples
            ],
            "excluded_eps": [fmt(e) for e in self.excluded_eps],
        }


def modulus_profile(
    cond: ConditionId,
    space: MetricSpace,
    selfmap: SelfMap,
    domains: Sequence[Domain],
    eps_list: Sequence[Fraction],
) -> ModulusProfile:
    cond = ConditionId(cond)
    if not eps_list:
        raise ValueError("eps_list must be nonempty")
    samples = []
    excluded: set[Fraction] = set()
    for dom in sorted(domains, key=lambda d: d.depth):
        # one pass over the constraints, then every eps
        cons = list(constraint_stream(cond, space, selfmap, dom))
        for eps in eps_list:
            r = modulus_detail(cond, space, selfmap, dom, eps, cons)
            samples.append(ModulusSample(dom.label, dom.depth, r.eps, r.delta))
        if cond is ConditionId.K_III and isinstance(dom, OrbitDomain):
            excluded |= dom.excluded_eps()
    return ModulusProfile(cond, tuple(samples), tuple(sorted(excluded)))


# -- pointwise conditions ----------------------------------------------------


@dataclass(frozen=True)
class Witness:
    where: tuple
    lhs: Fraction
    rhs: Fraction

    def to_dict(self) -> dict:
        return {
            "where": [w.label if isinstance(w, Point) else w for w in self.where],
            "lhs": fmt(self.lhs),
            "rhs": fmt(self.rhs),
        }


@dataclass(frozen=True)
class ConditionReport:
    condition: ConditionId
    verdict: Verdict
    truncation: str
    checked: int = 0
    witness: Witness | None = None
    skipped: tuple = ()

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAILS

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "verdict": self.verdict.value,
            "truncation": self.truncation,
            "checked": self.checked,
            "witness": self.witness.to_dict() if self.witness else None,
            "skipped": [[p.label for p in pair] for pair in self.skipped],
        }


def all_pairs(points: Sequence[Point]) -> Iterator[tuple[Point, Point]]:
    return itertools.combinations(points, 2)


def pointwise_sides(cond: ConditionId, space: MetricSpace, selfmap: SelfMap, x: Point, y: Point) -> tuple[Fraction, Fraction]:
    """``(d(Tx, Ty), bound)``; the condition requires ``lhs < bound``."""
    tx, ty = selfmap(x), selfmap(y)
    lhs = space.distance(tx, ty)
    if cond is ConditionId.CM_B:
        return lhs, space.distance(x, y)
    return lhs, HALF * (space.distance(x, tx) + space.distance(y, ty))


def check_pointwise(
    cond: ConditionId,
    space: MetricSpace,
    selfmap: SelfMap,
    pairs: Iterable[tuple[Point, Point]],
    truncation: str = "",
    complete: bool = False,
) -> ConditionReport:
    """Exact strict-inequality check of CM_B or CM_K on each pair.

    ``complete`` marks the pair set as every distinct pair of a finite
    space, in which case a pass is a certificate rather than evidence.
    """
    cond = ConditionId(cond)
    if cond not in POINTWISE:
        raise ValueError(f"{cond.value} is not a pointwise condition")
    if space.kind == "grid":
        return _check_pointwise_grid(cond, space, selfmap, list(pairs), truncation, complete)
    image: dict[Point, Point] = {}
    move: dict[Point, Fraction] = {}

    def img(p: Point) -> Point:
        t = image.get(p)
        if t is None:
            t = image[p] = selfmap(p)
            move[p] = space.distance(p, t)
        return t

    skipped = []
    checked = 0
    for x, y in pairs:
        if x == y:
            skipped.append((x, y))
            continue
        tx, ty = img(x), img(y)
        lhs = space.distance(tx, ty)
        rhs = space.distance(x, y) if cond is ConditionId.CM_B else HALF * (move[x] + move[y])
        checked += 1
        if not lhs < rhs:
            return ConditionReport(cond, Verdict.FAILS, truncation, checked, Witness((x, y), lhs, rhs), tuple(skipped))
    verdict = Verdict.CERTIFIED if complete else Verdict.HOLDS_ON_TRUNCATION
    return ConditionReport(cond, verdict, truncation, checked, None, tuple(skipped))


def _common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def _check_pointwise_grid(cond, space, selfmap, pairs, truncation, complete) -> ConditionReport:
    # Both sides of CM_B/CM_K are homogeneous in d, so comparing integer
    # multiples of the coordinates decides the same strict inequality.
    pts = sorted({p for pair in pairs for p in pair})
    for p in pts:
        space.check(p)
    image = {p: selfmap(p) for p in pts}
    den = _common_denominator(itertools.chain((p.n for p in pts), (t.n for t in image.values())))
    x = {p: int(p.n * den) for p in pts}
    t = {p: int(image[p].n * den) for p in pts}
    move = {p: abs(x[p] - t[p]) for p in pts}
    skipped = []
    checked = 0
    for a, b in pairs:
        if a == b:
            skipped.append((a, b))
            continue
        checked += 1
        lhs = abs(t[a] - t[b])
        if cond is ConditionId.CM_B:
            bad = lhs >= abs(x[a] - x[b])
        else:
            bad = 2 * lhs >= move[a] + move[b]
        if bad:
            l, r = pointwise_sides(cond, space, selfmap, a, b)
            return ConditionReport(cond, Verdict.FAILS, truncation, checked, Witness((a, b), l, r), tuple(skipped))
    verdict = Verdict.CERTIFIED if complete else Verdict.HOLDS_ON_TRUNCATION
    return ConditionReport(cond, verdict, truncation, checked, None, tuple(skipped))


def kannan_constant_holds(
    space: MetricSpace, selfmap: SelfMap, points: Sequence[Point], constant: Fraction
) -> ConditionReport:
    """``d(Tx, Ty) <= k (d(x, Tx) + d(y, Ty))`` on every pair of ``points``.

    Grid spaces are rescaled to integers first so the pair loop stays cheap.
    """
    constant = Fraction(constant)
    images = [selfmap(p) for p in points]
    if space.kind == "grid":
        xs = [p.n for p in points]
        ts = [t.n for t in images]
        den = _common_denominator(itertools.chain(xs, ts))
        xi = [int(v * den) for v in xs]
        ti = [int(v * den) for v in ts]
        kn, kd = constant.numerator, constant.denominator
        mv = [abs(a - b) for a, b in zip(xi, ti)]
        checked = 0
        for a in range(len(points)):
            ta, ma = ti[a], mv[a]
            for b in range(a + 1, len(points)):
                checked += 1
                if kd * abs(ta - ti[b]) > kn * (ma + mv[b]):
                    lhs = space.distance(images[a], images[b])
                    rhs = constant * (space.distance(points[a], images[a]) + space.distance(points[b], images[b]))
                    return ConditionReport(ConditionId.CM_K, Verdict.FAILS, f"kannan<= {constant}", checked,
                                           Witness((points[a], points[b]), lhs, rhs))
        return ConditionReport(ConditionId.CM_K, Verdict.HOLDS_ON_TRUNCATION, f"kannan<= {constant}", checked)
    moves = [space.distance(p, t) for p, t in zip(points, images)]
    checked = 0
    for a, b in itertools.combinations(range(len(points)), 2):
        checked += 1
        lhs = space.distance(images[a], images[b])
        rhs = constant * (moves[a] + moves[b])
        if lhs > rhs:
            return ConditionReport(ConditionId.CM_K, Verdict.FAILS, f"kannan<= {constant}", checked,
                                   Witness((points[a], points[b]), lhs, rhs))
    return ConditionReport(ConditionId.CM_K, Verdict.HOLDS_ON_TRUNCATION, f"kannan<= {constant}", checked)


# -- Kannan equivalence audit -------------------------------------------------


@dataclass(frozen=True)
class AuditRow:
    eps: Fraction
    k_ii: Modulus
    k_iii: Modulus | None  # None when eps is an excluded level
    k_iv: Modulus
    eps_is_first_gap: bool


@dataclass(frozen=True)
class KannanAudit:
    start: Point
    prefix: int
    fixed_point: Point | None
    rows: tuple[AuditRow, ...]
    equivalence: str  # "confirmed", "refuted" or "skipped"
    delta1: Fraction | None
    delta2: Fraction | None
    cm_k: ConditionReport

    def to_dict(self) -> dict:
        return {
            "start": self.start.label,
            "prefix": self.prefix,
            "fixed_point": self.fixed_point.label if self.fixed_point else None,
            "equivalence": self.equivalence,
            "delta1": fmt(self.delta1) if self.delta1 is not None else "skipped",
            "delta2": fmt(self.delta2) if self.delta2 is not None else "skipped",
            "cm_k_on_orbit": self.cm_k.to_dict(),
            "rows": [
                {
                    "eps": fmt(r.eps),
                    "K_II": fmt(r.k_ii),
                    "K_III": "excluded" if r.k_iii is None else fmt(r.k_iii),
                    "K_IV": fmt(r.k_iv),
                    "eps_equals_s0": r.eps_is_first_gap,
                }
                for r in self.rows
            ],
        }


def kannan_equivalence_audit(
    space: MetricSpace,
    selfmap: SelfMap,
    x0: Point,
    prefix: int,
    eps_list: Sequence[Fraction] = DEFAULT_EPS,
) -> KannanAudit:
    """Evaluate the K_II, K_III and K_IV moduli side by side on one orbit.

    When the orbit reaches an exact fixed point ``z`` after ``k`` steps all
    three are expected positive at every sampled level, and the case gaps

        delta1 = min_{i<k} (s_i / 2 - d(T^{i+1} x, z))
        delta2 = min_{i,j<k} ((s_i + s_j) / 2 - d(T^{i+1} x, T^{j+1} x))

    are reported.  Without a fixed point the verdicts are only listed.
    K_III is skipped at excluded levels, and a level equal to ``s_0`` is
    flagged rather than excluded.
    """
    dom = orbit_domain(space, selfmap, x0, prefix)
    orbit = dom.orbit
    excluded = dom.excluded_eps()
    cons_ii = list(constraint_stream(ConditionId.K_II, space, selfmap, dom))
    cons_iv = list(constraint_stream(ConditionId.K_IV, space, selfmap, dom))
    rows = []
    for eps in eps_list:
        eps = Fraction(eps)
        k_ii = modulus_detail(ConditionId.K_II, space, selfmap, dom, eps, cons_ii).delta
        k_iv = modulus_detail(ConditionId.K_IV, space, selfmap, dom, eps, cons_iv).delta
        k_iii = None if eps in excluded else modulus_detail(ConditionId.K_III, space, selfmap, dom, eps, cons_iv).delta
        rows.append(AuditRow(eps, k_ii, k_iii, k_iv, eps == orbit.gaps[0]))

    cm_k = check_pointwise(
        ConditionId.CM_K, space, selfmap, all_pairs(_distinct(orbit.points)), truncation=dom.label
    )
    fixed = orbit.fixed_hit
    delta1 = delta2 = None
    z = None
    if fixed is None:
        equivalence = "skipped"
    else:
        z = orbit.points[fixed]
        positive = all(
            r.k_ii > 0 and r.k_iv > 0 and (r.k_iii is None or r.k_iii > 0) for r in rows
        )
        equivalence = "confirmed" if positive else "refuted"
        s = orbit.gaps
        if fixed > 0:
            delta1 = min(HALF * s[i] - space.distance(orbit.points[i + 1], z) for i in range(fixed))
            delta2 = min(
                HALF * (s[i] + s[j]) - orbit.dist(i + 1, j + 1) for i in range(fixed) for j in range(fixed)
            )
    return KannanAudit(x0, prefix, z, tuple(rows), equivalence, delta1, delta2, cm_k)


def _distinct(points: Iterable[Point]) -> list[Point]:
    seen, out = set(), []
    for p in points:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


# -- exact decisions on finite instances --------------------------------------


def critical_levels(constraints: Sequence[ConstraintInstance]) -> list[Fraction]:
    """Levels at which a finite constraint set can change verdict.

    The violation set and the sign of ``premise - eps`` only change at the
    distinct premise/conclusion values, so testing each positive value, each
    midpoint between neighbours, half the smallest and one above the largest
    covers every ``eps > 0``.
    """
    vals = sorted({v for c in constraints for v in (c.premise, c.conclusion) if v > 0})
    if not vals:
        return [Fraction(1)]
    levels = [vals[0] / 2]
    for a, b in zip(vals, vals[1:]):
        levels.extend((a, (a + b) / 2))
    levels.extend((vals[-1], vals[-1] + 1))
    return levels


def holds_at_every_level(
    cond: ConditionId,
    constraints: Sequence[ConstraintInstance],
    excluded: frozenset[Fraction] = frozenset(),
) -> bool:
    """Whether ``delta*(eps) > 0`` at every tested level of a finite set."""
    for eps in critical_levels(constraints):
        if cond is ConditionId.K_III and eps in excluded:
            continue
        best: Modulus = INF
        for c in constraints:
            if c.conclusion > eps and c.premise - eps < best:
                best = c.premise - eps
        if not best > 0:
            return False
    return True


def _table_pointwise_holds(cond: ConditionId, m, t) -> bool:
    n = len(t)
    if cond is ConditionId.CM_B:
        return all(m[t[a]][t[b]] < m[a][b] for a in range(n) for b in range(a + 1, n))
    move = [m[a][t[a]] for a in range(n)]
    return all(2 * m[t[a]][t[b]] < move[a] + move[b] for a in range(n) for b in range(a + 1, n))


def decide_finite(cond: ConditionId, space: MetricSpace, selfmap: SelfMap) -> bool:
    """Exact verdict of ``cond`` on a finite space (all points, all levels).

    Orbit conditions are evaluated from every start point on a prefix of
    ``|X| + 1`` steps: a finite orbit is eventually periodic with
    preperiod plus period at most ``|X|``, so that prefix already contains
    every distinct constraint instance.
    """
    cond = ConditionId(cond)
    pts = space.points()
    if cond in POINTWISE:
        table = selfmap.spec.get("table") if isinstance(space, FiniteSpace) else None
        if table is not None:
            return _table_pointwise_holds(cond, space.matrix, table)
        return not check_pointwise(cond, space, selfmap, all_pairs(pts), complete=True).failed
    if cond in PAIRWISE:
        cons = list(constraint_stream(cond, space, selfmap, PointDomain(pts, len(pts))))
        return holds_at_every_level(cond, cons)
    for x in pts:
        dom = orbit_domain(space, selfmap, x, len(pts) + 1)
        cons = list(constraint_stream(cond, space, selfmap, dom))
        if not holds_at_every_level(cond, cons, dom.excluded_eps()):
            return False
    return True
