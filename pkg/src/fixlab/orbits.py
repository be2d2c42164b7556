"""Picard orbits, successive gaps, Cauchy diagnostics and fixed-point solving."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .metric import MetricSpace, Point, SelfMap, fmt


class Evidence(str, enum.Enum):
    FOR = "evidence-for"
    AGAINST = "evidence-against"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class OrbitRecord:
    """Orbit ``x, Tx, ..., T^N x`` with exact gaps ``s_n = d(T^n x, T^{n+1} x)``.

    ``fixed_hit`` is the first index ``k`` with ``s_k = 0``; ``cycle`` is
    ``(first_index, period)`` when a non-fixed point is revisited.
    ``strict_violation`` is the first ``n`` with ``0 < s_n <= s_{n+1}``;
    such an ``n`` is a counter-witness to strict contraction on the pair
    ``(T^n x, T^{n+1} x)``.
    """

    start: Point
    points: tuple[Point, ...]
    gaps: tuple[Fraction, ...]
    fixed_hit: int | None
    cycle: tuple[int, int] | None
    monotone_strict: bool
    strict_violation: int | None
    space: MetricSpace = field(repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def alpha_upper(self) -> Fraction:
        """The last computed gap (an upper bound for later gaps when monotone)."""
        return self.gaps[-1]

    @property
    def length(self) -> int:
        return len(self.points)

    @property
    def prefix(self) -> int:
        return len(self.gaps)

    def dist(self, i: int, j: int) -> Fraction:
        """``d(T^i x, T^j x)``, memoised."""
        if i == j:
            return Fraction(0)
        if i > j:
            i, j = j, i
        if j == i + 1:
            return self.gaps[i]
        key = (i, j)
        d = self._cache.get(key)
        if d is None:
            d = self.space.distance(self.points[i], self.points[j])
            self._cache[key] = d
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "point", "s_n"])
        for n, p in enumerate(self.points):
            w.writerow([n, p.label, fmt(self.gaps[n]) if n < len(self.gaps) else ""])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "start": self.start.label,
            "points": [p.label for p in self.points],
            "gaps": [fmt(g) for g in self.gaps],
            "fixed_hit": self.fixed_hit,
            "cycle": list(self.cycle) if self.cycle else None,
            "alpha_upper": fmt(self.alpha_upper),
            "monotone_strict": self.monotone_strict,
            "strict_violation": self.strict_violation,
        }


def picard_orbit(
    space: MetricSpace,
    selfmap: SelfMap,
    x0: Point,
    steps: int,
    truncate: bool = True,
) -> OrbitRecord:
    """Iterate ``selfmap`` from ``x0`` for up to ``steps`` applications.

    With ``truncate`` the orbit stops one step after the first exact fixed
    point (so its zero gap is recorded) or after the first revisit of a
    non-fixed point.  Without it, exactly ``steps`` applications are made,
    which is what orbit-prefix condition domains need.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    space.check(x0)
    detect_cycles = selfmap.shift == 0
    points = [x0]
    gaps: list[Fraction] = []
    seen = {x0: 0}
    fixed_hit = None
    cycle = None
    cur = x0
    for k in range(steps):
        nxt = selfmap(cur)
        space.check(nxt)
        gap = space.distance(cur, nxt)
        points.append(nxt)
        gaps.append(gap)
        if gap == 0:
            if fixed_hit is None:
                fixed_hit = k
            if truncate:
                break
        elif detect_cycles and cycle is None and nxt in seen:
            cycle = (seen[nxt], k + 1 - seen[nxt])
            if truncate:
                break
        if detect_cycles:
            seen.setdefault(nxt, k + 1)
        cur = nxt

    violation = None
    for n in range(len(gaps) - 1):
        if gaps[n] > 0 and gaps[n + 1] >= gaps[n]:
            violation = n
            break
    return OrbitRecord(
        start=x0,
        points=tuple(points),
        gaps=tuple(gaps),
        fixed_hit=fixed_hit,
        cycle=cycle,
        monotone_strict=violation is None,
        strict_violation=violation,
        space=space,
    )


@dataclass(frozen=True)
class CauchyReport:
    p_max: int
    tail_start: int
    window_max: tuple[Fraction, ...]
    window_argmax: tuple[int, ...]
    window_bounds: tuple[Fraction, ...]
    spread: Fraction
    spread_witness: tuple[Point, Point]
    cauchy_bound: Fraction
    g_cauchy: Evidence
    cauchy: Evidence
    g_witness: tuple[int, Point, Point, Fraction] | None = None

    def to_dict(self) -> dict:
        return {
            "p_max": self.p_max,
            "tail_start": self.tail_start,
            "windows": [
                {"p": p + 1, "max": fmt(m), "at": a, "bound": fmt(b)}
                for p, (m, a, b) in enumerate(zip(self.window_max, self.window_argmax, self.window_bounds))
            ],
            "spread": fmt(self.spread),
            "spread_witness": [q.label for q in self.spread_witness],
            "cauchy_bound": fmt(self.cauchy_bound),
            "g_cauchy": self.g_cauchy.value,
            "cauchy": self.cauchy.value,
        }


def cauchy_diagnostics(
    orbit: OrbitRecord,
    p_max: int,
    tail_start: int,
    window_bound: Fraction | Callable[[int], Fraction],
    cauchy_bound: Fraction,
) -> CauchyReport:
    """Tail evidence for the G-Cauchy and Cauchy properties of an orbit.

    For each window ``p <= p_max`` the maximum of ``d(x_n, x_{n+p})`` over
    ``n >= tail_start`` is computed exactly.  ``window_bound`` is either a
    per-unit bound ``w`` (window ``p`` is then bounded by ``p * w``) or a
    callable ``p -> bound``.

    G-Cauchy is evidence-for when every window maximum is within its bound,
    evidence-against when even the last window of some ``p`` exceeds its
    bound.  The Cauchy spread is the largest distance from ``x_{tail_start}``
    to a later point; it exceeds ``cauchy_bound`` (evidence-against, with
    the witness pair) or, since every pairwise tail distance is at most
    twice it, ``2 * spread <= cauchy_bound`` gives evidence-for.
    """
    n_pts = orbit.length
    if p_max < 1 or p_max >= n_pts:
        raise ValueError(f"p_max must be in [1, {n_pts - 1}]")
    if tail_start < 0 or tail_start + p_max > n_pts - 1:
        raise ValueError("orbit too short for this tail and window")
    if callable(window_bound):
        bound = window_bound
    else:
        w = Fraction(window_bound)
        bound = lambda p: p * w  # noqa: E731
    last = n_pts - 1

    maxima, argmax, bounds = [], [], []
    g_against = None
    for p in range(1, p_max + 1):
        best, at = Fraction(-1), tail_start
        for n in range(tail_start, last - p + 1):
            d = orbit.dist(n, n + p)
            if d > best:
                best, at = d, n
        b = Fraction(bound(p))
        maxima.append(best)
        argmax.append(at)
        bounds.append(b)
        tail_val = orbit.dist(last - p, last)
        if g_against is None and tail_val > b:
            g_against = (p, orbit.points[last - p], orbit.points[last], tail_val)

    if all(m <= b for m, b in zip(maxima, bounds)):
        g = Evidence.FOR
    elif g_against is not None:
        g = Evidence.AGAINST
    else:
        g = Evidence.INCONCLUSIVE

    spread, far = Fraction(0), tail_start
    for m in range(tail_start + 1, n_pts):
        d = orbit.dist(tail_start, m)
        if d > spread:
            spread, far = d, m
    cauchy_bound = Fraction(cauchy_bound)
    if spread > cauchy_bound:
        c = Evidence.AGAINST
    elif 2 * spread <= cauchy_bound:
        c = Evidence.FOR
    else:
        c = Evidence.INCONCLUSIVE
    return CauchyReport(
        p_max=p_max,
        tail_start=tail_start,
        window_max=tuple(maxima),
        window_argmax=tuple(argmax),
        window_bounds=tuple(bounds),
        spread=spread,
        spread_witness=(orbit.points[tail_start], orbit.points[far]),
        cauchy_bound=cauchy_bound,
        g_cauchy=g,
        cauchy=c,
        g_witness=g_against if g is Evidence.AGAINST else None,
    )


@dataclass(frozen=True)
class UniquenessCheck:
    candidate: Point
    is_fixed: bool
    distance: Fraction
    image_distance: Fraction

    @property
    def contradicts_contraction(self) -> bool:
        # a second fixed point w gives d(Tw,Tz) = d(w,z), so strict contraction fails
        return self.is_fixed and self.distance > 0


@dataclass(frozen=True)
class FixedPointReport:
    found: bool
    point: Point | None
    iterations: int
    orbit: OrbitRecord = field(repr=False)
    alpha_upper: Fraction
    monotone_strict: bool
    below_tolerance: bool
    contraction_witness: tuple[Point, Point, Fraction, Fraction] | None
    uniqueness: tuple[UniquenessCheck, ...] = ()

    @property
    def unique(self) -> bool | None:
        if not self.found or not self.uniqueness:
            return None
        return not any(u.contradicts_contraction for u in self.uniqueness)

    @property
    def alpha_is_zero(self) -> bool:
        """Only an exact zero gap certifies that the gap limit vanishes."""
        return self.found

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "point": self.point.label if self.point else None,
            "iterations": self.iterations,
            "alpha_upper": fmt(self.alpha_upper),
            "alpha_zero_certified": self.alpha_is_zero,
            "monotone_strict": self.monotone_strict,
            "below_tolerance": self.below_tolerance,
            "contraction_witness": None
            if self.contraction_witness is None
            else {
                "pair": [self.contraction_witness[0].label, self.contraction_witness[1].label],
                "d_images": fmt(self.contraction_witness[2]),
                "d_pair": fmt(self.contraction_witness[3]),
            },
            "unique": self.unique,
            "uniqueness": [
                {
                    "candidate": u.candidate.label,
                    "is_fixed": u.is_fixed,
                    "d": fmt(u.distance),
                    "d_images": fmt(u.image_distance),
                }
                for u in self.uniqueness
            ],
        }


def solve_fixed_point(
    space: MetricSpace,
    selfmap: SelfMap,
    x0: Point,
    steps: int,
    gap_tolerance: Fraction = Fraction(0),
    candidates: Iterable[Point] | None = None,
) -> FixedPointReport:
    """Iterate, watch the gaps strictly decrease, stop at an exact fixed point.

    After ``steps`` applications the final iterate is itself tested (one more
    gap is computed), so ``alpha_upper`` is ``d(T^steps x, T^{steps+1} x)``
    when no fixed point turns up.  A found fixed point ``z`` is compared with
    every candidate ``w``: a candidate that is also fixed and distinct from
    ``z`` would satisfy ``d(Tw, Tz) = d(w, z)`` and so contradict strict
    contraction.  For finite spaces all points are candidates by default.
    """
    orbit = picard_orbit(space, selfmap, x0, steps + 1, truncate=True)
    found = orbit.fixed_hit is not None
    z = orbit.points[orbit.fixed_hit] if found else None
    witness = None
    if orbit.strict_violation is not None:
        n = orbit.strict_violation
        witness = (orbit.points[n], orbit.points[n + 1], orbit.gaps[n + 1], orbit.gaps[n])

    checks = []
    if found:
        if candidates is None:
            candidates = space.points() if space.kind == "finite" else ()
        for w in candidates:
            if w == z:
                continue
            tw = selfmap(w)
            checks.append(UniquenessCheck(w, tw == w, space.distance(w, z), space.distance(tw, z)))
    return FixedPointReport(
        found=found,
        point=z,
        iterations=orbit.fixed_hit if found else steps,
        orbit=orbit,
        alpha_upper=orbit.alpha_upper,
        monotone_strict=orbit.monotone_strict,
        below_tolerance=orbit.alpha_upper <= gap_tolerance,
        contraction_witness=witness,
        uniqueness=tuple(checks),
    )


def gaps_nonincreasing_after(gaps: Sequence[Fraction]) -> bool:
    """``s_m <= s_n`` for all ``n <= m``."""
    return all(gaps[k + 1] <= gaps[k] for k in range(len(gaps) - 1))
