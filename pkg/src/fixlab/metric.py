"""Exact metric spaces, points and self-maps.

Every distance is a :class:`fractions.Fraction`.  Three kinds of space are
supported:

* :class:`FiniteSpace` -- an explicit symmetric distance matrix,
* :class:`GridSpace` -- a finite rational sample of a real interval with the
  usual metric ``|x - y|``,
* :class:`ParametricSpace` -- a countable family of labelled points whose
  distances are given by a closed-form rule over integer parameters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Scalar = Fraction


class DomainError(ValueError):
    """A point or parameter is not part of the space or map domain."""


class CapacityError(DomainError):
    """A parametric family was asked for a parameter beyond its capacity."""


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"``, integers or decimal strings (``"0.51"``) exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise TypeError("floats are not accepted; pass a string such as '0.51'")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {text!r}") from exc


def parse_rational_list(text: str) -> list[Fraction]:
    return [parse_rational(part) for part in text.split(",") if part.strip()]


def fmt(value: Fraction | float | None) -> str:
    """Render a scalar as ``p/q`` (integers as ``p``); ``+inf`` as ``inf``."""
    if value is None:
        return ""
    if isinstance(value, float):
        if value == float("inf"):
            return "inf"
        raise TypeError(f"float {value!r} has no exact rendering")
    return str(value)


@dataclass(frozen=True, order=True)
class Point:
    """A point of a space.

    ``symbol`` is ``""`` for finite-index points, ``"r"`` for grid points
    (then ``n`` is a rational coordinate) and a family symbol such as
    ``"X"``, ``"U"``, ``"A"`` or ``"Zero"`` for parametric points.
    """

    symbol: str
    n: int | Fraction
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        # Fraction.__hash__ is slow and points are hashed in hot loops
        object.__setattr__(self, "_hash", hash((self.symbol, self.n)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def label(self) -> str:
        if self.symbol == "":
            return str(self.n)
        if self.symbol == "r":
            return str(self.n)
        if self.symbol == "Zero":
            return "0"
        return f"{self.symbol.lower()}_{self.n}"

    def __str__(self) -> str:
        return self.label


def idx(i: int) -> Point:
    return Point("", i)


def real(v: Fraction | int | str) -> Point:
    return Point("r", parse_rational(v))


ZERO = Point("Zero", 0)


class MetricSpace:
    """Common interface: ``distance``, ``points`` and ``contains``."""

    kind: str = "abstract"

    def distance(self, p: Point, q: Point) -> Fraction:  # pragma: no cover
        raise NotImplementedError

    def points(self, cutoff: int | None = None) -> tuple[Point, ...]:  # pragma: no cover
        raise NotImplementedError

    def contains(self, p: Point) -> bool:  # pragma: no cover
        raise NotImplementedError

    def scaled(self, c: Fraction) -> "ScaledSpace":
        return ScaledSpace(self, parse_rational(c))

    def check(self, p: Point) -> None:
        if not self.contains(p):
            raise DomainError(f"point {p.label} is not in this space")


@dataclass(frozen=True)
class FiniteSpace(MetricSpace):
    matrix: tuple[tuple[Fraction, ...], ...]
    kind: str = field(default="finite", init=False)

    def __post_init__(self) -> None:
        m = tuple(tuple(parse_rational(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        n = len(m)
        for i, row in enumerate(m):
            if len(row) != n:
                raise ValueError("distance matrix must be square")
            if row[i] != 0:
                raise ValueError(f"nonzero diagonal at {i}")
            for j in range(i + 1, n):
                if m[i][j] != m[j][i]:
                    raise ValueError(f"asymmetric entries at ({i}, {j})")
                if m[i][j] <= 0:
                    raise ValueError(f"non-positive distance between distinct points {i}, {j}")

    @property
    def size(self) -> int:
        return len(self.matrix)

    def contains(self, p: Point) -> bool:
        return p.symbol == "" and isinstance(p.n, int) and 0 <= p.n < self.size

    def points(self, cutoff: int | None = None) -> tuple[Point, ...]:
        return tuple(idx(i) for i in range(self.size))

    def distance(self, p: Point, q: Point) -> Fraction:
        self.check(p)
        self.check(q)
        return self.matrix[p.n][q.n]

    def relabel(self, perm: Sequence[int]) -> "FiniteSpace":
        """Space whose point ``perm[i]`` plays the role of old point ``i``."""
        n = self.size
        inv = [0] * n
        for i, k in enumerate(perm):
            inv[k] = i
        return FiniteSpace(tuple(tuple(self.matrix[inv[a]][inv[b]] for b in range(n)) for a in range(n)))


@dataclass(frozen=True)
class GridSpace(MetricSpace):
    """Rational sample of ``[lo, hi]`` with ``d(x, y) = |x - y|``.

    Any rational in the interval is a member (so witness pairs need not lie
    on the grid); :meth:`points` enumerates the grid only.
    """

    grid: tuple[Fraction, ...]
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(1)
    kind: str = field(default="grid", init=False)

    def __post_init__(self) -> None:
        g = tuple(sorted(set(parse_rational(v) for v in self.grid)))
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "lo", parse_rational(self.lo))
        object.__setattr__(self, "hi", parse_rational(self.hi))
        if any(v < self.lo or v > self.hi for v in g):
            raise ValueError("grid values must lie in the interval")

    @classmethod
    def uniform(cls, step: Fraction, lo=Fraction(0), hi=Fraction(1), extra: Iterable = ()) -> "GridSpace":
        step = parse_rational(step)
        lo, hi = parse_rational(lo), parse_rational(hi)
        count = int((hi - lo) / step)
        values = [lo + k * step for k in range(count + 1)]
        values.append(hi)
        values.extend(parse_rational(v) for v in extra)
        return cls(tuple(values), lo, hi)

    def contains(self, p: Point) -> bool:
        return p.symbol == "r" and self.lo <= p.n <= self.hi

    def points(self, cutoff: int | None = None) -> tuple[Point, ...]:
        return tuple(Point("r", v) for v in self.grid)

    def distance(self, p: Point, q: Point) -> Fraction:
        self.check(p)
        self.check(q)
        return abs(p.n - q.n)


@dataclass(frozen=True)
class ParametricSpace(MetricSpace):
    """Countable family with a closed-form distance rule.

    ``rule`` maps two valid points to their exact distance; ``enumerate``
    lists every point with parameter ``<= N``; ``valid`` tests family
    membership.  ``cutoff`` is the default truncation used by
    :meth:`points`; ``capacity`` (if set) is the largest parameter accepted
    anywhere.
    """

    name: str
    rule_id: str
    coefficients: tuple[Fraction, ...]
    rule: Callable[[Point, Point], Fraction]
    enumerate: Callable[[int], tuple[Point, ...]]
    valid: Callable[[Point], bool]
    cutoff: int
    capacity: int | None = None
    kind: str = field(default="parametric", init=False)

    def contains(self, p: Point) -> bool:
        return self.valid(p)

    def check(self, p: Point) -> None:
        if not self.valid(p):
            raise DomainError(f"point {p.label} is not in family {self.name}")
        if self.capacity is not None and p.n > self.capacity:
            raise CapacityError(f"{p.label} exceeds capacity {self.capacity} of family {self.name}")

    def points(self, cutoff: int | None = None) -> tuple[Point, ...]:
        return self.enumerate(self.cutoff if cutoff is None else cutoff)

    def distance(self, p: Point, q: Point) -> Fraction:
        self.check(p)
        self.check(q)
        if p == q:
            return Fraction(0)
        return self.rule(p, q)


@dataclass(frozen=True)
class ScaledSpace(MetricSpace):
    """The same points with every distance multiplied by ``factor > 0``."""

    base: MetricSpace
    factor: Fraction

    def __post_init__(self) -> None:
        if self.factor <= 0:
            raise ValueError("scale factor must be positive")

    @property
    def kind(self) -> str:  # type: ignore[override]
        return self.base.kind

    def contains(self, p: Point) -> bool:
        return self.base.contains(p)

    def check(self, p: Point) -> None:
        self.base.check(p)

    def points(self, cutoff: int | None = None) -> tuple[Point, ...]:
        return self.base.points(cutoff)

    def distance(self, p: Point, q: Point) -> Fraction:
        return self.factor * self.base.distance(p, q)


# -- closed-form families ----------------------------------------------------


def l1_kannan_space(
    cutoff: int,
    coefficients: Sequence[Fraction | int | str] = (3, 4, 1, 1),
    capacity: int | None = None,
) -> ParametricSpace:
    """``x_n = (a + b/n) e_n``, ``u_n = (c + e/n) e_n`` and ``0`` in l1.

    Distances are evaluated from the disjoint-support closed forms; with the
    default coefficients ``d(x_n, u_n) = 2 + 3/n`` and so on.  Requires
    ``a + b/n > c + e/n > 0`` for every ``n``.
    """
    a, b, c, e = (parse_rational(v) for v in coefficients)
    if not (c > 0 and e >= 0 and a >= c and b >= e and (a, b) != (c, e)):
        raise ValueError("coefficients must give x_n > u_n > 0 componentwise")

    def coord(p: Point) -> Fraction:
        if p.symbol == "X":
            return a + b / p.n
        if p.symbol == "U":
            return c + e / p.n
        return Fraction(0)

    def rule(p: Point, q: Point) -> Fraction:
        if p.symbol == "Zero" or q.symbol == "Zero" or p.n != q.n:
            return coord(p) + coord(q)
        return abs(coord(p) - coord(q))

    def valid(p: Point) -> bool:
        if p.symbol == "Zero":
            return p.n == 0
        return p.symbol in ("X", "U") and isinstance(p.n, int) and p.n >= 1

    def enumerate_(n_max: int) -> tuple[Point, ...]:
        pts = [ZERO]
        for n in range(1, n_max + 1):
            pts.append(Point("X", n))
            pts.append(Point("U", n))
        return tuple(pts)

    return ParametricSpace(
        name="KANNAN_L1",
        rule_id="l1_kannan",
        coefficients=(a, b, c, e),
        rule=rule,
        enumerate=enumerate_,
        valid=valid,
        cutoff=cutoff,
        capacity=capacity,
    )


class _HarmonicTable:
    """Grow-on-demand table of partial sums ``H_n = 1 + 1/2 + ... + 1/n``."""

    def __init__(self) -> None:
        self._h = [Fraction(0)]

    def __getitem__(self, n: int) -> Fraction:
        h = self._h
        while len(h) <= n:
            h.append(h[-1] + Fraction(1, len(h)))
        return h[n]


HARMONIC = _HarmonicTable()


def harmonic_space(cutoff: int, capacity: int | None = None) -> ParametricSpace:
    """Points ``a_n = H_n`` on the real line, ``a_0 = 0``."""

    def rule(p: Point, q: Point) -> Fraction:
        return abs(HARMONIC[q.n] - HARMONIC[p.n])

    def valid(p: Point) -> bool:
        return p.symbol == "A" and isinstance(p.n, int) and p.n >= 0

    def enumerate_(n_max: int) -> tuple[Point, ...]:
        return tuple(Point("A", n) for n in range(n_max + 1))

    return ParametricSpace(
        name="HARMONIC",
        rule_id="harmonic",
        coefficients=(),
        rule=rule,
        enumerate=enumerate_,
        valid=valid,
        cutoff=cutoff,
        capacity=capacity,
    )


# -- self-maps ---------------------------------------------------------------


@dataclass(frozen=True)
class SelfMap:
    """A total rule ``T`` on the points of a space.

    ``shift`` is the largest amount by which ``T`` can raise a family
    parameter (``T a_n = a_{n+1}`` has shift 1); ``spec`` is the
    serializable description used by the file format.
    """

    name: str
    rule: Callable[[Point], Point]
    shift: int = 0
    spec: dict = field(default_factory=dict, compare=False)

    def __call__(self, p: Point) -> Point:
        return self.rule(p)


def table_map(table: Sequence[int]) -> SelfMap:
    tab = tuple(int(t) for t in table)
    n = len(tab)
    if any(not 0 <= t < n for t in tab):
        raise ValueError("map table entries must index points of the space")

    def rule(p: Point) -> Point:
        if p.symbol != "" or not (isinstance(p.n, int) and 0 <= p.n < n):
            raise DomainError(f"point {p.label} outside map table of size {n}")
        return idx(tab[p.n])

    return SelfMap(f"table{list(tab)}", rule, 0, {"rule": "table", "table": list(tab)})


def l1_kannan_map() -> SelfMap:
    """``T x_n = u_n``, ``T u_n = 0``, ``T 0 = 0``."""

    def rule(p: Point) -> Point:
        if p.symbol == "X" and isinstance(p.n, int) and p.n >= 1:
            return Point("U", p.n)
        if p.symbol == "U" and isinstance(p.n, int) and p.n >= 1:
            return ZERO
        if p == ZERO:
            return ZERO
        raise DomainError(f"point {p.label} outside the l1 family")

    return SelfMap("l1_kannan", rule, 0, {"rule": "l1_kannan"})


def shift_map(symbol: str = "A") -> SelfMap:
    """``T a_n = a_{n+1}``."""

    def rule(p: Point) -> Point:
        if p.symbol != symbol or not isinstance(p.n, int) or p.n < 0:
            raise DomainError(f"point {p.label} outside family {symbol}")
        return Point(symbol, p.n + 1)

    return SelfMap("shift", rule, 1, {"rule": "shift", "symbol": symbol})


def piecewise_linear_map(pieces: Sequence[tuple[Fraction, Fraction]], hi: Fraction = Fraction(1)) -> SelfMap:
    """``T x = factor * x`` on the first piece with ``x <= upper``.

    ``pieces`` is a sequence of ``(upper, factor)`` with increasing uppers;
    the last upper must cover ``hi``.
    """
    ps = tuple((parse_rational(u), parse_rational(f)) for u, f in pieces)
    if not ps or ps[-1][0] < parse_rational(hi):
        raise ValueError("pieces must cover the whole interval")

    def rule(p: Point) -> Point:
        if p.symbol != "r":
            raise DomainError(f"point {p.label} is not a real grid point")
        for upper, factor in ps:
            if p.n <= upper:
                return Point("r", factor * p.n)
        raise DomainError(f"point {p.label} beyond the last piece")

    return SelfMap(
        "piecewise_linear",
        rule,
        0,
        {"rule": "piecewise_linear", "pieces": [[str(u), str(f)] for u, f in ps]},
    )


def identity_map() -> SelfMap:
    return SelfMap("identity", lambda p: p, 0, {"rule": "identity"})


# -- operations --------------------------------------------------------------


def distance(space: MetricSpace, p: Point, q: Point) -> Fraction:
    return space.distance(p, q)


def apply(selfmap: SelfMap, p: Point) -> Point:
    return selfmap(p)


@dataclass(frozen=True)
class TriangleReport:
    ok: bool
    triples_checked: int
    violation: tuple[Point, Point, Point] | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None


def verify_triangle(space: MetricSpace, cutoff: int | None = None) -> TriangleReport:
    """Check ``d(p, r) <= d(p, q) + d(q, r)`` over every enumerated triple.

    The first violation in enumeration order is reported as ``(p, q, r)``.
    """
    if cutoff is not None and cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    pts = space.points(cutoff)
    n = len(pts)
    d = [[space.distance(p, q) for q in pts] for p in pts]
    checked = 0
    for a, c in itertools.combinations(range(n), 2):
        dac = d[a][c]
        for b in range(n):
            if b == a or b == c:
                continue
            checked += 1
            if dac > d[a][b] + d[b][c]:
                return TriangleReport(False, checked, (pts[a], pts[b], pts[c]), dac, d[a][b] + d[b][c])
    return TriangleReport(True, checked)


def check_metric_axioms(space: MetricSpace, cutoff: int | None = None) -> list[str]:
    """Symmetry, zero diagonal and positivity problems on enumerated points."""
    problems = []
    pts = space.points(cutoff)
    for p in pts:
        if space.distance(p, p) != 0:
            problems.append(f"d({p},{p}) != 0")
    for p, q in itertools.combinations(pts, 2):
        dpq = space.distance(p, q)
        if dpq != space.distance(q, p):
            problems.append(f"d({p},{q}) != d({q},{p})")
        if dpq <= 0:
            problems.append(f"d({p},{q}) <= 0")
    return problems
