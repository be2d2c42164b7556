"""Enumeration and sampling of small finite instances, and separation queries.

An instance is a finite metric space (a symmetric rational matrix whose
entries come from a fixed grid) together with a self-map given as a table.
"""

from __future__ import annotations

import functools
import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from . import conditions as cnd
from .conditions import ConditionId as C
from .metric import FiniteSpace, SelfMap, fmt, idx, table_map
from .orbits import picard_orbit

log = logging.getLogger(__name__)

MAX_POINTS = 7

# cheap checks first so separation queries short-circuit early
_COST_ORDER = [C.CM_B, C.CM_K, C.CJM_B, C.CJM_K, C.B2, C.K_II, C.B1, C.K_IV, C.K_III]


@dataclass(frozen=True)
class SearchConfig:
    max_points: int
    grid: tuple[Fraction, ...]
    exhaustive: bool = True
    budget: int = 100
    seed: int = 0
    min_points: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid", tuple(sorted({Fraction(g) for g in self.grid})))
        if not self.grid:
            raise ValueError("distance grid must be nonempty")
        if any(g <= 0 for g in self.grid):
            raise ValueError("distance grid values must be positive")
        if not 2 <= self.min_points <= self.max_points <= MAX_POINTS:
            raise ValueError(f"need 2 <= min_points <= max_points <= {MAX_POINTS}")

    def describe(self) -> str:
        mode = "exhaustive" if self.exhaustive else f"random(seed={self.seed}, budget={self.budget})"
        return f"points {self.min_points}..{self.max_points}, grid {{{', '.join(fmt(g) for g in self.grid)}}}, {mode}"


@dataclass(frozen=True)
class Instance:
    space: FiniteSpace
    table: tuple[int, ...]
    label: str = ""

    @classmethod
    def of(cls, matrix: Sequence[Sequence[Fraction]], table: Sequence[int], label: str = "") -> "Instance":
        return cls(FiniteSpace(tuple(tuple(r) for r in matrix)), tuple(table), label)

    @property
    def id(self) -> str:
        n = self.space.size
        entries = ",".join(fmt(self.space.matrix[i][j]) for i in range(n) for j in range(i + 1, n))
        base = f"n{n}[{entries}]T{list(self.table)}"
        return f"{self.label}:{base}" if self.label else base

    @functools.cached_property
    def map(self) -> SelfMap:
        return table_map(self.table)

    @property
    def size(self) -> int:
        return self.space.size

    def relabel(self, perm: Sequence[int]) -> "Instance":
        """Rename point ``i`` to ``perm[i]`` in both the metric and the map."""
        n = self.size
        inv = [0] * n
        for i, k in enumerate(perm):
            inv[k] = i
        table = tuple(perm[self.table[inv[a]]] for a in range(n))
        return Instance(self.space.relabel(perm), table, f"relabel{list(perm)}")

    def to_dict(self) -> dict:
        from .formats import space_to_dict

        return space_to_dict(self.space, self.map)


def _matrices(n: int, grid: Sequence[Fraction]) -> Iterator[tuple[tuple[Fraction, ...], ...]]:
    """Every triangle-valid symmetric matrix, lexicographic in row-major entries.

    Entries are assigned in row-major order and each triangle is checked the
    moment its last edge is assigned, so invalid prefixes are pruned.
    """
    slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    d: dict[tuple[int, int], Fraction] = {}

    def edge(a: int, b: int) -> Fraction | None:
        return d.get((a, b) if a < b else (b, a))

    def ok(i: int, j: int) -> bool:
        dij = d[(i, j)]
        for k in range(n):
            if k == i or k == j:
                continue
            dik, dkj = edge(i, k), edge(k, j)
            if dik is None or dkj is None:
                continue
            if dij > dik + dkj or dik > dij + dkj or dkj > dij + dik:
                return False
        return True

    def rec(s: int) -> Iterator[tuple[tuple[Fraction, ...], ...]]:
        if s == len(slots):
            yield tuple(
                tuple(Fraction(0) if a == b else edge(a, b) for b in range(n)) for a in range(n)
            )
            return
        i, j = slots[s]
        for g in grid:
            d[(i, j)] = g
            if ok(i, j):
                yield from rec(s + 1)
        del d[(i, j)]

    yield from rec(0)


def _random_matrix(n: int, grid: Sequence[Fraction], rng: random.Random):
    # row-major filling: when (i, j) is drawn, the triangles it closes are
    # exactly those through some k < i
    while True:
        m = [[Fraction(0)] * n for _ in range(n)]
        good = True
        for i in range(n):
            for j in range(i + 1, n):
                allowed = [
                    g for g in grid
                    if all(
                        g <= m[k][i] + m[k][j] and m[k][i] <= g + m[k][j] and m[k][j] <= g + m[k][i]
                        for k in range(i)
                    )
                ]
                if not allowed:
                    good = False
                    break
                m[i][j] = m[j][i] = rng.choice(allowed)
            if not good:
                break
        if good:
            return m


def enumerate_instances(config: SearchConfig) -> Iterator[Instance]:
    """Instances in canonical order (matrix entries, then map tables).

    In random mode ``budget`` instances are drawn from ``Random(seed)``.
    """
    produced = 0
    if config.exhaustive:
        for n in range(config.min_points, config.max_points + 1):
            for m in _matrices(n, config.grid):
                space = FiniteSpace(m)
                for table in itertools.product(range(n), repeat=n):
                    produced += 1
                    yield Instance(space, table)
    else:
        rng = random.Random(config.seed)
        for k in range(config.budget):
            n = rng.randint(config.min_points, config.max_points)
            m = _random_matrix(n, config.grid, rng)
            table = [rng.randrange(n) for _ in range(n)]
            produced += 1
            yield Instance.of(m, table, f"sample{k}")
    if produced == 0:
        log.warning("search space is empty: %s", config.describe())


@dataclass(frozen=True)
class InstanceClassification:
    instance_id: str
    verdicts: dict
    fixed_points: tuple[int, ...]
    all_orbits_fixed: bool
    cjm_moduli: dict = field(default_factory=dict)

    def signature(self) -> tuple:
        """Label-free summary used for relabeling invariance."""
        return (
            tuple(sorted((k.value, v) for k, v in self.verdicts.items())),
            len(self.fixed_points),
            self.all_orbits_fixed,
            tuple(sorted((k, v) for k, v in self.cjm_moduli.items())),
        )

    def to_dict(self) -> dict:
        return {
            "instance": self.instance_id,
            "verdicts": {k.value: v for k, v in self.verdicts.items()},
            "fixed_points": list(self.fixed_points),
            "all_orbits_fixed": self.all_orbits_fixed,
            "cjm_moduli": {k: fmt(v) for k, v in self.cjm_moduli.items()},
        }


def classify(inst: Instance, eps_samples: Sequence[Fraction] = cnd.DEFAULT_EPS) -> InstanceClassification:
    verdicts = {c: cnd.decide_finite(c, inst.space, inst.map) for c in C}
    fixed = tuple(i for i in range(inst.size) if inst.table[i] == i)
    all_fixed = all(
        picard_orbit(inst.space, inst.map, idx(i), inst.size + 1).fixed_hit is not None for i in range(inst.size)
    )
    dom = cnd.point_domain(inst.space)
    moduli = {}
    for c in (C.CJM_B, C.CJM_K):
        cons = list(cnd.constraint_stream(c, inst.space, inst.map, dom))
        for eps in eps_samples:
            moduli[f"{c.value}@{fmt(eps)}"] = cnd.modulus_detail(c, inst.space, inst.map, dom, eps, cons).delta
    return InstanceClassification(inst.id, verdicts, fixed, all_fixed, moduli)


@dataclass(frozen=True)
class SeparationResult:
    hold: tuple[C, ...]
    fail: tuple[C, ...]
    config: SearchConfig
    visited: int
    witness: Instance | None

    @property
    def exhausted(self) -> bool:
        return self.witness is None and self.config.exhaustive

    def certificate(self) -> str:
        if self.witness is not None:
            return f"witness {self.witness.id} after {self.visited} instances"
        kind = "exhaustion certificate" if self.config.exhaustive else "no witness in sample"
        return (
            f"{kind}: none of {self.visited} instances ({self.config.describe()}) has "
            f"{'+'.join(c.value for c in self.hold) or 'nothing'} holding and "
            f"{'+'.join(c.value for c in self.fail) or 'nothing'} failing"
        )

    def to_dict(self) -> dict:
        return {
            "hold": [c.value for c in self.hold],
            "fail": [c.value for c in self.fail],
            "search_space": self.config.describe(),
            "visited": self.visited,
            "found": self.witness is not None,
            "exhausted": self.exhausted,
            "certificate": self.certificate(),
            "witness": self.witness.to_dict() if self.witness else None,
        }


def _ordered(conds: Iterable[C]) -> tuple[C, ...]:
    conds = {C(c) for c in conds}
    return tuple(c for c in _COST_ORDER if c in conds)


def find_separation(hold: Iterable[C], fail: Iterable[C], config: SearchConfig) -> SeparationResult:
    """First instance where every ``hold`` condition holds and every ``fail`` one fails."""
    hold, fail = _ordered(hold), _ordered(fail)
    if set(hold) & set(fail):
        raise ValueError("hold and fail must be disjoint")
    visited = 0
    for inst in enumerate_instances(config):
        visited += 1
        if all(cnd.decide_finite(c, inst.space, inst.map) for c in hold) and not any(
            cnd.decide_finite(c, inst.space, inst.map) for c in fail
        ):
            return SeparationResult(hold, fail, config, visited, inst)
    return SeparationResult(hold, fail, config, visited, None)
