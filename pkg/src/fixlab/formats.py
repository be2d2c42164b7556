"""Space/map definition files, point parsing and report rendering.

A definition file is a JSON object; every rational is a ``"p/q"`` string.

    {"kind": "finite", "points": 3,
     "distances": [["0", "1", "2"], ["1", "0", "1"], ["2", "1", "0"]],
     "map": {"rule": "table", "table": [1, 1, 1]}}

    {"kind": "grid", "interval": ["0", "1"], "points": ["0", "1/2", "1"],
     "map": {"rule": "piecewise_linear", "pieces": [["1/2", "1/4"], ["1", "1/5"]]}}

    {"kind": "parametric", "family": "KANNAN_L1", "rule": "l1_kannan",
     "coefficients": ["3", "4", "1", "1"], "cutoff": 10,
     "map": {"rule": "l1_kannan"}}

Any kind may carry ``"scale": "p/q"`` to multiply every distance.
"""

from __future__ import annotations

import csv
import io
import json
import re
from fractions import Fraction
from typing import Any, Sequence

from .metric import (
    ZERO,
    FiniteSpace,
    GridSpace,
    MetricSpace,
    ParametricSpace,
    Point,
    ScaledSpace,
    SelfMap,
    harmonic_space,
    identity_map,
    l1_kannan_map,
    l1_kannan_space,
    parse_rational,
    piecewise_linear_map,
    shift_map,
    table_map,
)


class FormatError(ValueError):
    pass


def map_from_dict(spec: dict) -> SelfMap:
    rule = spec.get("rule")
    if rule == "table":
        return table_map(spec["table"])
    if rule == "piecewise_linear":
        return piecewise_linear_map([(u, f) for u, f in spec["pieces"]])
    if rule == "l1_kannan":
        return l1_kannan_map()
    if rule == "shift":
        return shift_map(spec.get("symbol", "A"))
    if rule == "identity":
        return identity_map()
    raise FormatError(f"unknown map rule {rule!r}")


def space_from_dict(doc: dict) -> tuple[MetricSpace, SelfMap]:
    try:
        kind = doc["kind"]
        if kind == "finite":
            space: MetricSpace = FiniteSpace(tuple(tuple(parse_rational(v) for v in row) for row in doc["distances"]))
            if "points" in doc and int(doc["points"]) != space.size:
                raise FormatError("'points' does not match the distance matrix size")
        elif kind == "grid":
            lo, hi = (parse_rational(v) for v in doc.get("interval", ["0", "1"]))
            if "points" in doc:
                space = GridSpace(tuple(parse_rational(v) for v in doc["points"]), lo, hi)
            else:
                space = GridSpace.uniform(parse_rational(doc["grid_step"]), lo, hi, doc.get("extra", ()))
        elif kind == "parametric":
            rule = doc.get("rule")
            cutoff = int(doc["cutoff"])
            capacity = doc.get("capacity")
            if rule == "l1_kannan":
                space = l1_kannan_space(cutoff, doc.get("coefficients", ("3", "4", "1", "1")), capacity)
            elif rule == "harmonic":
                space = harmonic_space(cutoff, capacity)
            else:
                raise FormatError(f"unknown parametric rule {rule!r}")
        else:
            raise FormatError(f"unknown space kind {kind!r}")
        selfmap = map_from_dict(doc["map"])
    except KeyError as exc:
        raise FormatError(f"missing field {exc.args[0]!r}") from None
    if "scale" in doc:
        space = space.scaled(parse_rational(doc["scale"]))
    return space, selfmap


def space_to_dict(space: MetricSpace, selfmap: SelfMap) -> dict:
    doc: dict[str, Any]
    scale = None
    if isinstance(space, ScaledSpace):
        scale, space = space.factor, space.base
    if isinstance(space, FiniteSpace):
        doc = {
            "kind": "finite",
            "points": space.size,
            "distances": [[str(v) for v in row] for row in space.matrix],
        }
    elif isinstance(space, GridSpace):
        doc = {
            "kind": "grid",
            "interval": [str(space.lo), str(space.hi)],
            "points": [str(v) for v in space.grid],
        }
    elif isinstance(space, ParametricSpace):
        doc = {
            "kind": "parametric",
            "family": space.name,
            "rule": space.rule_id,
            "coefficients": [str(c) for c in space.coefficients],
            "cutoff": space.cutoff,
        }
        if space.capacity is not None:
            doc["capacity"] = space.capacity
    else:
        raise FormatError(f"cannot serialize {type(space).__name__}")
    doc["map"] = dict(selfmap.spec)
    if scale is not None:
        doc["scale"] = str(scale)
    return doc


def load_space(path: str) -> tuple[MetricSpace, SelfMap]:
    with open(path, encoding="utf-8") as fh:
        return space_from_dict(json.load(fh))


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


_PARAM = re.compile(r"^([A-Za-z]+)_?(\d+)$")


def parse_point(text: str, space: MetricSpace) -> Point:
    """Read a point label in the space's own notation.

    Finite spaces take an index (``2``), grid spaces a rational (``51/100``
    or ``0.51``), parametric families ``x_3``, ``u_3``, ``a_5`` or ``0``.
    """
    text = text.strip()
    kind = space.kind
    if kind == "finite":
        p = Point("", int(text))
    elif kind == "grid":
        p = Point("r", parse_rational(text))
    else:
        if text in ("0", "Zero", "zero") and space.contains(ZERO):
            p = ZERO
        else:
            m = _PARAM.match(text)
            if not m:
                raise ValueError(f"cannot read point {text!r}")
            p = Point(m.group(1).upper(), int(m.group(2)))
    space.check(p)
    return p


def parse_pairs(text: str, space: MetricSpace) -> list[tuple[Point, Point]]:
    """``"a,b;c,d"`` -> ``[(a, b), (c, d)]``."""
    pairs = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"a pair needs exactly two points: {chunk!r}")
        pairs.append((parse_point(parts[0], space), parse_point(parts[1], space)))
    return pairs


def render_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[str(h) for h in header]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def decimal_str(value: Fraction | float, digits: int) -> str:
    """Display-only approximation."""
    if isinstance(value, float):
        return "inf" if value == float("inf") else repr(value)
    q = round(value * 10**digits)
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole, frac = divmod(q, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"
