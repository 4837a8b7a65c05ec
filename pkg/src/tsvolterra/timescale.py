"""Bounded time scales as finite unions of closed intervals and isolated points.

A time scale is stored as an ordered tuple of components, each either an
:class:`Interval` ``[lo, hi]`` with ``lo < hi`` or a :class:`Point`.  The
jump operators, graininess and point classification are computed directly
from the components; :func:`discretize` turns a time scale into a
:class:`Grid` for quadrature.

Literal syntax (used by scenarios)::

    [0,1];{2};[3,4]
    {0,1,2,3,4,5}
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import InvalidStep, NodeNotOnGrid, PointNotInTimeScale, TimeScaleSyntaxError

MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def start(self) -> float:
        return self.lo

    @property
    def end(self) -> float:
        return self.hi


@dataclass(frozen=True)
class Point:
    t: float

    @property
    def start(self) -> float:
        return self.t

    @property
    def end(self) -> float:
        return self.t


Component = Union[Interval, Point]


@dataclass(frozen=True)
class PointClass:
    right_dense: bool
    right_scattered: bool
    left_dense: bool
    left_scattered: bool


class TimeScale:
    """A bounded time scale ``[a, b] ∩ T``.

    Components must be sorted and separated by strictly positive gaps.
    Instances are immutable.
    """

    __slots__ = ("_components", "_starts")

    def __init__(self, components: Iterable[Component]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a time scale needs at least one component")
        for c in comps:
            if not isinstance(c, (Interval, Point)):
                raise TypeError(f"not a time-scale component: {c!r}")
            if not (math.isfinite(c.start) and math.isfinite(c.end)):
                raise ValueError("time-scale components must be finite")
        for left, right in zip(comps, comps[1:]):
            if not right.start > left.end:
                raise ValueError(
                    f"components overlap or are out of order: {left} then {right}"
                )
        object.__setattr__(self, "_components", comps)
        object.__setattr__(self, "_starts", [c.start for c in comps])

    def __setattr__(self, name, value):
        raise AttributeError("TimeScale is immutable")

    # construction helpers

    @classmethod
    def interval(cls, lo: float, hi: float) -> "TimeScale":
        return cls([Interval(float(lo), float(hi))])

    @classmethod
    def points(cls, pts: Iterable[float]) -> "TimeScale":
        return cls([Point(float(p)) for p in pts])

    @classmethod
    def integers(cls, lo: int, hi: int) -> "TimeScale":
        """The integer slice ``{lo, lo+1, ..., hi}``."""
        return cls.points(range(lo, hi + 1))

    @classmethod
    def parse(cls, text: str) -> "TimeScale":
        return parse_timescale(text)

    # accessors

    @property
    def components(self) -> tuple[Component, ...]:
        return self._components

    @property
    def a(self) -> float:
        return self._components[0].start

    @property
    def b(self) -> float:
        return self._components[-1].end

    @property
    def is_discrete(self) -> bool:
        return all(isinstance(c, Point) for c in self._components)

    def __eq__(self, other):
        return isinstance(other, TimeScale) and self._components == other._components

    def __hash__(self):
        return hash(self._components)

    def __repr__(self):
        return f"TimeScale({format_timescale(self)!r})"

    def __contains__(self, t) -> bool:
        try:
            self._locate(t)
        except PointNotInTimeScale:
            return False
        return True

    def _locate(self, t: float) -> int:
        t = float(t)
        i = bisect.bisect_right(self._starts, t + MEMBERSHIP_TOL) - 1
        if i >= 0:
            c = self._components[i]
            if c.start - MEMBERSHIP_TOL <= t <= c.end + MEMBERSHIP_TOL:
                return i
        raise PointNotInTimeScale(f"{t!r} is not in {format_timescale(self)}")


def sigma(ts: TimeScale, t: float) -> float:
    """Forward jump ``inf{s in T : s > t}``, with ``sigma(b) = b``."""
    i = ts._locate(t)
    c = ts.components[i]
    if isinstance(c, Interval) and t < c.hi - MEMBERSHIP_TOL:
        return float(t)
    if i + 1 < len(ts.components):
        return ts.components[i + 1].start
    return ts.b


def rho(ts: TimeScale, t: float) -> float:
    """Backward jump ``sup{s in T : s < t}``, with ``rho(a) = a``."""
    i = ts._locate(t)
    c = ts.components[i]
    if isinstance(c, Interval) and t > c.lo + MEMBERSHIP_TOL:
        return float(t)
    if i > 0:
        return ts.components[i - 1].end
    return ts.a


def graininess(ts: TimeScale, t: float) -> float:
    return sigma(ts, t) - float(t)


def classify(ts: TimeScale, t: float) -> PointClass:
    right_scattered = sigma(ts, t) > t
    left_scattered = rho(ts, t) < t
    return PointClass(
        right_dense=not right_scattered,
        right_scattered=right_scattered,
        left_dense=not left_scattered,
        left_scattered=left_scattered,
    )


class Grid:
    """Discretization nodes of a time scale.

    ``dense[j]`` tells whether the segment ``[nodes[j], nodes[j+1]]`` lies
    inside one interval component (quadrature by trapezoid) or is a jump
    from a right-scattered node to its forward jump.
    """

    __slots__ = ("ts", "step_h", "nodes", "dense")

    def __init__(self, ts: TimeScale, step_h: float, nodes, dense):
        nodes = np.array(nodes, dtype=float)
        dense = np.array(dense, dtype=bool)
        if nodes.ndim != 1 or dense.shape != (max(len(nodes) - 1, 0),):
            raise ValueError("dense mask must have one entry per segment")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        nodes.flags.writeable = False
        dense.flags.writeable = False
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "step_h", float(step_h))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "dense", dense)

    def __setattr__(self, name, value):
        raise AttributeError("Grid is immutable")

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"Grid({len(self.nodes)} nodes on {format_timescale(self.ts)}, h={self.step_h})"

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            np.array_equal(self.nodes, other.nodes) and np.array_equal(self.dense, other.dense)
        )

    @property
    def graininess(self) -> np.ndarray:
        """Graininess at every node (zero at right-dense nodes and at b)."""
        mu = np.zeros_like(self.nodes)
        jumps = ~self.dense
        mu[:-1][jumps] = np.diff(self.nodes)[jumps]
        return mu

    def index_of(self, t: float) -> int:
        t = float(t)
        i = int(np.searchsorted(self.nodes, t))
        for j in (i - 1, i):
            if 0 <= j < len(self.nodes) and abs(self.nodes[j] - t) <= MEMBERSHIP_TOL:
                return j
        raise NodeNotOnGrid(f"{t!r} is not a grid node")


def discretize(ts: TimeScale, step_h: float) -> Grid:
    """Uniform sub-grid of step at most ``step_h`` inside each interval.

    An interval ``[lo, hi]`` receives ``ceil((hi - lo) / step_h) + 1`` nodes;
    isolated points are copied as-is.
    """
    if not (step_h > 0) or not math.isfinite(step_h):
        raise InvalidStep(f"step_h must be positive and finite, got {step_h!r}")
    nodes: list[float] = []
    dense: list[bool] = []
    for c in ts.components:
        if nodes:
            dense.append(False)
        if isinstance(c, Point):
            nodes.append(c.t)
            continue
        # the tiny slack keeps exact ratios like 1/0.001 from rounding up a node
        ratio = (c.hi - c.lo) / step_h
        count = max(math.ceil(ratio * (1 - 1e-12)), 1) + 1
        seg = np.linspace(c.lo, c.hi, count)
        nodes.extend(seg.tolist())
        dense.extend([True] * (count - 1))
    return Grid(ts, step_h, nodes, dense)


# literal syntax

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN = re.compile(rf"\s*(?:(?P<num>{_NUMBER})|(?P<sym>[\[\]{{}},;]))")


def parse_timescale(text: str) -> TimeScale:
    """Parse ``[lo,hi]`` / ``{t1,...}`` items separated by semicolons."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise TimeScaleSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start("num") if m.group("num") is not None else m.start("sym")
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num")), start))
        else:
            tokens.append((m.group("sym"), None, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))

    idx = 0

    def expect(kind):
        nonlocal idx
        tok = tokens[idx]
        if tok[0] != kind:
            raise TimeScaleSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        idx += 1
        return tok

    comps: list[Component] = []
    while True:
        kind, _, offset = tokens[idx]
        if kind == "[":
            idx += 1
            lo = expect("num")[1]
            expect(",")
            hi = expect("num")[1]
            expect("]")
            if lo == hi:
                comps.append(Point(lo))
            elif lo < hi:
                comps.append(Interval(lo, hi))
            else:
                raise TimeScaleSyntaxError(f"reversed interval [{lo},{hi}]", offset)
        elif kind == "{":
            idx += 1
            comps.append(Point(expect("num")[1]))
            while tokens[idx][0] == ",":
                idx += 1
                comps.append(Point(expect("num")[1]))
            expect("}")
        else:
            raise TimeScaleSyntaxError("expected '[' or '{'", offset)
        for left, right in zip(comps, comps[1:]):
            if not right.start > left.end:
                raise TimeScaleSyntaxError("components overlap or are out of order", offset)
        if tokens[idx][0] == ";":
            idx += 1
            continue
        expect("end")
        break
    return TimeScale(comps)


def format_timescale(ts: TimeScale) -> str:
    parts = []
    for c in ts.components:
        if isinstance(c, Interval):
            parts.append(f"[{c.lo!r},{c.hi!r}]")
        else:
            parts.append(f"{{{c.t!r}}}")
    return ";".join(parts)
