"""Piecewise-constant integer-valued functions on the unit circle.

Angles are plain floats in radians, normalized to [0, 2*pi). A step
function is a sorted array of breakpoints plus one non-negative integer
value per arc; ``values[i]`` holds on the half-open arc
``[breakpoints[i], breakpoints[i+1])``, cyclically. A constant function is
stored with no breakpoints and a single value.

Two conventions worth spelling out:

* Evaluation at a breakpoint returns the value of the arc *starting*
  there (half-open convention). Open arc endpoints are not representable
  in a breakpoint structure, so this makes evaluation total and
  deterministic.
* Features of measure zero are invisible: singleton arcs contribute
  nothing, and an arc missing a single point is treated as the full
  circle. Callers needing exact-point semantics keep the interval
  objects around.

Arc endpoints typically come out of arccos/arcsin and are inexact, so
breakpoints closer than ``ANGLE_EPS`` are fused.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError

TWO_PI = 2.0 * math.pi

# Breakpoint merge tolerance, in radians.
ANGLE_EPS = 1e-9


def wrap_angle(t: float) -> float:
    """Normalize an angle to [0, 2*pi). Idempotent."""
    t = math.fmod(t, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:
        t = 0.0
    return t


def wrap_angles(t):
    """Vectorized :func:`wrap_angle`."""
    t = np.mod(np.asarray(t, dtype=float), TWO_PI)
    t[t >= TWO_PI] = 0.0
    return t


def angular_distance(a: float, b: float) -> float:
    """Geodesic distance on the circle, in [0, pi]."""
    d = abs(wrap_angle(a) - wrap_angle(b))
    return min(d, TWO_PI - d)


class IntervalKind(enum.Enum):
    EMPTY = "empty"
    PROPER = "proper"
    FULL = "full"
    FULL_MINUS_POINT = "full_minus_point"
    SINGLETON = "singleton"


@dataclass(frozen=True)
class AngularInterval:
    """An open counterclockwise arc of the circle.

    Proper arcs are swept counterclockwise from ``start`` to ``end`` and
    are open at both ends. Singletons and full-minus-point arcs keep
    their distinguished angle in both ``start`` and ``end``.
    """

    kind: IntervalKind
    start: float = 0.0
    end: float = 0.0

    @staticmethod
    def empty() -> "AngularInterval":
        return AngularInterval(IntervalKind.EMPTY)

    @staticmethod
    def full() -> "AngularInterval":
        return AngularInterval(IntervalKind.FULL)

    @staticmethod
    def proper(start: float, end: float) -> "AngularInterval":
        start = wrap_angle(start)
        end = wrap_angle(end)
        if start == end:
            raise ParameterError("proper interval must have length in (0, 2*pi)")
        return AngularInterval(IntervalKind.PROPER, start, end)

    @staticmethod
    def singleton(at: float) -> "AngularInterval":
        at = wrap_angle(at)
        return AngularInterval(IntervalKind.SINGLETON, at, at)

    @staticmethod
    def full_minus_point(at: float) -> "AngularInterval":
        at = wrap_angle(at)
        return AngularInterval(IntervalKind.FULL_MINUS_POINT, at, at)

    @property
    def length(self) -> float:
        if self.kind is IntervalKind.PROPER:
            d = wrap_angle(self.end - self.start)
            return d if d > 0.0 else TWO_PI
        if self.kind in (IntervalKind.FULL, IntervalKind.FULL_MINUS_POINT):
            return TWO_PI
        return 0.0

    @property
    def center(self) -> float:
        """Midpoint of the arc; 0.0 for the full circle by convention."""
        if self.kind is IntervalKind.PROPER:
            return wrap_angle(self.start + 0.5 * self.length)
        if self.kind is IntervalKind.SINGLETON:
            return self.start
        if self.kind is IntervalKind.FULL_MINUS_POINT:
            return wrap_angle(self.start + math.pi)
        return 0.0

    def contains(self, t: float) -> bool:
        """Exact membership under the open-arc semantics."""
        t = wrap_angle(t)
        if self.kind is IntervalKind.EMPTY:
            return False
        if self.kind is IntervalKind.FULL:
            return True
        if self.kind is IntervalKind.SINGLETON:
            return t == self.start
        if self.kind is IntervalKind.FULL_MINUS_POINT:
            return t != self.start
        d = wrap_angle(t - self.start)
        return 0.0 < d < self.length


class StepFnS1:
    """Canonical piecewise-constant function on the circle.

    Instances are immutable value objects; all operations return new
    functions, so they are safe to share across threads.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints, values):
        bps = np.asarray(breakpoints, dtype=float)
        vals = np.asarray(values, dtype=np.int64)
        if bps.size == 0:
            if vals.size != 1:
                raise ParameterError("constant function needs exactly one value")
        else:
            if bps.size != vals.size:
                raise ParameterError("need one value per breakpoint")
            if np.any(np.diff(bps) <= 0) or bps[0] < 0 or bps[-1] >= TWO_PI:
                raise ParameterError("breakpoints must be strictly increasing in [0, 2*pi)")
            if np.any(vals == np.roll(vals, 1)):
                raise ParameterError("adjacent values must differ (canonical form)")
        if np.any(vals < 0):
            raise ParameterError("values must be non-negative")
        bps.setflags(write=False)
        vals.setflags(write=False)
        self.breakpoints = bps
        self.values = vals

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value: int) -> "StepFnS1":
        return cls(np.empty(0), [int(value)])

    @classmethod
    def from_raw(cls, breakpoints, values) -> "StepFnS1":
        """Build from possibly non-canonical (but sorted, distinct) data."""
        bps = np.asarray(breakpoints, dtype=float)
        vals = np.asarray(values, dtype=np.int64)
        if bps.size == 0:
            return cls.constant(int(vals[0]))
        keep = vals != np.roll(vals, 1)
        if not keep.any():
            return cls.constant(int(vals[0]))
        return cls(bps[keep], vals[keep])

    # -- basic properties --------------------------------------------------

    @property
    def is_constant(self) -> bool:
        return self.breakpoints.size == 0

    def min_value(self) -> int:
        return int(self.values.min())

    def max_value(self) -> int:
        return int(self.values.max())

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFnS1):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints) and np.array_equal(
            self.values, other.values
        )

    def __hash__(self):
        return hash((self.breakpoints.tobytes(), self.values.tobytes()))

    def __repr__(self):
        if self.is_constant:
            return f"StepFnS1(constant {int(self.values[0])})"
        return f"StepFnS1({self.breakpoints.size} breakpoints)"

    def approx_equal(self, other: "StepFnS1", tol: float = 1e-12) -> bool:
        """Equality up to a small perturbation of the breakpoints."""
        if not np.array_equal(self.values, other.values):
            return False
        if self.breakpoints.size != other.breakpoints.size:
            return False
        if self.is_constant:
            return True
        d = np.abs(self.breakpoints - other.breakpoints)
        return bool(np.all(np.minimum(d, TWO_PI - d) <= tol))

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, t: float) -> int:
        """Value at ``t``; at a breakpoint, the value of the arc starting there."""
        if self.is_constant:
            return int(self.values[0])
        idx = int(np.searchsorted(self.breakpoints, wrap_angle(t), side="right")) - 1
        return int(self.values[idx])  # idx == -1 wraps to the last arc

    def evaluate_many(self, ts) -> np.ndarray:
        ts = wrap_angles(ts)
        if self.is_constant:
            return np.full(ts.shape, int(self.values[0]), dtype=np.int64)
        idx = np.searchsorted(self.breakpoints, ts, side="right") - 1
        return self.values[idx]

    def __call__(self, t: float) -> int:
        return self.evaluate(t)

    # -- measurements --------------------------------------------------------

    def arc_lengths(self) -> np.ndarray:
        if self.is_constant:
            return np.array([TWO_PI])
        lengths = np.diff(np.append(self.breakpoints, self.breakpoints[0] + TWO_PI))
        return lengths

    def measure_below(self, threshold: int) -> float:
        """Total length of the set where the function is < threshold."""
        if self.is_constant:
            return TWO_PI if self.values[0] < threshold else 0.0
        return float(self.arc_lengths()[self.values < threshold].sum())

    def total_variation(self) -> float:
        if self.is_constant:
            return 0.0
        return float(np.abs(self.values - np.roll(self.values, 1)).sum())

    def sublevel_intervals(self, threshold: int) -> list[AngularInterval]:
        """Maximal arcs where the function is < threshold, sorted by start."""
        return self._mask_intervals(self.values < threshold if not self.is_constant else None,
                                    constant_hit=self.is_constant and self.values[0] < threshold)

    def superlevel_intervals(self, threshold: int) -> list[AngularInterval]:
        """Maximal arcs where the function is >= threshold, sorted by start."""
        return self._mask_intervals(self.values >= threshold if not self.is_constant else None,
                                    constant_hit=self.is_constant and self.values[0] >= threshold)

    def _mask_intervals(self, mask, constant_hit: bool) -> list[AngularInterval]:
        if self.is_constant or mask is None:
            return [AngularInterval.full()] if constant_hit else []
        if mask.all():
            return [AngularInterval.full()]
        if not mask.any():
            return []
        n = mask.size
        out = []
        starts = np.nonzero(mask & ~np.roll(mask, 1))[0]
        for i in starts:
            j = i
            while mask[(j + 1) % n]:
                j += 1
            out.append(AngularInterval.proper(self.breakpoints[i],
                                              self.breakpoints[(j + 1) % n]))
        out.sort(key=lambda iv: iv.start)
        return out

    # -- transforms ------------------------------------------------------------

    def shift(self, beta: float) -> "StepFnS1":
        """Return g with g(t) = f(t - beta)."""
        if self.is_constant:
            return self
        bps = wrap_angles(self.breakpoints + beta)
        order = np.argsort(bps, kind="stable")
        return StepFnS1.from_raw(bps[order], self.values[order])

    def clip_to_indicator(self) -> "StepFnS1":
        """Pointwise min(1, f)."""
        if self.is_constant:
            return StepFnS1.constant(min(1, int(self.values[0])))
        return StepFnS1.from_raw(self.breakpoints, np.minimum(self.values, 1))

    def sample_and_smooth(self, n_samples: int, window: int) -> np.ndarray:
        """Sample at 2*pi*k/n and apply a circular moving average."""
        if n_samples < 1:
            raise ParameterError("n_samples must be positive")
        if window < 1 or window % 2 == 0:
            raise ParameterError("window must be an odd positive integer")
        if window > n_samples:
            raise ParameterError("window cannot exceed n_samples")
        ts = TWO_PI * np.arange(n_samples) / n_samples
        raw = self.evaluate_many(ts).astype(float)
        if window == 1:
            return raw
        h = window // 2
        padded = np.concatenate([raw[-h:], raw, raw[:h]])
        kernel = np.full(window, 1.0 / window)
        return np.convolve(padded, kernel, mode="valid")

    # -- serialization ------------------------------------------------------------

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "StepFnS1":
        return cls(obj["breakpoints"], obj["values"])


def _count_containing(starts: np.ndarray, ends: np.ndarray, t: float) -> int:
    """How many ccw-open arcs (start_i, end_i) contain the angle t."""
    plain = starts < ends
    inside = np.where(plain, (t > starts) & (t < ends), (t > starts) | (t < ends))
    return int(np.count_nonzero(inside))


def step_from_arcs(starts, ends, constant: int = 0) -> StepFnS1:
    """Sum of indicators of proper ccw arcs, plus a constant offset.

    ``starts``/``ends`` are normalized angles of equal length; each pair
    is an open counterclockwise arc of positive length < 2*pi. Endpoints
    within ANGLE_EPS of each other are fused.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    if starts.size == 0:
        return StepFnS1.constant(constant)
    angles = np.concatenate([starts, ends])
    deltas = np.concatenate([np.ones(starts.size), -np.ones(ends.size)])
    order = np.argsort(angles, kind="stable")
    a = angles[order]
    d = deltas[order]

    new = np.empty(a.size, dtype=bool)
    new[0] = True
    np.greater(np.diff(a), ANGLE_EPS, out=new[1:])
    reps = a[new]
    gidx = np.cumsum(new) - 1
    sums = np.rint(np.bincount(gidx, weights=d)).astype(np.int64)
    # Wraparound fuse: a cluster hugging 2*pi merges with one hugging 0.
    if reps.size > 1 and (reps[0] + TWO_PI - a[-1]) <= ANGLE_EPS:
        sums[0] += sums[-1]
        reps = reps[:-1]
        sums = sums[:-1]
    keepnz = sums != 0
    reps = reps[keepnz]
    sums = sums[keepnz]
    if reps.size == 0:
        # Arcs cancelled exactly; fall back to membership at a safe angle.
        gaps = np.diff(np.append(a, a[0] + TWO_PI))
        ref = wrap_angle(a[int(np.argmax(gaps))] + 0.5 * gaps.max())
        return StepFnS1.constant(constant + _count_containing(starts, ends, ref))

    # Reference angle in the widest gap between raw endpoints: far from
    # every endpoint, so raw membership there is unambiguous.
    gaps = np.diff(np.append(a, a[0] + TWO_PI))
    widest = int(np.argmax(gaps))
    ref = wrap_angle(a[widest] + 0.5 * gaps[widest])
    base = _count_containing(starts, ends, ref)

    pref = np.cumsum(sums)
    j = int(np.searchsorted(reps, ref, side="right")) - 1  # arc containing ref
    values = base - pref[j] + pref
    if values.min() < 0:
        raise ParameterError("negative arc count; inputs were not valid arcs")
    return StepFnS1.from_raw(reps, values + constant)


def _split_intervals(intervals: Iterable[AngularInterval]):
    starts, ends = [], []
    constant = 0
    for iv in intervals:
        if iv.kind is IntervalKind.PROPER:
            starts.append(iv.start)
            ends.append(iv.end)
        elif iv.kind in (IntervalKind.FULL, IntervalKind.FULL_MINUS_POINT):
            constant += 1
        # empty and singleton arcs are invisible to the step representation
    return np.array(starts), np.array(ends), constant


def sum_of_indicators(intervals: Sequence[AngularInterval]) -> StepFnS1:
    """Cumulative count: value at t = number of arcs containing t."""
    starts, ends, constant = _split_intervals(intervals)
    return step_from_arcs(starts, ends, constant)


def indicator_of_union(intervals: Sequence[AngularInterval]) -> StepFnS1:
    """Indicator function of the union of the arcs."""
    return sum_of_indicators(intervals).clip_to_indicator()
