"""Lit arcs and lit-up descriptors for planar neighborhoods.

A neighbor q at polar coordinates (r_q, theta_q) about a center p with
inner radius r_p lights the open arc (theta_q - w, theta_q + w) with

    w = phi - arcsin((r_p / r_q) * sin(phi)),

where phi in (0, pi] is the limiting angle of incidence. phi = pi/2
reduces to the directly-visible case w = arccos(r_p / r_q). Degenerate
parameter values extend the range to [0, +inf]: phi = 0 lights only the
neighbor's own direction, phi > pi lights the whole circle, and r_p = 0
gives a patch of constant half-width phi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circular import (
    TWO_PI,
    AngularInterval,
    StepFnS1,
    step_from_arcs,
    wrap_angle,
    wrap_angles,
)
from .errors import EmptyNeighborhoodError, GeometryError, ParameterError

# Arc half-widths at or below this are zero-width (singleton) arcs.
OMEGA_TINY = 1e-12

# Half-widths this close to pi mean the arc misses a single point.
OMEGA_FULL = math.pi * (1.0 - 1e-12)

# Neighbors closer than this fraction of r_Q duplicate the center.
DUPLICATE_REL = 1e-12


@dataclass(frozen=True)
class PolarNeighbor:
    """A neighbor in polar coordinates about the center point."""

    r: float
    theta: float

    def __post_init__(self):
        if not self.r > 0:
            raise GeometryError("neighbor distance must be positive")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class LitSParams:
    """Neighborhood filter fraction and limiting angle of incidence."""

    lam: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError("lam must lie in [0, 1]")
        if not self.phi >= 0.0:
            raise ParameterError("phi must be non-negative")

    def r_p(self, r_q_max: float) -> float:
        return self.lam * r_q_max


class Neighborhood2D:
    """A center point plus neighbors in polar coordinates.

    Exact duplicates of the center (r below DUPLICATE_REL * r_Q) are
    dropped with a warning; polar coordinates are undefined there.
    """

    __slots__ = ("center", "radii", "thetas", "r_q_max")

    def __init__(self, center, radii, thetas):
        self.center = np.asarray(center, dtype=float).reshape(2)
        radii = np.asarray(radii, dtype=float).ravel()
        thetas = wrap_angles(np.asarray(thetas, dtype=float).ravel())
        if radii.size != thetas.size:
            raise ParameterError("radii and thetas must have equal length")
        if radii.size == 0:
            raise EmptyNeighborhoodError("empty neighborhood")
        if not np.all(np.isfinite(radii)) or not np.all(np.isfinite(thetas)):
            raise GeometryError("non-finite polar coordinates")
        r_max = float(radii.max())
        if r_max <= 0.0:
            raise EmptyNeighborhoodError("all neighbors coincide with the center")
        keep = radii >= DUPLICATE_REL * r_max
        if not keep.all():
            warnings.warn("dropping neighbors that duplicate the center point",
                          stacklevel=2)
            radii = radii[keep]
            thetas = thetas[keep]
        self.radii = radii
        self.thetas = thetas
        self.r_q_max = float(radii.max())

    @classmethod
    def from_offsets(cls, center, offsets) -> "Neighborhood2D":
        offsets = np.asarray(offsets, dtype=float).reshape(-1, 2)
        r = np.hypot(offsets[:, 0], offsets[:, 1])
        th = np.arctan2(offsets[:, 1], offsets[:, 0])
        return cls(center, r, th)

    @classmethod
    def from_points(cls, center, points) -> "Neighborhood2D":
        center = np.asarray(center, dtype=float).reshape(2)
        return cls.from_offsets(center, np.asarray(points, dtype=float) - center)

    @property
    def neighbors(self) -> list[PolarNeighbor]:
        return [PolarNeighbor(float(r), float(t))
                for r, t in zip(self.radii, self.thetas)]

    def offsets(self) -> np.ndarray:
        return np.column_stack([self.radii * np.cos(self.thetas),
                                self.radii * np.sin(self.thetas)])

    def points(self) -> np.ndarray:
        return self.center + self.offsets()

    def __len__(self) -> int:
        return int(self.radii.size)


def illuminating_neighbors(neigh: Neighborhood2D, lam: float):
    """Neighbors at distance >= r_p = lam * r_Q (the excluded ball is open).

    Returns (radii, thetas, r_p).
    """
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("lam must lie in [0, 1]")
    if len(neigh) == 0:
        raise EmptyNeighborhoodError("empty neighborhood")
    r_p = lam * neigh.r_q_max
    keep = neigh.radii >= r_p
    return neigh.radii[keep], neigh.thetas[keep], r_p


def arc_halfwidth(r: float, r_p: float, phi: float) -> float:
    """Half-width of the lit arc; arguments clamped against rounding."""
    c = min(1.0, r_p / r)
    return phi - math.asin(min(1.0, max(-1.0, c * math.sin(phi))))


def arc(q, r_p: float, phi: float) -> AngularInterval:
    """The open arc lit by one neighbor.

    ``q`` is a PolarNeighbor or an (r, theta) pair. Requires r >= r_p
    and r_p >= 0; phi may take any value in [0, +inf].
    """
    if isinstance(q, PolarNeighbor):
        r, theta = q.r, q.theta
    else:
        r, theta = float(q[0]), wrap_angle(float(q[1]))
    if r_p < 0.0 or phi < 0.0:
        raise ParameterError("r_p and phi must be non-negative")
    if r < r_p:
        raise GeometryError("neighbor inside ignored ball")
    if r <= 0.0:
        raise GeometryError("neighbor coincides with the center")
    if phi > math.pi:
        return AngularInterval.full()
    if phi == 0.0:
        return AngularInterval.singleton(theta)
    w = arc_halfwidth(r, r_p, phi) if r_p > 0.0 else phi
    if w <= OMEGA_TINY:
        return AngularInterval.singleton(theta)
    if w >= OMEGA_FULL:
        return AngularInterval.full_minus_point(wrap_angle(theta + math.pi))
    return AngularInterval.proper(theta - w, theta + w)


def arcs(neigh: Neighborhood2D, params: LitSParams) -> tuple[list[AngularInterval], float]:
    """All lit arcs of the illuminating neighbors, plus r_p."""
    radii, thetas, r_p = illuminating_neighbors(neigh, params.lam)
    return [arc((r, t), r_p, params.phi) for r, t in zip(radii, thetas)], r_p


def _raw_arcs(radii: np.ndarray, thetas: np.ndarray, r_p: float, phi: float):
    """Vectorized arc construction.

    Returns (starts, ends, n_constant): proper-arc endpoints plus the
    number of neighbors lighting the whole circle. Singleton arcs are
    invisible and dropped.
    """
    if phi > math.pi:
        return np.empty(0), np.empty(0), int(radii.size)
    if phi <= 0.0 or radii.size == 0:
        return np.empty(0), np.empty(0), 0
    if r_p > 0.0:
        c = np.minimum(1.0, r_p / radii)
        w = phi - np.arcsin(np.clip(c * math.sin(phi), -1.0, 1.0))
    else:
        w = np.full(radii.shape, phi)
    full = w >= OMEGA_FULL
    proper = (w > OMEGA_TINY) & ~full
    th = thetas[proper]
    wp = w[proper]
    return wrap_angles(th - wp), wrap_angles(th + wp), int(np.count_nonzero(full))


def cumulative_lits(neigh: Neighborhood2D, params: LitSParams) -> StepFnS1:
    """Counting function: value at t = number of arcs containing t."""
    radii, thetas, r_p = illuminating_neighbors(neigh, params.lam)
    starts, ends, n_const = _raw_arcs(radii, thetas, r_p, params.phi)
    return step_from_arcs(starts, ends, n_const)


def lits(neigh: Neighborhood2D, params: LitSParams) -> StepFnS1:
    """Indicator of the union of lit arcs."""
    return cumulative_lits(neigh, params).clip_to_indicator()


def visible_region_counts(cloud, p, r_p: float, r_q_max: float, phi: float, ts) -> np.ndarray:
    """Occupancy of the visibility region, vectorized over query angles.

    Counts cloud points x with r_p <= |x - p| <= r_q_max whose ray to
    p_t := p + r_p * (cos t, sin t) arrives with incidence angle
    strictly below phi. Both distance bounds are closed so that the
    neighbor realizing r_Q participates.
    """
    cloud = np.asarray(cloud, dtype=float).reshape(-1, 2)
    p = np.asarray(p, dtype=float).reshape(2)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if cloud.shape[0] == 0:
        return np.zeros(ts.size, dtype=np.int64)
    off = cloud - p
    d = np.hypot(off[:, 0], off[:, 1])
    ring = (d >= r_p) & (d <= r_q_max)
    off = off[ring]
    if off.shape[0] == 0 or phi <= 0.0:
        return np.zeros(ts.size, dtype=np.int64)
    if phi > math.pi:
        return np.full(ts.size, off.shape[0], dtype=np.int64)
    e = np.column_stack([np.cos(ts), np.sin(ts)])          # (m, 2)
    v = off[None, :, :] - r_p * e[:, None, :]              # (m, n, 2)
    nv = np.linalg.norm(v, axis=2)
    dot = np.einsum("mnk,mk->mn", v, e)
    cosphi = math.cos(phi)
    with np.errstate(invalid="ignore", divide="ignore"):
        lit = dot > cosphi * nv
    lit |= nv == 0.0                                        # point exactly on the circle
    return lit.sum(axis=1).astype(np.int64)


def visible_region_count(cloud, p, r_p: float, r_q_max: float, phi: float, t: float) -> int:
    """Scalar version of :func:`visible_region_counts`."""
    return int(visible_region_counts(cloud, p, r_p, r_q_max, phi, [t])[0])
