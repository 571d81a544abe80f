"""Spherical-cap descriptors for 3D neighborhoods.

A neighbor q lights the spherical region of directions e with
angle(pq - r_p*e, e) < phi, which is an open cap about the direction of
pq. Whole-sphere descriptors are evaluated pointwise (cap intersections
are not caps, so no global piecewise structure exists); the restriction
to the great circle of a chosen plane does admit one, built from the
intersection of each cap boundary with the circle.

In the orthonormal basis (u, v, n) of that plane, with
pq = alpha*u + beta*v + gamma*n, the cap boundary meets the circle where

    A_q * cos(t - phase_q) = psi,    psi = r_p*sin(phi)^2
                                          + cos(phi)*sqrt(r_q^2 - r_p^2*sin(phi)^2),

with A_q = hypot(alpha, beta) and phase_q = atan2(beta, alpha). The
four solution regimes (no/one/two/infinitely many roots) map onto
empty, full, full-minus-point and proper arcs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .circular import AngularInterval, StepFnS1, step_from_arcs, wrap_angle, wrap_angles
from .errors import EmptyNeighborhoodError, GeometryError, ParameterError
from . import lits2d
from .lits2d import LitSParams

# Relative tolerance routing |psi| vs A_q among the solution cases.
PSI_REL_TOL = 1e-10

# In-plane amplitudes below this fraction of r_q count as on-axis.
ON_AXIS_REL = 1e-12


@dataclass(frozen=True)
class FrameNeighbor:
    """Neighbor coordinates in the (u, v, n) basis, plus its distance."""

    alpha: float
    beta: float
    gamma: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise GeometryError("neighbor distance must be positive")
        norm = math.sqrt(self.alpha ** 2 + self.beta ** 2 + self.gamma ** 2)
        if abs(norm - self.r) > 1e-9 * self.r:
            raise GeometryError("frame coordinates inconsistent with distance")

    @property
    def amplitude(self) -> float:
        """In-plane distance A_q of the projection onto the (u, v) plane."""
        return math.hypot(self.alpha, self.beta)

    @property
    def phase(self) -> float:
        """In-plane angle of the projection, measured from u."""
        return wrap_angle(math.atan2(self.beta, self.alpha))

    def offset(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


class Neighborhood3D:
    """Center, orthonormal frame, and neighbors in frame coordinates."""

    __slots__ = ("center", "frame", "coords", "radii", "r_q_max")

    def __init__(self, center, frame, coords):
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.frame = frame
        coords = np.asarray(coords, dtype=float).reshape(-1, 3)
        if coords.shape[0] == 0:
            raise EmptyNeighborhoodError("empty neighborhood")
        radii = np.linalg.norm(coords, axis=1)
        r_max = float(radii.max())
        if r_max <= 0.0:
            raise EmptyNeighborhoodError("all neighbors coincide with the center")
        keep = radii >= lits2d.DUPLICATE_REL * r_max
        if not keep.all():
            warnings.warn("dropping neighbors that duplicate the center point",
                          stacklevel=2)
            coords = coords[keep]
            radii = radii[keep]
        self.coords = coords
        self.radii = radii
        self.r_q_max = float(radii.max())

    @classmethod
    def from_offsets(cls, center, offsets, frame) -> "Neighborhood3D":
        """Express world offsets (points minus center) in the given frame."""
        offsets = np.asarray(offsets, dtype=float).reshape(-1, 3)
        return cls(center, frame, offsets @ frame.vectors)

    @property
    def neighbors(self) -> list[FrameNeighbor]:
        return [FrameNeighbor(float(a), float(b), float(g), float(r))
                for (a, b, g), r in zip(self.coords, self.radii)]

    def world_offsets(self) -> np.ndarray:
        return self.coords @ self.frame.vectors.T

    def __len__(self) -> int:
        return int(self.radii.size)


def _illuminating(neigh: Neighborhood3D, lam: float):
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("lam must lie in [0, 1]")
    r_p = lam * neigh.r_q_max
    keep = neigh.radii >= r_p
    return neigh.coords[keep], neigh.radii[keep], r_p


def cap_contains(q: FrameNeighbor, r_p: float, phi: float, e) -> bool:
    """Whether direction e (frame coordinates, unit) lies in q's lit cap."""
    e = np.asarray(e, dtype=float).reshape(3)
    if abs(np.linalg.norm(e) - 1.0) > 1e-9:
        raise ParameterError("e must be a unit vector")
    if q.r < r_p:
        raise GeometryError("neighbor inside ignored ball")
    if phi > math.pi:
        return True
    if phi <= 0.0:
        return bool(np.dot(e, q.offset()) >= q.r * (1.0 - 1e-15))
    v = q.offset() - r_p * e
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return True
    return float(np.dot(v, e)) > math.cos(phi) * nv


def lits3d_eval(neigh: Neighborhood3D, params: LitSParams, e) -> int:
    """Pointwise indicator on the sphere: 1 iff some cap contains e."""
    return 1 if cumulative3d_eval(neigh, params, e) >= 1 else 0


def cumulative3d_eval(neigh: Neighborhood3D, params: LitSParams, e) -> int:
    """Pointwise count of caps containing direction e."""
    coords, radii, r_p = _illuminating(neigh, params.lam)
    e = np.asarray(e, dtype=float).reshape(3)
    if abs(np.linalg.norm(e) - 1.0) > 1e-9:
        raise ParameterError("e must be a unit vector")
    if coords.shape[0] == 0:
        return 0
    if params.phi > math.pi:
        return coords.shape[0]
    if params.phi <= 0.0:
        return int(np.count_nonzero(coords @ e >= radii * (1.0 - 1e-15)))
    v = coords - r_p * e
    nv = np.linalg.norm(v, axis=1)
    lit = (v @ e > math.cos(params.phi) * nv) | (nv == 0.0)
    return int(np.count_nonzero(lit))


def _psi(r: float, r_p: float, phi: float) -> float:
    s = math.sin(phi)
    disc = r * r - r_p * r_p * s * s
    if disc < 0.0:
        if disc < -1e-12 * r * r:
            raise GeometryError("inconsistent geometry: r_q below r_p")
        disc = 0.0
    return r_p * s * s + math.cos(phi) * math.sqrt(disc)


def arc_along_normal(q: FrameNeighbor, r_p: float, phi: float) -> AngularInterval:
    """Intersection of q's lit cap with the in-plane great circle."""
    if not 0.0 < phi < math.pi:
        raise ParameterError("phi must lie in (0, pi) for the arc construction")
    if q.r < r_p:
        raise GeometryError("neighbor inside ignored ball")
    psi = _psi(q.r, r_p, phi)
    amp = q.amplitude
    if amp <= ON_AXIS_REL * q.r:
        # On-axis: the cap boundary is a parallel circle. psi == 0 means it
        # coincides with the great circle, and the open cap misses all of it.
        return AngularInterval.full() if psi < -PSI_REL_TOL * q.r else AngularInterval.empty()
    tol = PSI_REL_TOL * max(amp, abs(psi))
    if abs(abs(psi) - amp) <= tol:
        # Tangency: the boundary touches the circle at one point.
        if psi > 0.0:
            return AngularInterval.empty()
        return AngularInterval.full_minus_point(wrap_angle(q.phase + math.pi))
    if abs(psi) > amp:
        return AngularInterval.empty() if psi > 0.0 else AngularInterval.full()
    delta = math.acos(max(-1.0, min(1.0, psi / amp)))
    return AngularInterval.proper(q.phase - delta, q.phase + delta)


def _raw_arcs_along_normal(coords: np.ndarray, radii: np.ndarray, r_p: float, phi: float):
    """Vectorized arc construction; returns (starts, ends, n_constant)."""
    s = math.sin(phi)
    disc = np.clip(radii * radii - (r_p * s) ** 2, 0.0, None)
    psi = r_p * s * s + math.cos(phi) * np.sqrt(disc)
    amp = np.hypot(coords[:, 0], coords[:, 1])
    on_axis = amp <= ON_AXIS_REL * radii
    tol = PSI_REL_TOL * np.maximum(amp, np.abs(psi))
    tangent = (~on_axis) & (np.abs(np.abs(psi) - amp) <= tol)
    outside = (~on_axis) & (~tangent) & (np.abs(psi) > amp)
    full = ((on_axis & (psi < -PSI_REL_TOL * radii))
            | (tangent & (psi < 0.0))
            | (outside & (psi < 0.0)))
    proper = ~(on_axis | tangent | outside)
    phase = np.arctan2(coords[proper, 1], coords[proper, 0])
    delta = np.arccos(np.clip(psi[proper] / amp[proper], -1.0, 1.0))
    return (wrap_angles(phase - delta), wrap_angles(phase + delta),
            int(np.count_nonzero(full)))


def cumulative_along_normal(neigh: Neighborhood3D, params: LitSParams) -> StepFnS1:
    """Piecewise-constant count of lit caps over the in-plane circle."""
    coords, radii, r_p = _illuminating(neigh, params.lam)
    if params.phi <= 0.0:
        return StepFnS1.constant(0)
    if params.phi >= math.pi:
        # Caps are the sphere minus at most one point; measure-zero rule.
        return StepFnS1.constant(int(coords.shape[0]))
    starts, ends, n_const = _raw_arcs_along_normal(coords, radii, r_p, params.phi)
    return step_from_arcs(starts, ends, n_const)


def lits_along_normal(neigh: Neighborhood3D, params: LitSParams) -> StepFnS1:
    """Indicator version of :func:`cumulative_along_normal`."""
    return cumulative_along_normal(neigh, params).clip_to_indicator()


def arcs_along_normal(neigh: Neighborhood3D, params: LitSParams) -> tuple[list[AngularInterval], float]:
    """Per-neighbor arc results for the illuminating subset, plus r_p."""
    coords, radii, r_p = _illuminating(neigh, params.lam)
    out = []
    for (a, b, g), r in zip(coords, radii):
        out.append(arc_along_normal(FrameNeighbor(a, b, g, r), r_p, params.phi))
    return out, r_p


def projected_lits(neigh: Neighborhood3D, lam: float) -> StepFnS1:
    """2D construction on the orthogonal projections onto the (u, v) plane.

    The limiting angle of incidence is pi/2; projections falling inside
    the ignored ball are discarded. Coincides with the along-normal
    indicator at phi = pi/2 and only there.
    """
    coords, radii, r_p = _illuminating(neigh, lam)
    amp = np.hypot(coords[:, 0], coords[:, 1])
    keep = amp >= r_p
    phase = np.arctan2(coords[keep, 1], coords[keep, 0])
    starts, ends, n_const = lits2d._raw_arcs(amp[keep], wrap_angles(phase),
                                             r_p, math.pi / 2)
    return step_from_arcs(starts, ends, n_const).clip_to_indicator()


def visible_region_counts_3d(cloud, p, r_p: float, r_q_max: float, phi: float, es) -> np.ndarray:
    """3D visibility-region occupancy, vectorized over unit directions."""
    cloud = np.asarray(cloud, dtype=float).reshape(-1, 3)
    p = np.asarray(p, dtype=float).reshape(3)
    es = np.asarray(es, dtype=float).reshape(-1, 3)
    if cloud.shape[0] == 0:
        return np.zeros(es.shape[0], dtype=np.int64)
    off = cloud - p
    d = np.linalg.norm(off, axis=1)
    ring = (d >= r_p) & (d <= r_q_max)
    off = off[ring]
    if off.shape[0] == 0 or phi <= 0.0:
        return np.zeros(es.shape[0], dtype=np.int64)
    if phi > math.pi:
        return np.full(es.shape[0], off.shape[0], dtype=np.int64)
    v = off[None, :, :] - r_p * es[:, None, :]
    nv = np.linalg.norm(v, axis=2)
    dot = np.einsum("mnk,mk->mn", v, es)
    lit = (dot > math.cos(phi) * nv) | (nv == 0.0)
    return lit.sum(axis=1).astype(np.int64)


def visible_region_count_3d(cloud, p, r_p: float, r_q_max: float, phi: float, e) -> int:
    return int(visible_region_counts_3d(cloud, p, r_p, r_q_max, phi,
                                        np.asarray(e, dtype=float).reshape(1, 3))[0])
