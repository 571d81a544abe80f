"""Covariance-based intrinsic frames and rotation-invariant reference angles.

The frame of a neighborhood is the eigenbasis of C = X^T X, where the
rows of X are neighbor coordinates relative to the center (no 1/n
normalization). Axes are ordered by decreasing eigenvalue; in 3D the
first two span the tangent plane and the last is the normal.

Eigenvectors are only defined up to sign, so a deterministic reference
is fixed in two steps: an orientation rule that is a function of the
point set (hence rotation-equivariant) picks signs, and the in-plane
reference angle is the principal direction or its antipode, whichever
minimizes the total geodesic angular distance to the neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circular import angular_distance, wrap_angle
from .errors import DegenerateNeighborhoodError, ParameterError
from .lits2d import Neighborhood2D, PolarNeighbor

# Top eigenvalue ratios below 1 + EIGEN_RATIO_TOL flag an unstable frame.
EIGEN_RATIO_TOL = 1e-6

# Clamp for slightly negative eigenvalues produced by rounding.
EIGEN_NEG_TOL = -1e-9


@dataclass(frozen=True)
class Frame:
    """Orthonormal eigenbasis, columns ordered by decreasing eigenvalue.

    ``degenerate_axes`` flags repeated (or nearly repeated) leading
    eigenvalues: the individual axes are then arbitrary within their
    eigenspace and downstream canonicalizations are unstable.
    """

    vectors: np.ndarray
    eigenvalues: np.ndarray
    degenerate_axes: bool = False

    @property
    def u(self) -> np.ndarray:
        return self.vectors[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.vectors[:, 1]

    @property
    def n(self) -> np.ndarray:
        if self.vectors.shape[1] < 3:
            raise ParameterError("2D frame has no normal axis")
        return self.vectors[:, 2]

    @staticmethod
    def identity3d() -> "Frame":
        return Frame(np.eye(3), np.array([1.0, 1.0, 1.0]), degenerate_axes=True)


def covariance(points, center) -> np.ndarray:
    """X^T X with rows of X the coordinates of points relative to center."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ParameterError("need at least one point")
    x = pts - np.asarray(center, dtype=float).reshape(1, -1)
    return x.T @ x


def eigen_frame(c: np.ndarray) -> Frame:
    """Orthonormal eigenbasis of a symmetric PSD matrix, eigenvalues descending.

    Raises DegenerateNeighborhoodError when every eigenvalue vanishes
    (the neighborhood consists of copies of the center).
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] not in (2, 3):
        raise ParameterError("covariance must be 2x2 or 3x3")
    if not np.allclose(c, c.T, atol=1e-9 * (1.0 + np.abs(c).max())):
        raise ParameterError("covariance must be symmetric")
    evals, evecs = np.linalg.eigh(c)
    if np.any(evals < EIGEN_NEG_TOL * max(1.0, evals.max(initial=0.0))):
        raise ParameterError("covariance must be positive semidefinite")
    evals = np.clip(evals, 0.0, None)[::-1]
    evecs = evecs[:, ::-1]
    if evals[0] <= 0.0:
        raise DegenerateNeighborhoodError(
            "degenerate neighborhood (copies of the center point)")
    # Deterministic starting orientation: largest-magnitude component positive.
    for k in range(evecs.shape[1]):
        col = evecs[:, k]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            evecs[:, k] = -col
    ratios = evals[:-1] / np.maximum(evals[1:], np.finfo(float).tiny)
    degenerate = bool(np.any(ratios <= 1.0 + EIGEN_RATIO_TOL))
    return Frame(evecs, evals, degenerate_axes=degenerate)


def reference_angle(neighbors, axis: float) -> float:
    """The axis direction or its antipode minimizing total angular distance.

    ``neighbors`` is a sequence of PolarNeighbor or an array of angular
    coordinates. Ties break toward the smaller normalized angle.
    """
    if isinstance(neighbors, (list, tuple)) and neighbors and isinstance(neighbors[0], PolarNeighbor):
        thetas = np.asarray([q.theta for q in neighbors], dtype=float)
    else:
        thetas = np.asarray(neighbors, dtype=float).ravel()
    if thetas.size == 0:
        raise ParameterError("need at least one neighbor")
    c0 = wrap_angle(axis)
    c1 = wrap_angle(axis + math.pi)
    s0 = sum(angular_distance(t, c0) for t in thetas)
    s1 = sum(angular_distance(t, c1) for t in thetas)
    if s0 < s1:
        return c0
    if s1 < s0:
        return c1
    return min(c0, c1)


def principal_axis_angle(neigh: Neighborhood2D) -> float:
    """Direction (mod pi) of the leading covariance eigenvector."""
    fr = eigen_frame(covariance(neigh.offsets(), np.zeros(2)))
    return wrap_angle(math.atan2(fr.u[1], fr.u[0]))


def canonicalize(neigh: Neighborhood2D) -> Neighborhood2D:
    """Rotate angular coordinates so the reference direction maps to zero."""
    axis = principal_axis_angle(neigh)
    ref = reference_angle(neigh.thetas, axis)
    return Neighborhood2D(neigh.center, neigh.radii, neigh.thetas - ref)


def canonical_frame3d(offsets) -> Frame:
    """Rotation-equivariant frame for a cloud of 3D offsets.

    The normal sign follows the net offset along the normal, the
    tangent axis follows the reference-angle rule on the in-plane
    projections, and the middle axis completes a right-handed triple.
    Sign ties fall back to the starting orientation and flag the frame.
    """
    offsets = np.asarray(offsets, dtype=float).reshape(-1, 3)
    fr = eigen_frame(covariance(offsets, np.zeros(3)))
    u, n = fr.u.copy(), fr.n.copy()
    degenerate = fr.degenerate_axes
    g = offsets @ n
    s = g.sum()
    if abs(s) > 1e-12 * max(1.0, np.abs(g).max(initial=0.0)):
        if s < 0:
            n = -n
    else:
        degenerate = True
    w = np.cross(n, u)
    thetas = np.arctan2(offsets @ w, offsets @ u)
    if reference_angle(thetas, 0.0) != 0.0:
        u = -u
    v = np.cross(n, u)
    return Frame(np.column_stack([u, v, n]), fr.eigenvalues, degenerate_axes=degenerate)
