"""Scikit-learn style wrappers around the per-point descriptor pipeline.

``LitSFeatures`` is a transformer: ``fit`` indexes the scene cloud and
``transform`` maps query points to rows of scalar descriptors of their
lit-up step functions. ``BoundaryDetector`` labels points as boundary
(1) or interior (0) from cumulative surroundedness. Both follow the
usual get_params/set_params contract, so they compose with pipelines
and grid search.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import frames, lits2d, lits3d, pcio, surroundedness
from .descriptors import summarize
from .errors import ParameterError
from .lits2d import LitSParams


def check_points(X, dim: int | None = None) -> np.ndarray:
    """Validate a point array: finite, 2D, with 2 or 3 columns."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] not in (2, 3):
        raise ParameterError("X must be an (n, 2) or (n, 3) array")
    if not np.all(np.isfinite(X)):
        raise ParameterError("X must be finite")
    if dim is not None and X.shape[1] != dim:
        raise ParameterError(f"X must have {dim} columns")
    return X


FEATURE_NAMES = ("zero_set_length", "total_variation", "max_value",
                 "unlit_proportion", "value_range", "log_range")


def _frame_for(offsets: np.ndarray, normal_mode: str) -> frames.Frame:
    if normal_mode == "fixed_z":
        return frames.Frame.identity3d()
    fr = frames.canonical_frame3d(offsets)
    if normal_mode == "tangent":
        return fr
    if normal_mode == "max_z_orthocomplement":
        return _max_z_frame(fr.n)
    raise ParameterError(f"unknown normal_mode {normal_mode!r}")


def _max_z_frame(n_tangent: np.ndarray) -> frames.Frame:
    """Frame whose normal is the unit vector orthogonal to the tangent
    normal with maximal Z-component; falls back to X when degenerate."""
    z = np.array([0.0, 0.0, 1.0])
    proj = z - np.dot(z, n_tangent) * n_tangent
    norm = np.linalg.norm(proj)
    degenerate = norm <= 1e-9
    n_new = np.array([1.0, 0.0, 0.0]) if degenerate else proj / norm
    helper = z if abs(np.dot(n_new, z)) < 1.0 - 1e-9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(helper, n_new)
    u = u / np.linalg.norm(u)
    v = np.cross(n_new, u)
    return frames.Frame(np.column_stack([u, v, n_new]), np.ones(3),
                        degenerate_axes=degenerate)


def step_function_for(offsets: np.ndarray, lam: float, phi: float,
                      cumulative: bool = True, normal_mode: str = "tangent",
                      r_p_abs: float | None = None):
    """Step function of one neighborhood given as offsets from its center.

    Returns (step_fn, neighborhood) where the neighborhood is 2D or 3D
    depending on the offsets. ``r_p_abs`` overrides lam with an absolute
    inner radius clamped to the neighborhood radius.
    """
    offsets = np.asarray(offsets, dtype=float)
    if offsets.shape[1] == 2:
        neigh = lits2d.Neighborhood2D.from_offsets(np.zeros(2), offsets)
        lam_eff = lam if r_p_abs is None else min(1.0, r_p_abs / neigh.r_q_max)
        params = LitSParams(lam_eff, phi)
        fn = lits2d.cumulative_lits(neigh, params) if cumulative \
            else lits2d.lits(neigh, params)
        return fn, neigh
    frame = _frame_for(offsets, normal_mode)
    neigh = lits3d.Neighborhood3D.from_offsets(np.zeros(3), offsets, frame)
    lam_eff = lam if r_p_abs is None else min(1.0, r_p_abs / neigh.r_q_max)
    params = LitSParams(lam_eff, phi)
    fn = lits3d.cumulative_along_normal(neigh, params) if cumulative \
        else lits3d.lits_along_normal(neigh, params)
    return fn, neigh


class LitSFeatures(TransformerMixin, BaseEstimator):
    """Per-point scalar descriptors of lit-up step functions.

    Parameters mirror the descriptor pipeline: neighborhoods come from
    a radius or k-nearest query against the fitted cloud, the inner
    radius is ``lam`` times the realized neighborhood radius, and
    ``phi`` is the limiting angle of incidence.
    """

    def __init__(self, neighborhood: str = "knn", k: int = 20, radius: float = 1.0,
                 lam: float = 2.0 / 3.0, phi: float = math.pi / 2.0,
                 cumulative: bool = True, normal_mode: str = "tangent",
                 r_p_abs: float | None = None):
        self.neighborhood = neighborhood
        self.k = k
        self.radius = radius
        self.lam = lam
        self.phi = phi
        self.cumulative = cumulative
        self.normal_mode = normal_mode
        self.r_p_abs = r_p_abs

    def fit(self, X, y=None):
        X = check_points(X)
        if self.neighborhood not in ("knn", "radius"):
            raise ParameterError("neighborhood must be 'knn' or 'radius'")
        self.cloud_ = pcio.PointCloud(X)
        self.index_ = pcio.build_index(self.cloud_)
        return self

    def _neighbors(self, p) -> pcio.NeighborSet:
        if self.neighborhood == "knn":
            return pcio.query_knn(self.index_, p, self.k)
        return pcio.query_radius(self.index_, p, self.radius)

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "index_"):
            raise NotFittedError("fit must run before transform")
        X = check_points(X, dim=self.cloud_.dim)
        out = np.empty((X.shape[0], len(FEATURE_NAMES)))
        for i, p in enumerate(X):
            ns = self._neighbors(p)
            if len(ns) == 0:
                out[i] = self._empty_row()
                continue
            fn, _ = step_function_for(ns.offsets, self.lam, self.phi,
                                      cumulative=self.cumulative,
                                      normal_mode=self.normal_mode,
                                      r_p_abs=self.r_p_abs)
            rec = summarize(fn)
            out[i] = [rec.zero_set_length, rec.total_variation, rec.max_value,
                      rec.unlit_proportion, rec.value_range, rec.log_range]
        return out

    @staticmethod
    def _empty_row() -> list[float]:
        # an empty neighborhood lights nothing
        return [2.0 * math.pi, 0.0, 0, 1.0, 0, 0.0]

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FEATURE_NAMES, dtype=object)


class BoundaryDetector(BaseEstimator):
    """Boundary labeling from cumulative surroundedness.

    A point is interior when its cumulative step function clears the
    threshold everywhere; the threshold is ``threshold_pct`` percent of
    the maximum value (at least 1), or a fixed ``i0`` when given.
    ``predict`` returns 1 for boundary points; ``outside_directions_``
    holds one list of unit vectors per query point.
    """

    def __init__(self, neighborhood: str = "radius", k: int = 20, radius: float = 1.0,
                 lam: float = 1.0 / 3.0, phi: float = 2.0 * math.pi / 3.0,
                 threshold_pct: float | None = None, i0: int | None = None,
                 normal_mode: str = "tangent"):
        self.neighborhood = neighborhood
        self.k = k
        self.radius = radius
        self.lam = lam
        self.phi = phi
        self.threshold_pct = threshold_pct
        self.i0 = i0
        self.normal_mode = normal_mode

    def fit(self, X, y=None):
        X = check_points(X)
        self.cloud_ = pcio.PointCloud(X)
        self.index_ = pcio.build_index(self.cloud_)
        return self

    def _threshold(self, fn) -> int:
        if self.i0 is not None:
            return max(1, int(self.i0))
        if self.threshold_pct is not None:
            return max(1, int(math.ceil(self.threshold_pct / 100.0 * fn.max_value())))
        return 1

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "index_"):
            raise NotFittedError("fit must run before predict")
        X = check_points(X, dim=self.cloud_.dim)
        labels = np.zeros(X.shape[0], dtype=int)
        self.outside_directions_ = []
        for i, p in enumerate(X):
            if self.neighborhood == "knn":
                ns = pcio.query_knn(self.index_, p, self.k)
            else:
                ns = pcio.query_radius(self.index_, p, self.radius)
            if len(ns) == 0:
                labels[i] = 1
                self.outside_directions_.append([])
                continue
            fn, neigh = step_function_for(ns.offsets, self.lam, self.phi,
                                          normal_mode=self.normal_mode)
            below = fn.sublevel_intervals(self._threshold(fn))
            labels[i] = 1 if below else 0
            dirs = []
            for iv in below:
                t = iv.center
                if self.cloud_.dim == 2:
                    dirs.append(np.array([math.cos(t), math.sin(t)]))
                else:
                    fr = neigh.frame
                    dirs.append(math.cos(t) * fr.u + math.sin(t) * fr.v)
            self.outside_directions_.append(dirs)
        return labels

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict(X)
