"""Scalar descriptor extraction and synthetic corner/line neighborhoods.

The synthetic generators model the two benchmark neighborhood types:
annular-sector corners (optionally with von Mises angular spread) and
width-limited lines clipped to the unit disk. All randomness flows from
an explicit seed; identical seeds give identical neighborhoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circular import TWO_PI, StepFnS1
from .errors import ParameterError
from .lits2d import LitSParams, Neighborhood2D, lits


@dataclass(frozen=True)
class DescriptorRecord:
    """Per-point scalar summary of a step function."""

    zero_set_length: float
    total_variation: float
    max_value: int
    unlit_proportion: float
    value_range: int
    log_range: float
    phi_star: Optional[float] = None
    surroundedness_class: Optional[int] = None

    def to_dict(self) -> dict:
        out = {
            "zero_set_length": self.zero_set_length,
            "total_variation": self.total_variation,
            "max_value": self.max_value,
            "unlit_proportion": self.unlit_proportion,
            "value_range": self.value_range,
            "log_range": self.log_range,
        }
        if self.phi_star is not None:
            out["phi_star"] = self.phi_star
        if self.surroundedness_class is not None:
            out["surroundedness_class"] = self.surroundedness_class
        return out


@dataclass(frozen=True)
class CornerSpec:
    """Annular-sector neighborhood: aperture, direction, inner fraction.

    The outer radius is 1; points are area-uniform between ``lam`` and 1.
    ``angular_law`` is "uniform" (angles uniform over the aperture) or
    "von_mises" (angles von Mises about ``mu``, aperture ignored).
    """

    alpha: float
    lam: float
    n_points: int
    theta: float = 0.0
    angular_law: str = "uniform"
    mu: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= TWO_PI:
            raise ParameterError("aperture must lie in (0, 2*pi]")
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError("lam must lie in [0, 1]")
        if self.n_points < 1:
            raise ParameterError("n_points must be positive")
        if self.angular_law not in ("uniform", "von_mises"):
            raise ParameterError("angular_law must be 'uniform' or 'von_mises'")
        if self.kappa < 0.0:
            raise ParameterError("kappa must be non-negative")


@dataclass(frozen=True)
class LineSpec:
    """Strip neighborhood through the center, clipped to the unit disk.

    ``cross_law`` is "uniform" (area-uniform over the clipped strip) or
    "triangular" (perpendicular offsets peak on the axis and vanish at
    +-width, as scanline spacing does away from a central scanner).
    """

    width: float
    direction: float = 0.0
    n_points: int = 100
    cross_law: str = "uniform"

    def __post_init__(self):
        if not 0.0 < self.width <= 1.0:
            raise ParameterError("width must lie in (0, 1]")
        if self.n_points < 1:
            raise ParameterError("n_points must be positive")
        if self.cross_law not in ("uniform", "triangular"):
            raise ParameterError("cross_law must be 'uniform' or 'triangular'")


def corner_zero_bound(alpha: float, lam: float) -> float:
    """Lower bound for the unlit length of an annular-sector neighborhood.

    The widest reach of the sector's lit arcs is set by its two outer
    corners, leaving at least 2*pi - alpha - 2*arccos(lam) unlit.
    """
    if not 0.0 <= alpha <= TWO_PI:
        raise ParameterError("alpha must lie in [0, 2*pi]")
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("lam must lie in [0, 1]")
    return max(0.0, TWO_PI - alpha - 2.0 * math.acos(lam))


def summarize(f: StepFnS1,
              phi_star: Optional[float] = None,
              surroundedness_class: Optional[int] = None) -> DescriptorRecord:
    """Scalar measurements of a step function."""
    zero_len = f.measure_below(1)
    vmax = f.max_value()
    vrange = vmax - f.min_value()
    return DescriptorRecord(
        zero_set_length=zero_len,
        total_variation=f.total_variation(),
        max_value=vmax,
        unlit_proportion=zero_len / TWO_PI,
        value_range=vrange,
        log_range=math.log1p(vrange),
        phi_star=phi_star,
        surroundedness_class=surroundedness_class,
    )


def _area_uniform_radii(rng: np.random.Generator, lo: float, hi: float, n: int) -> np.ndarray:
    # density proportional to r: uniform over the annulus area
    u = rng.random(n)
    return np.sqrt(lo * lo + u * (hi * hi - lo * lo))


def generate_corner(spec: CornerSpec, seed: int) -> Neighborhood2D:
    """Sample a corner neighborhood; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    r = _area_uniform_radii(rng, spec.lam, 1.0, spec.n_points)
    if spec.angular_law == "uniform":
        t = spec.theta + (rng.random(spec.n_points) - 0.5) * spec.alpha
    else:
        t = spec.theta + rng.vonmises(spec.mu, spec.kappa, spec.n_points)
    return Neighborhood2D(np.zeros(2), r, t)


def generate_line(spec: LineSpec, seed: int) -> Neighborhood2D:
    """Sample a line neighborhood; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    n = spec.n_points
    if spec.cross_law == "uniform":
        axial = np.empty(0)
        perp = np.empty(0)
        while axial.size < n:
            m = max(64, 2 * (n - axial.size))
            s = rng.uniform(-1.0, 1.0, m)
            o = rng.uniform(-spec.width, spec.width, m)
            ok = s * s + o * o <= 1.0
            axial = np.concatenate([axial, s[ok]])
            perp = np.concatenate([perp, o[ok]])
        axial, perp = axial[:n], perp[:n]
    else:
        perp = rng.triangular(-spec.width, 0.0, spec.width, n)
        chord = np.sqrt(np.clip(1.0 - perp * perp, 0.0, None))
        axial = rng.uniform(-1.0, 1.0, n) * chord
    cd, sd = math.cos(spec.direction), math.sin(spec.direction)
    xy = np.column_stack([axial * cd - perp * sd, axial * sd + perp * cd])
    return Neighborhood2D.from_offsets(np.zeros(2), xy)


def relative_error_corner(spec: CornerSpec, params: LitSParams, seed: int) -> float:
    """Relative slack of the corner bound against the measured unlit length.

    Uses the indicator step function at the given parameters; NaN when
    the measured unlit set is empty. Meaningful for phi = pi/2, where
    the bound's geometry applies.
    """
    neigh = generate_corner(spec, seed)
    zero_len = summarize(lits(neigh, params)).zero_set_length
    if zero_len <= 0.0:
        return math.nan
    return (zero_len - corner_zero_bound(spec.alpha, params.lam)) / zero_len


def percentile_ranks(values) -> np.ndarray:
    """Nearest-rank percentile of each value within the list, in (0, 1].

    Ties share ranks; a singleton maps to 1.0.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ParameterError("need at least one value")
    ranks = np.searchsorted(np.sort(v), v, side="right")
    return ranks / v.size
