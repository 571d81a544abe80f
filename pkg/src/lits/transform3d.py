"""Cap-list form of the 3D cumulative descriptor and its inversion.

Each illuminating neighbor lights an open spherical cap about its own
direction with half-angle phi - arcsin((r_p/r_q) sin phi). The cap
boundary pins the neighbor to a ray and the half-angle pins its
distance, so for phi strictly inside (0, pi) the cap multiset can be
peeled back to the exact neighbor multiset. The planar analogue fails:
jump points on the circle can be re-paired into a different point set
with the same counting function, and the generator here constructs
such a pair explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circular import wrap_angle
from .errors import GeometryError, ParameterError
from .lits2d import Neighborhood2D

# Caps with identical ray and half-angle merge within this tolerance.
CAP_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class SphericalCap:
    """Open cap: center direction, angular radius, and multiplicity."""

    center: tuple[float, float, float]
    half_angle: float
    multiplicity: int = 1

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (3,) or abs(np.linalg.norm(c) - 1.0) > 1e-9:
            raise GeometryError("cap center must be a unit 3-vector")
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        if not 0.0 < self.half_angle < math.pi:
            raise GeometryError("half_angle must lie in (0, pi)")
        if self.multiplicity < 1:
            raise ParameterError("multiplicity must be a positive integer")

    def direction(self) -> np.ndarray:
        return np.asarray(self.center)

    def to_json(self) -> dict:
        return {"center": list(self.center), "half_angle": self.half_angle,
                "multiplicity": self.multiplicity}

    @classmethod
    def from_json(cls, obj: dict) -> "SphericalCap":
        return cls(tuple(obj["center"]), float(obj["half_angle"]),
                   int(obj.get("multiplicity", 1)))


def cap_of(offset, r_p: float, phi: float) -> SphericalCap:
    """Lit cap of a neighbor at the given offset from the center point."""
    off = np.asarray(offset, dtype=float).reshape(3) if not hasattr(offset, "offset") \
        else offset.offset()
    r_q = float(np.linalg.norm(off))
    if not r_q > r_p > 0.0:
        raise GeometryError("need r_q > r_p > 0")
    if not 0.0 < phi < math.pi:
        raise ParameterError("phi must lie in (0, pi)")
    half = phi - math.asin(min(1.0, (r_p / r_q) * math.sin(phi)))
    return SphericalCap(tuple(off / r_q), half)


def recover_neighbor(cap: SphericalCap, r_p: float, phi: float) -> np.ndarray:
    """Exact inverse of :func:`cap_of`: the offset generating the cap."""
    if not 0.0 < phi < math.pi:
        raise ParameterError("phi must lie in (0, pi)")
    if r_p <= 0.0:
        raise GeometryError("r_p must be positive")
    if cap.half_angle >= phi:
        raise GeometryError("cap inconsistent with phi: half_angle >= phi")
    r_q = r_p * math.sin(phi) / math.sin(phi - cap.half_angle)
    if r_q < r_p * (1.0 - 1e-12):
        raise GeometryError("cap inconsistent with phi: recovered r_q < r_p")
    return r_q * cap.direction()


def caps_of_offsets(offsets, r_p: float, phi: float) -> list[SphericalCap]:
    """Caps of a neighbor multiset, merging coincident caps by multiplicity."""
    offsets = np.asarray(offsets, dtype=float).reshape(-1, 3)
    caps: list[SphericalCap] = []
    for off in offsets:
        cap = cap_of(off, r_p, phi)
        for k, prev in enumerate(caps):
            if (abs(prev.half_angle - cap.half_angle) <= CAP_MERGE_TOL
                    and np.linalg.norm(prev.direction() - cap.direction()) <= CAP_MERGE_TOL):
                caps[k] = SphericalCap(prev.center, prev.half_angle,
                                       prev.multiplicity + 1)
                break
        else:
            caps.append(cap)
    return caps


def invert_cumulative(caps, r_p: float, phi: float) -> np.ndarray:
    """Neighbor offsets generating the cap list, one per multiplicity unit.

    Refused outside phi in (0, pi): at phi = 0 caps are points and at
    phi >= pi they cover the sphere minus a point, and neither pins a
    neighbor.
    """
    if not 0.0 < phi < math.pi:
        raise ParameterError("inversion requires phi in (0, pi)")
    out = []
    for cap in caps:
        off = recover_neighbor(cap, r_p, phi)
        out.extend([off] * cap.multiplicity)
    return np.asarray(out, dtype=float).reshape(-1, 3)


def _radius_for_halfwidth(w: float, r_p: float, phi: float) -> float:
    """Distance whose lit arc at angle phi has half-width w."""
    return r_p * math.sin(phi) / math.sin(phi - w)


def _neighborhood_from_pairing(ups, downs, crossed: bool, r_p: float,
                               phi: float) -> Neighborhood2D:
    """Two-point neighborhood whose arcs pair the given jump angles.

    ``ups``/``downs`` hold two up-jump and two down-jump angles; the
    straight pairing joins them in order, the crossed pairing swaps the
    down-jumps.
    """
    d0, d1 = (downs[1], downs[0]) if crossed else (downs[0], downs[1])
    radii, thetas = [], []
    for a, b in ((ups[0], d0), (ups[1], d1)):
        length = wrap_angle(b - a)
        w = 0.5 * length
        thetas.append(wrap_angle(a + w))
        radii.append(_radius_for_halfwidth(w, r_p, phi))
    return Neighborhood2D(np.zeros(2), radii, thetas)


def two_d_counterexample(phi: float, seed: int = 0) -> tuple[Neighborhood2D, Neighborhood2D]:
    """Two distinct planar point pairs with identical counting functions.

    The construction places two up-jumps and two down-jumps on the
    circle such that both ways of pairing them into arcs are geometrically
    realizable (arc half-widths stay inside the attainable band for the
    given phi), then inverts the arc formula for the radii. Both
    neighborhoods assume an inner radius r_p = 1, i.e. evaluate them
    with lam = 1 / r_q_max.
    """
    if not 0.0 < phi < math.pi:
        raise ParameterError("phi must lie in (0, pi)")
    rng = np.random.default_rng(seed)
    # Attainable half-widths: w in (max(0, 2*phi - pi), phi).
    w_lo = max(0.0, 2.0 * phi - math.pi)
    band = phi - w_lo
    while True:
        x1, x2, x4 = np.sort(rng.uniform(0.1, 0.9, 3))
        if x2 - x1 >= 0.05 and x4 - x2 >= 0.05:
            break
    s = 2.0 * (x2 - x1) * band
    g0 = 2.0 * w_lo + 2.0 * x2 * band
    g1 = 2.0 * w_lo + 2.0 * x4 * band
    ups = (0.0, s)
    downs = (g0, g1)
    first = _neighborhood_from_pairing(ups, downs, False, 1.0, phi)
    second = _neighborhood_from_pairing(ups, downs, True, 1.0, phi)
    return first, second
