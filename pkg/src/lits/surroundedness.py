"""Surroundedness: the smallest limiting angle that lights the whole circle.

A point with illuminating neighbors is phi-surrounded when the union of
lit arcs covers the circle. Coverage is monotone in phi, so the infimum
phi_star is well defined; the point is not surrounded at phi_star
itself (arcs are open) and is surrounded above it.

The solver works pairwise. For an ordered pair (i, j) spanning the ccw
gap G from theta_i to theta_j, the two arcs first cover the gap minus a
single point at the unique root of

    g(phi) = 2*phi - G - arcsin(c_i sin phi) - arcsin(c_j sin phi),

with c = r_p / r. g is strictly increasing on [0, pi] whenever a
neighbor sits strictly outside the inner circle, and g(G/2) <= 0 <=
g(pi), so the root always exists in (0, pi] and Newton iterations with
a bisection fallback converge fast. phi_star is the max over
adjacent-neighbor gaps of the min over ordered pairs whose sweep
contains the gap.

Returned roots are landed a hair below the exact crossing (residual in
about [-3e-10, -1e-13]) so the not-surrounded-at-phi_star property
holds verbatim under exact open-arc coverage checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circular import AngularInterval, step_from_arcs, wrap_angle
from .errors import EmptyNeighborhoodError, GeometryError, NumericalError, ParameterError
from . import lits2d
from .lits2d import LitSParams, Neighborhood2D, PolarNeighbor

RESIDUAL_TOL = 1e-10
MAX_NEWTON_ITER = 100
DERIVATIVE_FLOOR = 1e-8

# Equal angular coordinates are deduplicated within this tolerance.
THETA_DEDUP_TOL = 1e-12

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SurroundednessResult:
    phi_star: float
    outside_set: list[AngularInterval] = field(default_factory=list)
    witnesses: tuple[int, int] | None = None


@dataclass(frozen=True)
class BoundaryLabel:
    kind: str  # "interior" or "boundary"
    outside_directions: list[float] = field(default_factory=list)
    inside_directions: list[float] = field(default_factory=list)

    @property
    def is_boundary(self) -> bool:
        return self.kind == "boundary"


def _as_polar_arrays(neighbors) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(neighbors, Neighborhood2D):
        return neighbors.radii.copy(), neighbors.thetas.copy()
    rs, ts = [], []
    for q in neighbors:
        if isinstance(q, PolarNeighbor):
            rs.append(q.r)
            ts.append(q.theta)
        else:
            rs.append(float(q[0]))
            ts.append(wrap_angle(float(q[1])))
    return np.asarray(rs), np.asarray(ts)


def _residual(phi: float, gap: float, ci: float, cj: float) -> tuple[float, float]:
    """g(phi) and g'(phi) with arcsin arguments clamped."""
    s = math.sin(phi)
    ai = max(-1.0, min(1.0, ci * s))
    aj = max(-1.0, min(1.0, cj * s))
    g = 2.0 * phi - gap - math.asin(ai) - math.asin(aj)
    c = math.cos(phi)
    dg = 2.0
    for ck, ak in ((ci, ai), (cj, aj)):
        den = math.sqrt(max(0.0, 1.0 - ak * ak))
        if den > 0.0:
            dg -= ck * c / den
        elif c > 0.0:
            dg -= 1.0  # c_k == 1 kink: arcsin(sin phi) has unit slope below pi/2
        else:
            dg += 1.0
    return g, dg


def _incidence_at_projection(r_src: float, theta_src: float, theta_dst: float,
                             r_p: float) -> float:
    """Incidence angle of the ray from one neighbor to another's projection
    onto the inner circle; an upper root bound for gaps up to pi."""
    ex, ey = math.cos(theta_dst), math.sin(theta_dst)
    wx = r_src * math.cos(theta_src) - r_p * ex
    wy = r_src * math.sin(theta_src) - r_p * ey
    nw = math.hypot(wx, wy)
    if nw == 0.0:
        return math.pi
    return math.acos(max(-1.0, min(1.0, (wx * ex + wy * ey) / nw)))


def _pair_guess(gap: float, ri: float, ti: float, rj: float, tj: float,
                r_p: float) -> float:
    if r_p == 0.0:
        return gap / 2.0
    if gap <= math.pi:
        return min(_incidence_at_projection(ri, ti, tj, r_p),
                   _incidence_at_projection(rj, tj, ti, r_p))
    return 0.5 * (gap / 2.0 + math.pi)


def _pair_root(gap: float, ci: float, cj: float, guess: float) -> float:
    """Unique root of g in (0, pi], landed just below the exact crossing."""
    if gap == 0.0:
        return 0.0
    lo, hi = gap / 2.0, math.pi
    x = min(max(guess, lo), hi)
    converged = False
    for _ in range(MAX_NEWTON_ITER):
        g, dg = _residual(x, gap, ci, cj)
        if abs(g) <= RESIDUAL_TOL:
            converged = True
            break
        if g > 0.0:
            hi = x
        else:
            lo = x
        if dg >= DERIVATIVE_FLOOR:
            step = x - g / dg
            x = step if lo < step < hi else 0.5 * (lo + hi)
        else:
            x = 0.5 * (lo + hi)
    if not converged:
        raise NumericalError(
            f"pair solver did not converge: gap={gap!r} ci={ci!r} cj={cj!r} "
            f"bracket=({lo!r}, {hi!r})")
    # Land strictly below the crossing so the closing point stays unlit. The
    # residual equals the unlit arc length, so a -1e-13 target is visible to
    # exact coverage checks while staying far inside every other tolerance.
    g, dg = _residual(x, gap, ci, cj)
    shifted = 0.0
    while g > -1e-13 and shifted < 1e-6:
        step = (g + 2e-13) / max(dg, DERIVATIVE_FLOOR)
        step = min(step, 1e-6 - shifted)
        x -= step
        shifted += step
        g, dg = _residual(x, gap, ci, cj)
    return max(x, 0.0)


def phi_star_pair(q_i, q_j, r_p: float) -> float:
    """Angle at which two arcs first cover their ccw gap minus a point.

    The gap is swept counterclockwise from q_i's direction to q_j's.
    """
    (ri,), (ti,) = _as_polar_arrays([q_i])
    (rj,), (tj,) = _as_polar_arrays([q_j])
    if r_p < 0.0 or ri < r_p or rj < r_p:
        raise GeometryError("neighbors must lie at or outside the inner radius")
    gap = wrap_angle(tj - ti)
    ci = min(1.0, r_p / ri) if r_p > 0.0 else 0.0
    cj = min(1.0, r_p / rj) if r_p > 0.0 else 0.0
    return _pair_root(gap, ci, cj, _pair_guess(gap, ri, ti, rj, tj, r_p))


def fully_lit_exact(radii, thetas, r_p: float, phi: float):
    """Exact open-arc coverage check, no breakpoint merging.

    Returns (covered, uncovered_angles). A closed uncovered set, if any,
    contains an arc endpoint, so checking endpoint candidates suffices.
    """
    radii = np.asarray(radii, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if phi > math.pi:
        return radii.size > 0, []
    if phi <= 0.0 or radii.size == 0:
        return False, []
    if r_p > 0.0:
        c = np.minimum(1.0, r_p / radii)
        w = phi - np.arcsin(np.clip(c * math.sin(phi), -1.0, 1.0))
    else:
        w = np.full(radii.shape, phi)
    full = w >= lits2d.OMEGA_FULL          # arcs missing a single point
    proper = (w > 0.0) & ~full
    starts = np.mod(thetas[proper] - w[proper], TWO_PI)
    lens = 2.0 * w[proper]
    miss = np.mod(thetas[full] + math.pi, TWO_PI)
    candidates = np.concatenate([starts, np.mod(starts + lens, TWO_PI), miss])
    if candidates.size == 0:
        return False, []
    inside = np.zeros(candidates.size, dtype=bool)
    if starts.size:
        d = np.mod(candidates[:, None] - starts[None, :], TWO_PI)
        inside = ((d > 0.0) & (d < lens[None, :])).any(axis=1)
    if miss.size:
        inside |= (candidates[:, None] != miss[None, :]).any(axis=1)
    uncovered = candidates[~inside]
    return uncovered.size == 0, sorted(set(float(u) for u in uncovered))


def _dedup_equal_angles(radii, thetas, order):
    """Keep only the farthest neighbor among equal angular coordinates."""
    n = radii.size
    keep = np.ones(n, dtype=bool)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and thetas[j + 1] - thetas[j] <= THETA_DEDUP_TOL:
            j += 1
        if j > i:
            keep[i:j + 1] = False
            keep[i + int(np.argmax(radii[i:j + 1]))] = True
        i = j + 1
    idx = np.nonzero(keep)[0]
    if idx.size > 1 and (thetas[idx[0]] + TWO_PI - thetas[idx[-1]]) <= THETA_DEDUP_TOL:
        a, b = idx[0], idx[-1]
        keep[a if radii[a] < radii[b] else b] = False
    return radii[keep], thetas[keep], order[keep]


def phi_star(neighbors, r_p: float) -> SurroundednessResult:
    """Smallest limiting angle making the neighbors light the whole circle.

    Neighbors sharing an angular coordinate are deduplicated keeping the
    farthest (farther points light wider arcs). Witness indices refer to
    the input order. A single neighbor never closes the circle for
    phi <= pi, giving phi_star = pi; the outside set collects the
    directions that close last.
    """
    radii, thetas = _as_polar_arrays(neighbors)
    if radii.size == 0:
        raise EmptyNeighborhoodError(
            "no illuminating neighbors: the point is never surrounded")
    if r_p < 0.0 or np.any(radii < r_p):
        raise GeometryError("neighbors must lie at or outside the inner radius")

    order = np.argsort(thetas, kind="stable")
    radii, thetas, orig = _dedup_equal_angles(radii[order], thetas[order],
                                              order)
    n = radii.size
    if n == 1:
        out = [AngularInterval.singleton(wrap_angle(thetas[0] + math.pi))]
        return SurroundednessResult(math.pi, out, None)

    cs = np.minimum(1.0, r_p / radii) if r_p > 0.0 else np.zeros(n)
    roots = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gap = thetas[j] - thetas[i] if i < j else TWO_PI - thetas[i] + thetas[j]
            guess = _pair_guess(gap, radii[i], thetas[i], radii[j], thetas[j], r_p)
            roots[i, j] = _pair_root(gap, cs[i], cs[j], guess)

    best = 0.0
    witness = None
    for k in range(n):
        k_best = math.inf
        k_pair = None
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                covers = (i <= k < j) if i < j else (i <= k or k < j)
                if covers and roots[i, j] < k_best:
                    k_best = roots[i, j]
                    k_pair = (i, j)
        if k_best > best:
            best = k_best
            witness = k_pair
    phi = min(best, math.pi)
    _, uncovered = fully_lit_exact(radii, thetas, r_p, phi)
    outside = [AngularInterval.singleton(u) for u in _cluster_angles(uncovered)]
    wit = (int(orig[witness[0]]), int(orig[witness[1]])) if witness else None
    return SurroundednessResult(phi, outside, wit)


def _cluster_angles(angles, tol: float = 1e-9) -> list[float]:
    """Collapse angles closer than tol (the endpoints bracketing one
    unlit sliver) to a single representative."""
    if not angles:
        return []
    angles = sorted(angles)
    groups = [[angles[0]]]
    for a in angles[1:]:
        if a - groups[-1][-1] <= tol:
            groups[-1].append(a)
        else:
            groups.append([a])
    if len(groups) > 1 and (angles[0] + TWO_PI - groups[-1][-1]) <= tol:
        groups[0].extend(a - TWO_PI for a in groups.pop())
    return [wrap_angle(float(np.mean(g))) for g in groups]


def _covered_at(radii, thetas, r_p: float, phi: float) -> bool:
    starts, ends, n_const = lits2d._raw_arcs(radii, thetas, r_p, phi)
    if n_const > 0:
        return True
    if starts.size == 0:
        return False
    return step_from_arcs(starts, ends, 0).min_value() >= 1


def phi_star_sweep_oracle(neighbors, r_p: float, grid_step: float,
                          coarse_factor: int | None = None) -> float:
    """Grid brute force: first covered grid angle minus one step, else pi.

    Scans phi = k * grid_step for k * grid_step < pi; coverage uses the
    step representation (measure-zero gaps invisible). Coverage is
    monotone in phi, so the scan may stride coarsely and refine inside
    the bracketing stride; ``coarse_factor=1`` forces the plain linear
    scan, and both orders return identical results.
    """
    if grid_step <= 0.0:
        raise ParameterError("grid_step must be positive")
    radii, thetas = _as_polar_arrays(neighbors)
    n_grid = 0
    while n_grid * grid_step < math.pi:
        n_grid += 1
    if coarse_factor is None:
        coarse_factor = max(1, int(0.02 / grid_step))

    def covered(k: int) -> bool:
        return _covered_at(radii, thetas, r_p, k * grid_step)

    probes = list(range(0, n_grid, coarse_factor))
    if probes[-1] != n_grid - 1:
        probes.append(n_grid - 1)
    lo = 0
    for k in probes:
        if covered(k):
            for fine in range(lo, k + 1):
                if covered(fine):
                    return max(0.0, (fine - 1) * grid_step)
            break
        lo = k + 1
    return math.pi


def is_surrounded(neigh: Neighborhood2D, params: LitSParams, multiplicity: int = 1) -> bool:
    """Whether the cumulative count stays at or above the multiplicity."""
    if multiplicity < 1:
        raise ParameterError("multiplicity must be a positive integer")
    return lits2d.cumulative_lits(neigh, params).min_value() >= multiplicity


def classify_boundary(neigh: Neighborhood2D, params: LitSParams, i0: int = 1) -> BoundaryLabel:
    """Interior iff the cumulative count clears i0 everywhere.

    Boundary points carry the centers of the maximal below-threshold
    arcs (outside directions) and of the complement (inside directions).
    """
    if i0 < 1:
        raise ParameterError("i0 must be a positive integer")
    f = lits2d.cumulative_lits(neigh, params)
    below = f.sublevel_intervals(i0)
    if not below:
        return BoundaryLabel("interior")
    above = f.superlevel_intervals(i0)
    return BoundaryLabel("boundary",
                         [iv.center for iv in below],
                         [iv.center for iv in above])


def surroundedness_class(neigh: Neighborhood2D, lam: float, phi0: float) -> int:
    """Smallest j such that the point is (j * phi0)-surrounded.

    Chains through phi_star: the class j satisfies
    (j-1)*phi0 <= phi_star < j*phi0 away from measure-zero edge cases.
    Capped at ceil(pi/phi0) + 1, the sentinel for never-surrounded sets.
    """
    if phi0 <= 0.0:
        raise ParameterError("phi0 must be positive")
    cap = int(math.ceil(math.pi / phi0)) + 1
    try:
        radii, thetas, r_p = lits2d.illuminating_neighbors(neigh, lam)
    except EmptyNeighborhoodError:
        return cap
    if radii.size == 0:
        return cap
    res = phi_star(list(zip(radii, thetas)), r_p)
    j = int(math.floor(res.phi_star / phi0)) + 1
    return min(j, cap)
