"""Command-line surface: compute, boundary, synth, invert, phi-star.

Angles are accepted either as decimals (radians) or as multiples of pi
written ``Npi/M`` (``pi/2``, ``2pi/3``, ``0.95pi``), which keeps configs
free of decimal drift. All commands are deterministic given their
inputs and seed; floats are emitted with round-trip (up to 17
significant digit) formatting, so reruns are byte-identical.

Exit codes: 0 success, 2 usage error, 3 input parse error, 4 numerical
failure. The LITS_THREADS environment variable caps the per-point
worker pool; output order never depends on it.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import descriptors, lits2d, pcio, surroundedness, transform3d
from .descriptors import CornerSpec, LineSpec, corner_zero_bound, summarize
from .errors import (EmptyNeighborhoodError, LitsError, NumericalError,
                     ParameterError, ParseError)
from .estimators import step_function_for
from .lits2d import LitSParams

_ANGLE_RE = re.compile(r"^\s*([0-9]*\.?[0-9]*)\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$",
                       re.IGNORECASE)


def parse_angle(text: str) -> float:
    """Parse 'Npi/M' literals or plain radian decimals."""
    m = _ANGLE_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        if den == 0:
            raise ParameterError("zero denominator in angle literal")
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ParameterError(f"cannot parse angle {text!r}; "
                             "use radians or an Npi/M literal") from None


class AngleType(click.ParamType):
    name = "angle"

    def convert(self, value, param, ctx):
        if isinstance(value, (int, float)):
            return float(value)
        try:
            return parse_angle(value)
        except ParameterError as exc:
            self.fail(str(exc), param, ctx)


ANGLE = AngleType()


def _fmt(x) -> str:
    """Round-trip float formatting shared by every writer."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _json_line(obj: dict) -> str:
    return json.dumps(obj, allow_nan=True)


def _catching(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except NumericalError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)
        except LitsError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
    return wrapper


def _read_cloud(path: str) -> pcio.PointCloud:
    if path.endswith(".ply"):
        return pcio.read_ply(path)
    return pcio.read_xyz(path)


def _pool_map(fn, items):
    workers = int(os.environ.get("LITS_THREADS", "1"))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _neighbor_query(index, p, radius, knn):
    if knn is not None:
        return pcio.query_knn(index, p, knn)
    return pcio.query_radius(index, p, radius)


@click.group()
def main():
    """Lit-up segment descriptors for point clouds."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--lambda", "lam", type=float, default=2.0 / 3.0, show_default=True,
              help="Inner radius as a fraction of the neighborhood radius.")
@click.option("--phi", type=ANGLE, default="pi/2", show_default=True,
              help="Limiting angle of incidence.")
@click.option("--r-p-abs", type=float, default=None,
              help="Absolute inner radius overriding --lambda.")
@click.option("--radius", type=float, default=None, help="Radius neighborhood query.")
@click.option("--knn", type=int, default=None, help="k-nearest neighborhood query.")
@click.option("--normal-mode", type=click.Choice(["tangent", "fixed-z",
                                                  "max-z-orthocomplement"]),
              default="tangent", show_default=True)
@click.option("--cumulative/--regular", default=True, show_default=True)
@click.option("--smooth-window", type=int, default=1, show_default=True,
              help="Odd moving-average window for the total-variation measurement.")
@click.option("--samples", type=int, default=360, show_default=True,
              help="Sample count used when smoothing.")
@click.option("--threshold-pct", type=float, default=None,
              help="Adds the proportion of the domain below this percentage "
                   "of the illuminating-neighbor count.")
@click.option("--with-phi-star", is_flag=True, default=False,
              help="Compute the surroundedness angle per point (2D only).")
@click.option("--with-class", is_flag=True, default=False,
              help="Compute the surroundedness class per point (2D only).")
@click.option("--phi0", type=ANGLE, default="pi/8", show_default=True,
              help="Base angle for the surroundedness class.")
@click.option("--percentiles", is_flag=True, default=False,
              help="Add the cloud-wide percentile rank of total variation.")
@click.option("--colored-ply", type=click.Path(), default=None)
@click.option("--color-by", default="unlit_proportion", show_default=True)
@click.option("--colormap", type=click.Choice(["coolwarm", "jet", "green-red"]),
              default="coolwarm", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_catching
def compute(input_path, output_path, lam, phi, r_p_abs, radius, knn, normal_mode,
            cumulative, smooth_window, samples, threshold_pct, with_phi_star,
            with_class, phi0, percentiles, colored_ply, color_by, colormap, seed):
    """Per-point descriptor records (JSON lines or CSV), optional colored PLY."""
    if (radius is None) == (knn is None):
        raise click.UsageError("choose exactly one of --radius or --knn")
    cloud = _read_cloud(input_path)
    index = pcio.build_index(cloud)
    mode = normal_mode.replace("-", "_")

    def one(i: int) -> dict:
        p = cloud.positions[i]
        try:
            ns = _neighbor_query(index, p, radius, knn)
        except EmptyNeighborhoodError:
            ns = None
        if ns is None or len(ns) == 0:
            rec = {"index": i, "n_neighbors": 0, "r_q_max": 0.0,
                   "zero_set_length": 2.0 * math.pi, "total_variation": 0.0,
                   "max_value": 0, "unlit_proportion": 1.0, "value_range": 0,
                   "log_range": 0.0}
            return rec
        fn, neigh = step_function_for(ns.offsets, lam, phi, cumulative=cumulative,
                                      normal_mode=mode, r_p_abs=r_p_abs)
        if smooth_window > 1:
            smooth = fn.sample_and_smooth(samples, smooth_window)
            tv = float(np.abs(np.diff(smooth, append=smooth[:1])).sum())
        else:
            tv = fn.total_variation()
        s = summarize(fn)
        rec = {"index": i, "n_neighbors": len(ns), "r_q_max": ns.r_q_max,
               "zero_set_length": s.zero_set_length, "total_variation": tv,
               "max_value": s.max_value, "unlit_proportion": s.unlit_proportion,
               "value_range": s.value_range, "log_range": s.log_range}
        if threshold_pct is not None:
            i0 = max(1, int(math.ceil(threshold_pct / 100.0 * len(ns))))
            rec["below_threshold_proportion"] = fn.measure_below(i0) / (2.0 * math.pi)
        if (with_phi_star or with_class) and cloud.dim == 2:
            lam_eff = lam if r_p_abs is None else min(1.0, r_p_abs / neigh.r_q_max)
            if with_phi_star:
                radii, thetas, r_p = lits2d.illuminating_neighbors(neigh, lam_eff)
                rec["phi_star"] = surroundedness.phi_star(
                    list(zip(radii, thetas)), r_p).phi_star
            if with_class:
                rec["surroundedness_class"] = surroundedness.surroundedness_class(
                    neigh, lam_eff, phi0)
        return rec

    records = _pool_map(one, range(len(cloud)))
    if percentiles:
        ranks = descriptors.percentile_ranks([r["total_variation"] for r in records])
        for rec, rank in zip(records, ranks):
            rec["tv_percentile"] = float(rank)

    _write_records(records, output_path)
    if colored_ply is not None:
        field_vals = np.array([float(r.get(color_by, math.nan)) for r in records])
        colored = pcio.PointCloud(cloud.positions, {color_by: field_vals})
        pcio.write_ply_colored(colored, color_by, colormap.replace("-", "_"),
                               colored_ply)
    click.echo(f"wrote {len(records)} records to {output_path}")


def _write_records(records: list[dict], path: str) -> None:
    keys: list[str] = []
    for rec in records:
        for k in rec:
            if k not in keys:
                keys.append(k)
    if path.endswith(".csv"):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(keys)
            for rec in records:
                writer.writerow([_fmt(rec[k]) if k in rec else "" for k in keys])
    else:
        with open(path, "w") as fh:
            for rec in records:
                fh.write(_json_line(rec) + "\n")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--lambda", "lam", type=float, default=1.0 / 3.0, show_default=True)
@click.option("--phi", type=ANGLE, default="2pi/3", show_default=True)
@click.option("--radius", type=float, default=None)
@click.option("--knn", type=int, default=None)
@click.option("--i0", type=int, default=None, help="Fixed interior threshold.")
@click.option("--threshold-pct", type=float, default=None,
              help="Threshold as a percentage of the maximum cumulative value.")
@click.option("--normal-mode", type=click.Choice(["tangent", "fixed-z",
                                                  "max-z-orthocomplement"]),
              default="tangent", show_default=True)
@click.option("--colored-ply", type=click.Path(), default=None)
@_catching
def boundary(input_path, output_path, lam, phi, radius, knn, i0, threshold_pct,
             normal_mode, colored_ply):
    """Label boundary points and export their outside directions."""
    if (radius is None) == (knn is None):
        raise click.UsageError("choose exactly one of --radius or --knn")
    if i0 is not None and threshold_pct is not None:
        raise click.UsageError("choose at most one of --i0 and --threshold-pct")
    cloud = _read_cloud(input_path)
    index = pcio.build_index(cloud)
    mode = normal_mode.replace("-", "_")

    def one(i: int) -> dict:
        p = cloud.positions[i]
        try:
            ns = _neighbor_query(index, p, radius, knn)
        except EmptyNeighborhoodError:
            ns = None
        if ns is None or len(ns) == 0:
            return {"index": i, "boundary": True, "outside_directions": [],
                    "inside_directions": []}
        fn, neigh = step_function_for(ns.offsets, lam, phi, cumulative=True,
                                      normal_mode=mode)
        if i0 is not None:
            thr = max(1, i0)
        elif threshold_pct is not None:
            thr = max(1, int(math.ceil(threshold_pct / 100.0 * fn.max_value())))
        else:
            thr = 1
        below = fn.sublevel_intervals(thr)
        above = fn.superlevel_intervals(thr)

        def vec(t: float) -> list[float]:
            if cloud.dim == 2:
                return [math.cos(t), math.sin(t)]
            fr = neigh.frame
            out = math.cos(t) * fr.u + math.sin(t) * fr.v
            return [float(x) for x in out]

        return {"index": i, "boundary": bool(below),
                "outside_directions": [vec(iv.center) for iv in below],
                "inside_directions": [vec(iv.center) for iv in above] if below else []}

    records = _pool_map(one, range(len(cloud)))
    with open(output_path, "w") as fh:
        for rec in records:
            fh.write(_json_line(rec) + "\n")
    if colored_ply is not None:
        flags = np.array([1.0 if r["boundary"] else 0.0 for r in records])
        colored = pcio.PointCloud(cloud.positions, {"boundary": flags})
        pcio.write_ply_colored(colored, "boundary", "green_red", colored_ply)
    n_boundary = sum(1 for r in records if r["boundary"])
    click.echo(f"{n_boundary}/{len(records)} boundary points -> {output_path}")


def _parse_list(text: str, angles: bool = False) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(parse_angle(part) if angles else float(part))
    if not out:
        raise click.UsageError("empty sweep list")
    return out


@main.command()
@click.argument("kind", type=click.Choice(["corner", "line"]))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--alphas", default="pi/4,pi/2,3pi/4,pi", show_default=True,
              help="Corner apertures (angle literals).")
@click.option("--kappas", default=None,
              help="Von Mises concentrations; switches corners to the von Mises law.")
@click.option("--widths", default="0.1,0.2,0.4,0.6", show_default=True,
              help="Line widths as fractions of the neighborhood radius.")
@click.option("--directions", default="0,pi/6,2pi/6,3pi/6,4pi/6,5pi/6",
              show_default=True, help="Line axial directions.")
@click.option("--lambdas", default="0.2,0.4,0.6,0.8", show_default=True)
@click.option("--cross-law", type=click.Choice(["uniform", "triangular"]),
              default="uniform", show_default=True)
@click.option("--phi", type=ANGLE, default="pi/2", show_default=True)
@click.option("--n", "n_points", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_catching
def synth(kind, output_path, alphas, kappas, widths, directions, lambdas,
          cross_law, phi, n_points, seed):
    """Sweep synthetic corner/line neighborhoods into a descriptor CSV."""
    lams = _parse_list(lambdas)
    rows = []
    if kind == "corner":
        if kappas is None:
            firsts = [("alpha", a) for a in _parse_list(alphas, angles=True)]
        else:
            firsts = [("kappa", k) for k in _parse_list(kappas)]
        for fi, (first_name, first) in enumerate(firsts):
            for li, lam in enumerate(lams):
                cell_seed = seed + 1009 * (fi * len(lams) + li)
                if first_name == "alpha":
                    spec = CornerSpec(alpha=first, lam=lam, n_points=n_points)
                else:
                    spec = CornerSpec(alpha=2.0 * math.pi, lam=lam, n_points=n_points,
                                      angular_law="von_mises", kappa=first)
                neigh = descriptors.generate_corner(spec, cell_seed)
                params = LitSParams(lam, phi)
                fn = lits2d.lits(neigh, params)
                s = summarize(fn)
                if first_name == "alpha":
                    bound = corner_zero_bound(first, lam)
                    eps = ((s.zero_set_length - bound) / s.zero_set_length
                           if s.zero_set_length > 0 else math.nan)
                else:
                    bound, eps = math.nan, math.nan
                rows.append((first_name, first, lam, phi, n_points,
                             s.zero_set_length, bound, eps, s.total_variation,
                             s.max_value, s.unlit_proportion))
    else:
        firsts = [("width", w) for w in _parse_list(widths)]
        dirs = _parse_list(directions, angles=True)
        for fi, (first_name, first) in enumerate(firsts):
            for di, d in enumerate(dirs):
                for li, lam in enumerate(lams):
                    cell_seed = seed + 1009 * ((fi * len(dirs) + di) * len(lams) + li)
                    spec = LineSpec(width=first, direction=d, n_points=n_points,
                                    cross_law=cross_law)
                    neigh = descriptors.generate_line(spec, cell_seed)
                    fn = lits2d.lits(neigh, LitSParams(lam, phi))
                    s = summarize(fn)
                    rows.append((first_name, first, lam, phi, n_points,
                                 s.zero_set_length, math.nan, math.nan,
                                 s.total_variation, s.max_value, s.unlit_proportion))
    with open(output_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([rows[0][0], "lambda", "phi", "n", "zero_length", "bound",
                         "eps", "tv", "max", "unlit"])
        for row in rows:
            writer.writerow([_fmt(v) for v in row[1:]])
    click.echo(f"wrote {len(rows)} rows to {output_path}")


@main.command()
@click.option("--caps", "caps_path", required=True, type=click.Path(exists=True),
              help="JSON file with a top-level 'caps' list.")
@click.option("--r-p", "r_p", required=True, type=float)
@click.option("--phi", type=ANGLE, required=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@_catching
def invert(caps_path, r_p, phi, output_path):
    """Recover neighbor offsets from a spherical-cap list."""
    try:
        with open(caps_path) as fh:
            payload = json.load(fh)
        caps = [transform3d.SphericalCap.from_json(c) for c in payload["caps"]]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"{caps_path}: {exc}") from None
    offsets = transform3d.invert_cumulative(caps, r_p, phi)
    with open(output_path, "w") as fh:
        json.dump({"r_p": r_p, "phi": phi,
                   "offsets": [list(map(float, o)) for o in offsets]}, fh)
        fh.write("\n")
    click.echo(f"recovered {len(offsets)} offsets -> {output_path}")


@main.command(name="phi-star")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="2D XYZ file of neighbor positions.")
@click.option("--lambda", "lam", type=float, default=1.0 / 3.0, show_default=True)
@click.option("--center", default="0,0", show_default=True,
              help="Center point 'x,y'.")
@click.option("--output", "output_path", type=click.Path(), default=None)
@_catching
def phi_star_cmd(input_path, lam, center, output_path):
    """Surroundedness angle of a single neighborhood."""
    cloud = _read_cloud(input_path)
    if cloud.dim != 2:
        raise ParameterError("phi-star expects a 2D point file")
    try:
        cx, cy = (float(v) for v in center.split(","))
    except ValueError:
        raise click.UsageError("--center must be 'x,y'")
    neigh = lits2d.Neighborhood2D.from_points([cx, cy], cloud.positions)
    radii, thetas, r_p = lits2d.illuminating_neighbors(neigh, lam)
    res = surroundedness.phi_star(list(zip(radii, thetas)), r_p)
    report = {
        "n_input": len(cloud),
        "n_illuminating": int(radii.size),
        "r_p": r_p,
        "phi_star": res.phi_star,
        "witnesses": list(res.witnesses) if res.witnesses else None,
        "outside_directions": [iv.center for iv in res.outside_set],
    }
    text = json.dumps(report)
    if output_path:
        with open(output_path, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)


if __name__ == "__main__":
    main()
