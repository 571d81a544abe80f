"""Point-cloud ingestion, neighborhood queries, and colored export.

Formats:

* XYZ: whitespace-separated floats, 2 or 3 per line, '#' starts a
  comment. Mixed dimensionality is rejected.
* PLY: ascii and binary_little_endian, reading x/y/z (float or double)
  from the vertex element and skipping unknown vertex properties.
  Coordinates are written as doubles with round-trip formatting, so a
  write/read cycle is bit-exact.

Neighborhood queries run on a kd-tree but honor an exact contract: the
result equals a linear scan, ordered by (distance, index), with
k-nearest ties at the cutoff distance resolved toward lower indices.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._colormaps import TABLES
from .errors import EmptyNeighborhoodError, ParameterError, ParseError


@dataclass
class PointCloud:
    """Positions (n, 2|3) plus optional named per-point scalar attributes."""

    positions: np.ndarray
    attributes: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] not in (2, 3):
            raise ParameterError("positions must be an (n, 2) or (n, 3) array")
        if not np.all(np.isfinite(self.positions)):
            raise ParameterError("positions must be finite")
        for name, vals in self.attributes.items():
            vals = np.asarray(vals, dtype=float)
            if vals.shape != (len(self),):
                raise ParameterError(f"attribute {name!r} length mismatch")
            self.attributes[name] = vals

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


def read_xyz(path) -> PointCloud:
    rows = []
    width = None
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"{path}: line {lineno}: expected 2 or 3 columns, "
                                 f"got {len(parts)}")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(f"{path}: line {lineno}: mixed dimensionality")
            rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no points")
    return PointCloud(np.asarray(rows, dtype=float))


def write_xyz(cloud: PointCloud, path) -> None:
    with open(path, "w") as fh:
        for row in cloud.positions:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def _parse_ply_header(fh, path):
    def next_line():
        raw = fh.readline()
        if not raw:
            raise ParseError(f"{path}: unexpected end of header")
        return raw.decode("ascii", errors="replace").strip()

    if next_line() != "ply":
        raise ParseError(f"{path}: not a PLY file")
    fmt = None
    elements = []  # (name, count, [(prop_name, dtype_code)])
    while True:
        line = next_line()
        if line.startswith("comment") or line.startswith("obj_info") or not line:
            continue
        if line.startswith("format"):
            parts = line.split()
            if len(parts) != 3 or parts[1] not in ("ascii", "binary_little_endian"):
                raise ParseError(f"{path}: unsupported format line {line!r}")
            fmt = parts[1]
        elif line.startswith("element"):
            _, name, count = line.split()
            elements.append((name, int(count), []))
        elif line.startswith("property"):
            parts = line.split()
            if not elements:
                raise ParseError(f"{path}: property before any element")
            if parts[1] == "list":
                elements[-1][2].append((parts[-1], ("list", parts[2], parts[3])))
            else:
                if parts[1] not in _PLY_TYPES:
                    raise ParseError(f"{path}: unknown property type {parts[1]!r}")
                elements[-1][2].append((parts[-1], _PLY_TYPES[parts[1]]))
        elif line == "end_header":
            break
        else:
            raise ParseError(f"{path}: unexpected header line {line!r}")
    if fmt is None:
        raise ParseError(f"{path}: missing format line")
    return fmt, elements


def read_ply(path) -> PointCloud:
    with open(path, "rb") as fh:
        fmt, elements = _parse_ply_header(fh, path)
        for pos, (name, count, props) in enumerate(elements):
            if name == "vertex":
                break
        else:
            raise ParseError(f"{path}: no vertex element")
        if pos != 0:
            raise ParseError(f"{path}: vertex must be the first element")
        names = [p for p, _ in props]
        for needed in ("x", "y", "z"):
            if needed not in names:
                raise ParseError(f"{path}: vertex element lacks {needed!r}")
        if any(isinstance(code, tuple) for _, code in props):
            raise ParseError(f"{path}: list properties on vertices unsupported")
        if fmt == "ascii":
            rows = []
            for k in range(count):
                line = fh.readline().decode("ascii", errors="replace").strip()
                if not line:
                    raise ParseError(f"{path}: vertex {k}: missing data row")
                parts = line.split()
                if len(parts) != len(props):
                    raise ParseError(f"{path}: vertex {k}: expected "
                                     f"{len(props)} values, got {len(parts)}")
                try:
                    rows.append([float(v) for v in parts])
                except ValueError as exc:
                    raise ParseError(f"{path}: vertex {k}: {exc}") from None
            data = np.asarray(rows, dtype=float)
            cols = {name: data[:, i] for i, (name, _) in enumerate(props)}
        else:
            dtype = np.dtype([(name, "<" + code) for name, code in props])
            buf = fh.read(dtype.itemsize * count)
            if len(buf) != dtype.itemsize * count:
                raise ParseError(f"{path}: truncated vertex data")
            rec = np.frombuffer(buf, dtype=dtype)
            cols = {name: rec[name].astype(float) for name, _ in props}
        return PointCloud(np.column_stack([cols["x"], cols["y"], cols["z"]]))


def write_ply(cloud: PointCloud, path, binary: bool = False) -> None:
    """Write coordinates as doubles; 2D clouds gain z = 0."""
    pos = cloud.positions
    if pos.shape[1] == 2:
        pos = np.column_stack([pos, np.zeros(len(cloud))])
    header = ["ply",
              "format binary_little_endian 1.0" if binary else "format ascii 1.0",
              f"element vertex {len(cloud)}",
              "property double x", "property double y", "property double z",
              "end_header"]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(np.ascontiguousarray(pos, dtype="<f8").tobytes())
        else:
            for row in pos:
                fh.write((" ".join(repr(float(v)) for v in row) + "\n").encode("ascii"))


def write_ply_colored(cloud: PointCloud, scalar_name: str, colormap: str,
                      path, binary: bool = False) -> None:
    """Color by a scalar attribute through a 256-entry lookup table.

    The scalar minimum maps to the first table entry and the maximum to
    the last; a constant scalar maps to the table midpoint.
    """
    if scalar_name not in cloud.attributes:
        raise ParameterError(f"missing attribute {scalar_name!r}")
    if colormap not in TABLES:
        raise ParameterError(f"unknown colormap {colormap!r}; "
                             f"choose from {sorted(TABLES)}")
    table = TABLES[colormap]
    vals = cloud.attributes[scalar_name]
    finite = np.isfinite(vals)
    vmin = vals[finite].min() if finite.any() else 0.0
    vmax = vals[finite].max() if finite.any() else 0.0
    span = vmax - vmin
    if span > 0:
        t = np.clip((np.where(finite, vals, vmin) - vmin) / span, 0.0, 1.0)
    else:
        t = np.full(len(cloud), 0.5)
    idx = np.rint(t * 255.0).astype(int)
    rgb = table[idx]
    pos = cloud.positions
    if pos.shape[1] == 2:
        pos = np.column_stack([pos, np.zeros(len(cloud))])
    header = ["ply",
              "format binary_little_endian 1.0" if binary else "format ascii 1.0",
              f"element vertex {len(cloud)}",
              "property double x", "property double y", "property double z",
              "property uchar red", "property uchar green", "property uchar blue",
              "end_header"]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            rec = np.zeros(len(cloud), dtype=[("x", "<f8"), ("y", "<f8"), ("z", "<f8"),
                                              ("r", "u1"), ("g", "u1"), ("b", "u1")])
            rec["x"], rec["y"], rec["z"] = pos[:, 0], pos[:, 1], pos[:, 2]
            rec["r"], rec["g"], rec["b"] = rgb[:, 0], rgb[:, 1], rgb[:, 2]
            fh.write(rec.tobytes())
        else:
            for row, color in zip(pos, rgb):
                text = " ".join(repr(float(v)) for v in row)
                fh.write((f"{text} {color[0]} {color[1]} {color[2]}\n").encode("ascii"))


@dataclass(frozen=True)
class NeighborSet:
    """Result of a neighborhood query: offsets relative to the query point."""

    indices: np.ndarray
    offsets: np.ndarray
    distances: np.ndarray

    @property
    def r_q_max(self) -> float:
        return float(self.distances[-1]) if self.distances.size else 0.0

    def __len__(self) -> int:
        return int(self.indices.size)


class SpatialIndex:
    """kd-tree over a cloud with an exact, deterministic query contract."""

    def __init__(self, cloud: PointCloud):
        self.cloud = cloud
        self._tree = cKDTree(cloud.positions)

    def _finish(self, p, idx) -> NeighborSet:
        idx = np.asarray(sorted(idx), dtype=int)
        offs = self.cloud.positions[idx] - p
        dists = np.linalg.norm(offs, axis=1)
        order = np.lexsort((idx, dists))
        return NeighborSet(idx[order], offs[order], dists[order])


def build_index(cloud: PointCloud) -> SpatialIndex:
    return SpatialIndex(cloud)


def query_radius(index: SpatialIndex, p, r: float) -> NeighborSet:
    """All points with 0 < |x - p| <= r, ordered by (distance, index)."""
    if r <= 0:
        raise ParameterError("radius must be positive")
    p = np.asarray(p, dtype=float).reshape(index.cloud.dim)
    # cKDTree ball queries are open at machine precision quirks; pad and
    # filter against the exact closed predicate.
    cand = index._tree.query_ball_point(p, r * (1.0 + 1e-12) + 1e-300)
    pos = index.cloud.positions
    keep = []
    for i in cand:
        d = float(np.linalg.norm(pos[i] - p))
        if 0.0 < d <= r:
            keep.append(i)
    return index._finish(p, keep)


def query_knn(index: SpatialIndex, p, k: int) -> NeighborSet:
    """The k nearest points at positive distance, lower index on ties."""
    n = len(index.cloud)
    if k < 1:
        raise ParameterError("k must be positive")
    if k > n - 1:
        raise ParameterError(f"k={k} exceeds cloud size minus one ({n - 1})")
    p = np.asarray(p, dtype=float).reshape(index.cloud.dim)
    pos = index.cloud.positions
    m = k + 1
    while True:
        dists, idx = index._tree.query(p, k=min(m, n))
        dists = np.atleast_1d(dists)
        idx = np.atleast_1d(idx)
        positive = dists > 0.0
        if positive.sum() >= k or m >= n:
            break
        m = min(n, 2 * m)
    pd = dists[positive]
    if pd.size < k:
        raise EmptyNeighborhoodError("cloud has fewer than k distinct points")
    cutoff = float(np.sort(pd)[k - 1])
    cand = index._tree.query_ball_point(p, cutoff * (1.0 + 1e-12) + 1e-300)
    scored = []
    for i in cand:
        d = float(np.linalg.norm(pos[i] - p))
        if 0.0 < d <= cutoff:
            scored.append((d, i))
    scored.sort()
    chosen = [i for _, i in scored[:k]]
    return index._finish(p, chosen)


def query_radius_scan(cloud: PointCloud, p, r: float) -> NeighborSet:
    """Linear-scan reference for :func:`query_radius`."""
    p = np.asarray(p, dtype=float).reshape(cloud.dim)
    d = np.linalg.norm(cloud.positions - p, axis=1)
    keep = np.nonzero((d > 0.0) & (d <= r))[0]
    order = np.lexsort((keep, d[keep]))
    keep = keep[order]
    return NeighborSet(keep, cloud.positions[keep] - p, d[keep])


def query_knn_scan(cloud: PointCloud, p, k: int) -> NeighborSet:
    """Linear-scan reference for :func:`query_knn`."""
    p = np.asarray(p, dtype=float).reshape(cloud.dim)
    d = np.linalg.norm(cloud.positions - p, axis=1)
    pos_idx = np.nonzero(d > 0.0)[0]
    order = np.lexsort((pos_idx, d[pos_idx]))
    keep = pos_idx[order][:k]
    return NeighborSet(keep, cloud.positions[keep] - p, d[keep])
