"""Colored point clouds: ASCII PLY I/O, plane removal, and depth cropping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .plyio import PlyParseError, read_ascii_ply
from .validation import as_colors, as_positions, ensure_rng, readonly, require_positive

_REQUIRED_PROPS = ("x", "y", "z", "red", "green", "blue")


@dataclass(frozen=True)
class ColoredPoint:
    """A single point: position in meters, RGB color normalized to [0, 1]."""

    position: np.ndarray
    color: np.ndarray


class PointCloud:
    """An ordered colored point cloud in a named reference frame.

    Positions and colors are stored as read-only (n, 3) float arrays, so a
    cloud can be shared across threads after construction.
    """

    def __init__(self, positions, colors, frame_id: str = "scene"):
        positions = as_positions(positions)
        colors = as_colors(colors)
        if len(positions) != len(colors):
            raise ValueError("positions and colors must have the same length")
        self.positions = readonly(positions)
        self.colors = readonly(colors)
        self.frame_id = str(frame_id)

    def __len__(self) -> int:
        return len(self.positions)

    def __getitem__(self, index: int) -> ColoredPoint:
        return ColoredPoint(self.positions[index], self.colors[index])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def select(self, mask_or_indices) -> "PointCloud":
        """New cloud with the selected points, preserving order."""
        return PointCloud(
            self.positions[mask_or_indices], self.colors[mask_or_indices], self.frame_id
        )

    def __repr__(self) -> str:
        return f"PointCloud({len(self)} points, frame={self.frame_id!r})"


@dataclass(frozen=True)
class PlaneModel:
    """Plane {x : normal . x + offset = 0} with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float).reshape(3)
        norm = float(np.linalg.norm(normal))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"plane normal must be unit length (norm {norm:.3e})")
        object.__setattr__(self, "normal", readonly(normal))
        object.__setattr__(self, "offset", float(self.offset))

    def signed_distance(self, positions) -> np.ndarray:
        positions = np.asarray(positions, dtype=float)
        return positions @ self.normal + self.offset


def _fmt(value: float) -> str:
    return format(float(value), ".9g")


def load_cloud(path) -> PointCloud:
    """Load an ASCII PLY point cloud; 8-bit colors are rescaled to [0, 1]."""
    cloud, _, _ = load_friction_cloud(path)
    return cloud


def load_friction_cloud(path) -> tuple[PointCloud, np.ndarray | None, np.ndarray | None]:
    """Load an ASCII PLY cloud plus optional per-vertex friction/variance.

    Returns (cloud, friction, variance); the annotation arrays are None when
    the file has no `friction`/`variance` properties.
    """
    header, data = read_ascii_ply(path)
    vertex = header.element("vertex")
    if vertex is None:
        raise PlyParseError("line 1: no 'element vertex' declaration")
    names = [name for _, name in vertex.properties]
    for prop in _REQUIRED_PROPS:
        if prop not in names:
            raise PlyParseError(f"line 1: missing required vertex property {prop!r}")
    col = {name: i for i, name in enumerate(names)}
    has_annotations = "friction" in col and "variance" in col

    n = vertex.count
    if len(data) < n:
        raise PlyParseError(
            f"line {header.data_start + len(data)}: expected {n} vertex lines, found {len(data)}"
        )
    positions = np.empty((n, 3))
    colors = np.empty((n, 3))
    friction = np.empty(n) if has_annotations else None
    variance = np.empty(n) if has_annotations else None
    for i in range(n):
        lineno = header.data_start + i
        tokens = data[i]
        if len(tokens) < len(names):
            raise PlyParseError(f"line {lineno}: expected {len(names)} values, got {len(tokens)}")
        try:
            x = float(tokens[col["x"]])
            y = float(tokens[col["y"]])
            z = float(tokens[col["z"]])
            rgb = (
                float(tokens[col["red"]]),
                float(tokens[col["green"]]),
                float(tokens[col["blue"]]),
            )
        except ValueError:
            raise PlyParseError(f"line {lineno}: non-numeric vertex value") from None
        if not all(np.isfinite(v) for v in (x, y, z)):
            raise PlyParseError(f"line {lineno}: non-finite coordinate")
        positions[i] = (x, y, z)
        colors[i] = rgb
        if has_annotations:
            friction[i] = float(tokens[col["friction"]])
            variance[i] = float(tokens[col["variance"]])
    colors = np.clip(colors / 255.0, 0.0, 1.0)
    return PointCloud(positions, colors), friction, variance


def save_cloud(cloud: PointCloud, path, friction=None, variance=None) -> None:
    """Write an ASCII PLY; friction/variance, when given, are extra floats.

    Colors are written as 8-bit uchar; positions and annotations keep nine
    significant digits so a round trip stays within 1e-6.
    """
    if (friction is None) != (variance is None):
        raise ValueError("friction and variance must be given together")
    if friction is not None:
        friction = np.asarray(friction, dtype=float).reshape(-1)
        variance = np.asarray(variance, dtype=float).reshape(-1)
        if len(friction) != len(cloud) or len(variance) != len(cloud):
            raise ValueError(
                f"annotation length {len(friction)} does not match point count {len(cloud)}"
            )
    lines = ["ply", "format ascii 1.0", f"element vertex {len(cloud)}"]
    lines += [f"property float {axis}" for axis in "xyz"]
    lines += [f"property uchar {ch}" for ch in ("red", "green", "blue")]
    if friction is not None:
        lines += ["property float friction", "property float variance"]
    lines.append("end_header")
    rgb = np.clip(np.rint(cloud.colors * 255.0), 0, 255).astype(int)
    for i in range(len(cloud)):
        p = cloud.positions[i]
        parts = [_fmt(p[0]), _fmt(p[1]), _fmt(p[2]), str(rgb[i, 0]), str(rgb[i, 1]), str(rgb[i, 2])]
        if friction is not None:
            parts += [_fmt(friction[i]), _fmt(variance[i])]
        lines.append(" ".join(parts))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def plane_inlier_mask(cloud: PointCloud, plane: PlaneModel, inlier_threshold: float) -> np.ndarray:
    """Boolean mask of points within inlier_threshold of the plane."""
    require_positive(inlier_threshold, "inlier_threshold")
    return np.abs(plane.signed_distance(cloud.positions)) <= inlier_threshold


def fit_plane(cloud: PointCloud, inlier_threshold: float, seed=0, iterations: int = 200) -> PlaneModel:
    """Fit the dominant plane by seeded randomized consensus.

    Runs a fixed number of 3-point hypotheses, keeps the one with the most
    inliers, then refines it by a least-squares fit over those inliers.
    """
    require_positive(inlier_threshold, "inlier_threshold")
    pos = cloud.positions
    if len(pos) < 3:
        raise ValueError("plane fitting needs at least 3 points")
    rng = ensure_rng(seed)
    best_count = 0
    best_mask = None
    for _ in range(iterations):
        i, j, k = rng.choice(len(pos), size=3, replace=False)
        normal = np.cross(pos[j] - pos[i], pos[k] - pos[i])
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            continue  # collinear sample
        normal = normal / norm
        offset = -float(normal @ pos[i])
        mask = np.abs(pos @ normal + offset) <= inlier_threshold
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
    if best_mask is None or best_count < 3:
        raise ValueError("degenerate cloud: no plane hypothesis found (collinear points?)")
    inliers = pos[best_mask]
    centroid = inliers.mean(axis=0)
    _, _, vt = np.linalg.svd(inliers - centroid, full_matrices=False)
    normal = vt[-1] / np.linalg.norm(vt[-1])
    return PlaneModel(normal=normal, offset=-float(normal @ centroid))


def remove_plane(
    cloud: PointCloud,
    plane: PlaneModel | None = None,
    inlier_threshold: float = 0.01,
    seed=0,
) -> tuple[PointCloud, PlaneModel]:
    """Drop points on the supporting plane; fit it first when not supplied.

    Returns the surviving cloud (input order preserved) and the plane used.
    """
    if plane is None:
        plane = fit_plane(cloud, inlier_threshold, seed=seed)
    mask = plane_inlier_mask(cloud, plane, inlier_threshold)
    return cloud.select(~mask), plane


def crop_depth(cloud: PointCloud, max_distance: float, origin=(0.0, 0.0, 0.0)) -> PointCloud:
    """Keep points with ||position - origin|| <= max_distance (closed bound)."""
    require_positive(max_distance, "max_distance")
    origin = np.asarray(origin, dtype=float).reshape(3)
    keep = np.linalg.norm(cloud.positions - origin, axis=1) <= max_distance
    return cloud.select(keep)
