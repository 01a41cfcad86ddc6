"""Synthetic desk-scale scenes and meshes with ground-truth friction.

These generators stand in for camera captures: a table plane plus one object
whose per-point friction and material labels are known, so estimation runs
can be scored against the truth. The grasp-study proxy is a wedge prism
whose only antipodal parallel faces are the two high-friction side pads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud
from .mesh import TriangleMesh
from .validation import ensure_rng, readonly

SHAPES = ("box", "cylinder", "two-band-cylinder", "checkerboard")
TABLE_COLOR = (0.45, 0.38, 0.30)
TABLE_COF = 0.5
TABLE_LABEL = -1
# Object points start above the plane-removal default threshold so filtering
# separates table from object exactly.
_BASE_Z = 0.016


@dataclass(frozen=True)
class SyntheticScene:
    """A scene cloud with aligned ground-truth friction and material labels."""

    cloud: PointCloud
    cof: np.ndarray
    labels: np.ndarray
    shape: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "cof", readonly(np.asarray(self.cof, dtype=float)))
        object.__setattr__(self, "labels", readonly(np.asarray(self.labels, dtype=int)))
        if not len(self.cloud) == len(self.cof) == len(self.labels):
            raise ValueError("ground-truth arrays must align with the cloud")

    def object_mask(self) -> np.ndarray:
        return self.labels >= 0


def _grid2d(extent_x, extent_y, spacing):
    xs = np.arange(-extent_x / 2, extent_x / 2 + spacing / 2, spacing)
    ys = np.arange(-extent_y / 2, extent_y / 2 + spacing / 2, spacing)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _table_points(extent=0.5, spacing=0.008):
    xy = _grid2d(extent, extent, spacing)
    return np.column_stack([xy, np.zeros(len(xy))])


def _box_surface(size, spacing):
    """Grid points on the five visible faces of a box resting at z in [_BASE_Z, sz]."""
    sx, sy, sz = size
    pts = []
    top = _grid2d(sx, sy, spacing)
    pts.append(np.column_stack([top, np.full(len(top), sz)]))
    zs = np.arange(_BASE_Z, sz + spacing / 2, spacing)
    xs = np.arange(-sx / 2, sx / 2 + spacing / 2, spacing)
    ys = np.arange(-sy / 2, sy / 2 + spacing / 2, spacing)
    for sign in (-1.0, 1.0):
        gy, gz = np.meshgrid(ys, zs, indexing="ij")
        pts.append(
            np.column_stack([np.full(gy.size, sign * sx / 2), gy.ravel(), gz.ravel()])
        )
        gx, gz = np.meshgrid(xs, zs, indexing="ij")
        pts.append(
            np.column_stack([gx.ravel(), np.full(gx.size, sign * sy / 2), gz.ravel()])
        )
    return np.vstack(pts)


def _cylinder_surface(radius, height, spacing):
    """Lateral surface plus top cap of an upright cylinder."""
    n_theta = max(int(round(2 * np.pi * radius / spacing)), 8)
    thetas = np.arange(n_theta) * 2 * np.pi / n_theta
    zs = np.arange(_BASE_Z, height + spacing / 2, spacing)
    gt, gz = np.meshgrid(thetas, zs, indexing="ij")
    lateral = np.column_stack(
        [radius * np.cos(gt.ravel()), radius * np.sin(gt.ravel()), gz.ravel()]
    )
    cap = []
    for r in np.arange(0, radius, spacing):
        m = max(int(round(2 * np.pi * r / spacing)), 1)
        angs = np.arange(m) * 2 * np.pi / m
        cap.append(np.column_stack([r * np.cos(angs), r * np.sin(angs), np.full(m, height)]))
    return np.vstack([lateral] + cap)


def generate_scene(
    shape: str,
    materials,
    noise: float = 0.01,
    seed=0,
    spacing: float = 0.004,
    table: bool = True,
) -> SyntheticScene:
    """Build a table-plus-object scene with per-point friction ground truth.

    `materials` is a sequence of (rgb_color, cof) pairs. The box splits its
    materials into slabs along x, the plain cylinder into height bands, the
    two-band cylinder puts the second material in a middle band (the rubber
    band of a mug), and the checkerboard alternates the first two materials
    on a flat board. Colors get channel-wise Gaussian noise of the given
    standard deviation.
    """
    materials = [(np.asarray(c, dtype=float).reshape(3), float(m)) for c, m in materials]
    if not materials:
        raise ValueError("at least one material is required")
    rng = ensure_rng(seed)

    if shape == "box":
        size = (0.18, 0.12, 0.08)
        pts = _box_surface(size, spacing)
        edges = np.linspace(-size[0] / 2, size[0] / 2, len(materials) + 1)
        mat_idx = np.clip(np.searchsorted(edges, pts[:, 0], side="right") - 1, 0, len(materials) - 1)
    elif shape == "cylinder":
        radius, height = 0.035, 0.14
        pts = _cylinder_surface(radius, height, spacing)
        edges = np.linspace(0.0, height, len(materials) + 1)
        mat_idx = np.clip(np.searchsorted(edges, pts[:, 2], side="right") - 1, 0, len(materials) - 1)
    elif shape == "two-band-cylinder":
        if len(materials) < 2:
            raise ValueError("two-band-cylinder needs two materials")
        radius, height = 0.035, 0.14
        pts = _cylinder_surface(radius, height, spacing)
        band = (pts[:, 2] >= 0.42 * height) & (pts[:, 2] <= 0.68 * height)
        mat_idx = np.where(band, 1, 0)
    elif shape == "checkerboard":
        if len(materials) < 2:
            raise ValueError("checkerboard needs two materials")
        extent, cells, z0 = 0.24, 4, 0.02
        xy = _grid2d(extent, extent, spacing)
        pts = np.column_stack([xy, np.full(len(xy), z0)])
        cell = extent / cells
        ix = np.floor((xy[:, 0] + extent / 2) / cell).astype(int)
        iy = np.floor((xy[:, 1] + extent / 2) / cell).astype(int)
        mat_idx = (ix + iy) % 2
    else:
        raise ValueError(f"unknown shape {shape!r} (choose from {', '.join(SHAPES)})")

    obj_colors = np.array([materials[i][0] for i in mat_idx])
    obj_cof = np.array([materials[i][1] for i in mat_idx])

    if table:
        table_pts = _table_points()
        positions = np.vstack([table_pts, pts])
        colors = np.vstack([np.tile(TABLE_COLOR, (len(table_pts), 1)), obj_colors])
        cof = np.concatenate([np.full(len(table_pts), TABLE_COF), obj_cof])
        labels = np.concatenate([np.full(len(table_pts), TABLE_LABEL), mat_idx])
    else:
        positions, colors, cof, labels = pts, obj_colors, obj_cof, mat_idx

    if noise > 0:
        colors = np.clip(colors + rng.standard_normal(colors.shape) * noise, 0.0, 1.0)
    return SyntheticScene(
        cloud=PointCloud(positions, colors),
        cof=cof,
        labels=labels,
        shape=shape,
        parameters={"noise": noise, "spacing": spacing, "materials": len(materials)},
    )


def default_trace_chord(cloud: PointCloud) -> tuple[np.ndarray, np.ndarray]:
    """A straight chord across the largest visible face of an object cloud.

    The chord runs along the cloud's principal axis, at the median of the
    second axis, offset toward the far side of the least axis (the exposed
    face), spanning the 5th to 95th percentile of the principal extent.
    """
    if len(cloud) < 2:
        raise ValueError("need at least two points to place a trace")
    pos = cloud.positions
    mean = pos.mean(axis=0)
    cov = np.cov((pos - mean).T)
    vals, vecs = np.linalg.eigh(cov)
    e1, e2, e3 = vecs[:, 2], vecs[:, 1], vecs[:, 0]  # descending variance
    p1 = (pos - mean) @ e1
    p2 = (pos - mean) @ e2
    p3 = (pos - mean) @ e3
    lo, hi = np.percentile(p1, 5.0), np.percentile(p1, 95.0)
    side = np.percentile(p3, 92.0)
    if abs(np.percentile(p3, 8.0)) > abs(side):
        side = np.percentile(p3, 8.0)
    base = mean + np.median(p2) * e2 + side * e3
    return base + lo * e1, base + hi * e1


def box_mesh(size=(0.18, 0.12, 0.08), base_center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Closed axis-aligned box resting its base at the given center."""
    sx, sy, sz = size
    cx, cy, cz = base_center
    corners = np.array(
        [
            (cx - sx / 2, cy - sy / 2, cz), (cx + sx / 2, cy - sy / 2, cz),
            (cx + sx / 2, cy + sy / 2, cz), (cx - sx / 2, cy + sy / 2, cz),
            (cx - sx / 2, cy - sy / 2, cz + sz), (cx + sx / 2, cy - sy / 2, cz + sz),
            (cx + sx / 2, cy + sy / 2, cz + sz), (cx - sx / 2, cy + sy / 2, cz + sz),
        ]
    )
    quads = [
        (0, 3, 2, 1),  # bottom (normal -z)
        (4, 5, 6, 7),  # top
        (0, 1, 5, 4),  # front (-y)
        (2, 3, 7, 6),  # back (+y)
        (1, 2, 6, 5),  # right (+x)
        (3, 0, 4, 7),  # left (-x)
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append((a, b, c))
        faces.append((a, c, d))
    return TriangleMesh(corners, np.asarray(faces, dtype=int))


def cylinder_mesh(radius=0.035, height=0.14, n_segments=24, base_center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Closed upright cylinder with triangle-fan caps."""
    cx, cy, cz = base_center
    thetas = np.arange(n_segments) * 2 * np.pi / n_segments
    ring = np.column_stack([radius * np.cos(thetas), radius * np.sin(thetas)])
    bottom = np.column_stack([ring + (cx, cy), np.full(n_segments, cz)])
    top = np.column_stack([ring + (cx, cy), np.full(n_segments, cz + height)])
    vertices = np.vstack([bottom, top, [(cx, cy, cz)], [(cx, cy, cz + height)]])
    center_b, center_t = 2 * n_segments, 2 * n_segments + 1
    faces = []
    for i in range(n_segments):
        j = (i + 1) % n_segments
        faces.append((i, j, n_segments + i))
        faces.append((j, n_segments + j, n_segments + i))
        faces.append((center_b, j, i))
        faces.append((center_t, n_segments + i, n_segments + j))
    return TriangleMesh(vertices, np.asarray(faces, dtype=int))


def uv_sphere_mesh(radius=1.0, n_lat=12, n_lon=18, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Latitude-longitude sphere triangulation."""
    center = np.asarray(center, dtype=float)
    vertices = [center + (0, 0, radius)]
    for i in range(1, n_lat):
        phi = np.pi * i / n_lat
        for j in range(n_lon):
            theta = 2 * np.pi * j / n_lon
            vertices.append(
                center
                + radius
                * np.array(
                    [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)]
                )
            )
    vertices.append(center + (0, 0, -radius))
    south = len(vertices) - 1
    faces = []
    for j in range(n_lon):
        faces.append((0, 1 + j, 1 + (j + 1) % n_lon))
    for i in range(n_lat - 2):
        row0 = 1 + i * n_lon
        row1 = row0 + n_lon
        for j in range(n_lon):
            j1 = (j + 1) % n_lon
            faces.append((row0 + j, row1 + j, row1 + j1))
            faces.append((row0 + j, row1 + j1, row0 + j1))
    row = 1 + (n_lat - 2) * n_lon
    for j in range(n_lon):
        faces.append((south, row + (j + 1) % n_lon, row + j))
    return TriangleMesh(np.asarray(vertices), np.asarray(faces, dtype=int))


def mug_proxy_mesh(
    width: float = 0.06,
    depth_bottom: float = 0.16,
    depth_top: float = 0.02,
    height: float = 0.10,
    y_shift: float = 0.01,
    top_drop: float = 0.0115,
    pad_cof: float = 0.8,
    base_cof: float = 0.2,
) -> tuple[TriangleMesh, np.ndarray]:
    """Grasp-study stand-in for a multi-material mug: a wedge prism.

    The two planar x-faces ("pads") are the high-friction band and are the
    only parallel opposite faces; front, back, top, and bottom are mutually
    tilted well past the low-friction cone angle, so narrow-cone antipodal
    pairs only close across the pads. Returns (mesh with per-face friction,
    boolean per-face mask of the high-friction pads).
    """
    hw = width / 2
    yb = depth_bottom / 2
    y0, y1 = y_shift - depth_top / 2, y_shift + depth_top / 2
    z0, z1 = height, height - top_drop  # top tilts down toward +y
    vertices = np.array(
        [
            (-hw, -yb, 0.0), (hw, -yb, 0.0), (hw, yb, 0.0), (-hw, yb, 0.0),
            (-hw, y0, z0), (hw, y0, z0), (hw, y1, z1), (-hw, y1, z1),
        ]
    )
    quads = [
        ((0, 3, 2, 1), False),  # bottom
        ((4, 5, 6, 7), False),  # top (tilted)
        ((0, 1, 5, 4), False),  # back (-y)
        ((2, 3, 7, 6), False),  # front (+y)
        ((1, 2, 6, 5), True),   # +x pad
        ((3, 0, 4, 7), True),   # -x pad
    ]
    faces, pad_mask = [], []
    for (a, b, c, d), is_pad in quads:
        faces.append((a, b, c))
        faces.append((a, c, d))
        pad_mask += [is_pad, is_pad]
    pad_mask = np.asarray(pad_mask, dtype=bool)
    friction = np.where(pad_mask, pad_cof, base_cof)
    mesh = TriangleMesh(np.asarray(vertices), np.asarray(faces, dtype=int), friction)
    return mesh, pad_mask
