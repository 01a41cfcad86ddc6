"""Triangle meshes: OFF/PLY loading, geometry queries, and overlap tests."""

from __future__ import annotations

import numpy as np

from .plyio import PlyParseError, read_ascii_ply
from .validation import readonly

DEGENERATE_FACE_AREA = 1e-12


class TriangleMesh:
    """An outward-oriented triangle mesh with optional per-face friction."""

    def __init__(self, vertices, faces, face_friction=None):
        vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
        faces = np.asarray(faces, dtype=int).reshape(-1, 3)
        if not np.all(np.isfinite(vertices)):
            raise ValueError("mesh vertices must be finite")
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise ValueError("face indices must lie in [0, vertex count)")
        self.vertices = readonly(vertices)
        self.faces = readonly(faces)
        cross = np.cross(
            vertices[faces[:, 1]] - vertices[faces[:, 0]],
            vertices[faces[:, 2]] - vertices[faces[:, 0]],
        )
        double_area = np.linalg.norm(cross, axis=1)
        if np.any(double_area / 2.0 <= DEGENERATE_FACE_AREA):
            bad = int(np.argmax(double_area / 2.0 <= DEGENERATE_FACE_AREA))
            raise ValueError(f"face {bad} is degenerate (area <= {DEGENERATE_FACE_AREA} m^2)")
        self.face_areas = readonly(double_area / 2.0)
        self.face_normals = readonly(cross / double_area[:, None])
        self.face_centroids = readonly(vertices[faces].mean(axis=1))
        if face_friction is not None:
            face_friction = np.asarray(face_friction, dtype=float).reshape(-1)
            if len(face_friction) != len(faces):
                raise ValueError("face_friction length must match the face count")
            if np.any(face_friction < 0) or not np.all(np.isfinite(face_friction)):
                raise ValueError("face friction must be finite and >= 0")
            self.face_friction = readonly(face_friction)
        else:
            self.face_friction = None

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def with_face_friction(self, face_friction) -> "TriangleMesh":
        return TriangleMesh(self.vertices, self.faces, face_friction)

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def max_radius(self) -> float:
        return float(np.linalg.norm(self.vertices - self.centroid(), axis=1).max())


def load_mesh(path) -> TriangleMesh:
    """Load an ASCII OFF or ASCII PLY mesh, chosen by file content."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        first = fh.readline().strip()
    if first == "OFF":
        return load_mesh_off(path)
    if first == "ply":
        return load_mesh_ply(path)
    raise ValueError(f"unrecognized mesh format in {path} (expected OFF or ascii PLY)")


def load_mesh_off(path) -> TriangleMesh:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        tokens = []
        for line in fh:
            stripped = line.split("#", 1)[0].strip()
            if stripped:
                tokens.extend(stripped.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError("not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    cursor = 4  # skip edge count
    vertices = np.array(tokens[cursor : cursor + 3 * nv], dtype=float).reshape(nv, 3)
    cursor += 3 * nv
    faces = []
    for _ in range(nf):
        arity = int(tokens[cursor])
        if arity != 3:
            raise ValueError("only triangular OFF faces are supported")
        faces.append([int(t) for t in tokens[cursor + 1 : cursor + 4]])
        cursor += 1 + arity
    return TriangleMesh(vertices, np.asarray(faces, dtype=int))


def save_mesh_off(mesh: TriangleMesh, path) -> None:
    lines = ["OFF", f"{len(mesh.vertices)} {len(mesh.faces)} 0"]
    for v in mesh.vertices:
        lines.append(" ".join(format(c, ".9g") for c in v))
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh_ply(path) -> TriangleMesh:
    header, data = read_ascii_ply(path)
    vertex = header.element("vertex")
    face = header.element("face")
    if vertex is None or face is None:
        raise PlyParseError("line 1: mesh PLY needs both vertex and face elements")
    names = [name for _, name in vertex.properties]
    for prop in ("x", "y", "z"):
        if prop not in names:
            raise PlyParseError(f"line 1: missing vertex property {prop!r}")
    col = {name: i for i, name in enumerate(names)}
    if len(data) < vertex.count + face.count:
        raise PlyParseError("line 1: fewer data lines than declared elements")
    vertices = np.empty((vertex.count, 3))
    for i in range(vertex.count):
        tokens = data[i]
        vertices[i] = (
            float(tokens[col["x"]]),
            float(tokens[col["y"]]),
            float(tokens[col["z"]]),
        )
    faces = []
    for i in range(face.count):
        tokens = data[vertex.count + i]
        if int(tokens[0]) != 3:
            raise PlyParseError(f"line {header.data_start + vertex.count + i}: non-triangular face")
        faces.append([int(t) for t in tokens[1:4]])
    return TriangleMesh(vertices, np.asarray(faces, dtype=int))


def sample_face_point(mesh: TriangleMesh, face_index: int, rng) -> np.ndarray:
    """Uniform point on one face via the square-root barycentric trick."""
    a, b, c = mesh.vertices[mesh.faces[face_index]]
    u1, u2 = rng.random(), rng.random()
    s = np.sqrt(u1)
    return (1.0 - s) * a + s * (1.0 - u2) * b + s * u2 * c


def ray_mesh_intersection(
    mesh: TriangleMesh, origin, direction, t_min: float = 1e-6
) -> tuple[int, float, np.ndarray] | None:
    """First (face index, distance, point) hit by a ray, or None.

    Distance ties resolve to the lowest face index. Hits closer than t_min
    are ignored so a ray can leave its own source face.
    """
    origin = np.asarray(origin, dtype=float).reshape(3)
    direction = np.asarray(direction, dtype=float).reshape(3)
    v0 = mesh.vertices[mesh.faces[:, 0]]
    e1 = mesh.vertices[mesh.faces[:, 1]] - v0
    e2 = mesh.vertices[mesh.faces[:, 2]] - v0
    pvec = np.cross(direction, e2)
    det = (e1 * pvec).sum(axis=1)
    parallel = np.abs(det) < 1e-14
    det_safe = np.where(parallel, 1.0, det)
    tvec = origin - v0
    u = (tvec * pvec).sum(axis=1) / det_safe
    qvec = np.cross(tvec, e1)
    v = (direction * qvec).sum(axis=1) / det_safe
    t = (e2 * qvec).sum(axis=1) / det_safe
    eps = 1e-12
    hit = (~parallel) & (u >= -eps) & (v >= -eps) & (u + v <= 1.0 + eps) & (t > t_min)
    if not hit.any():
        return None
    candidates = np.nonzero(hit)[0]
    best = candidates[np.argmin(t[candidates])]
    return int(best), float(t[best]), origin + t[best] * direction


def point_triangle_distances(point, mesh: TriangleMesh) -> np.ndarray:
    """Euclidean distance from one point to every mesh face."""
    p = np.asarray(point, dtype=float).reshape(3)
    a = mesh.vertices[mesh.faces[:, 0]]
    b = mesh.vertices[mesh.faces[:, 1]]
    c = mesh.vertices[mesh.faces[:, 2]]
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = (ab * ap).sum(axis=1)
    d2 = (ac * ap).sum(axis=1)
    bp = p - b
    d3 = (ab * bp).sum(axis=1)
    d4 = (ac * bp).sum(axis=1)
    cp = p - c
    d5 = (ab * cp).sum(axis=1)
    d6 = (ac * cp).sum(axis=1)

    closest = np.empty_like(a)
    done = np.zeros(len(a), dtype=bool)

    region = (d1 <= 0) & (d2 <= 0)
    closest[region] = a[region]
    done |= region
    region = (~done) & (d3 >= 0) & (d4 <= d3)
    closest[region] = b[region]
    done |= region
    vc = d1 * d4 - d3 * d2
    region = (~done) & (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    t = np.divide(d1, d1 - d3, out=np.zeros_like(d1), where=(d1 - d3) != 0)
    closest[region] = a[region] + t[region, None] * ab[region]
    done |= region
    region = (~done) & (d6 >= 0) & (d5 <= d6)
    closest[region] = c[region]
    done |= region
    vb = d5 * d2 - d1 * d6
    region = (~done) & (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    t = np.divide(d2, d2 - d6, out=np.zeros_like(d2), where=(d2 - d6) != 0)
    closest[region] = a[region] + t[region, None] * ac[region]
    done |= region
    va = d3 * d6 - d5 * d4
    region = (~done) & (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    denom = (d4 - d3) + (d5 - d6)
    t = np.divide(d4 - d3, denom, out=np.zeros_like(denom), where=denom != 0)
    closest[region] = b[region] + t[region, None] * (c[region] - b[region])
    done |= region
    interior = ~done
    denom = va + vb + vc
    v = np.divide(vb, denom, out=np.zeros_like(denom), where=denom != 0)
    w = np.divide(vc, denom, out=np.zeros_like(denom), where=denom != 0)
    closest[interior] = (
        a[interior] + v[interior, None] * ab[interior] + w[interior, None] * ac[interior]
    )
    return np.linalg.norm(closest - p, axis=1)


def box_triangle_overlaps(center, half_extents, axes, mesh: TriangleMesh) -> np.ndarray:
    """Separating-axis overlap of one oriented box against every face.

    `axes` holds the box's orthonormal axes as columns. Returns a boolean
    mask over faces; touching counts as overlapping.
    """
    center = np.asarray(center, dtype=float).reshape(3)
    h = np.asarray(half_extents, dtype=float).reshape(3)
    axes = np.asarray(axes, dtype=float).reshape(3, 3)
    # triangle vertices in the box frame
    tri = mesh.vertices[mesh.faces]  # (F, 3, 3)
    local = (tri - center) @ axes  # world -> box coordinates

    overlap = np.ones(len(tri), dtype=bool)
    # box face axes
    for k in range(3):
        lo = local[:, :, k].min(axis=1)
        hi = local[:, :, k].max(axis=1)
        overlap &= (lo <= h[k]) & (hi >= -h[k])
    # triangle plane
    e0 = local[:, 1] - local[:, 0]
    e1 = local[:, 2] - local[:, 1]
    e2 = local[:, 0] - local[:, 2]
    normal = np.cross(e0, local[:, 2] - local[:, 0])
    dist = (normal * local[:, 0]).sum(axis=1)
    radius = (np.abs(normal) * h).sum(axis=1)
    overlap &= np.abs(dist) <= radius
    # nine edge cross products
    unit = np.eye(3)
    for edge in (e0, e1, e2):
        for k in range(3):
            axis = np.cross(unit[k], edge)
            proj = (local * axis[:, None, :]).sum(axis=2)  # (F, 3)
            lo = proj.min(axis=1)
            hi = proj.max(axis=1)
            radius = (np.abs(axis) * h).sum(axis=1)
            overlap &= (lo <= radius) & (hi >= -radius)
    return overlap
