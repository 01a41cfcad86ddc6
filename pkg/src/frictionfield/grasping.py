"""Friction-aware antipodal grasp sampling and wrench-space quality scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .haptics import nearest_point_indices
from .hull import hull_interior_distance
from .mesh import (
    TriangleMesh,
    box_triangle_overlaps,
    point_triangle_distances,
    ray_mesh_intersection,
    sample_face_point,
)
from .validation import ensure_rng, readonly

CONTACT_CLEARANCE = 1e-6
_CONE_EPS = 1e-12


class SamplingInfeasibleError(RuntimeError):
    """The attempt budget ran out with no accepted antipodal pair."""


class NoValidGraspError(RuntimeError):
    """Every candidate collided with the mesh."""


def _orthonormal_tangents(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic right-handed tangent pair for a unit axis."""
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(axis)))] = 1.0
    t1 = np.cross(axis, helper)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(axis, t1)
    return t1, t2


@dataclass(frozen=True)
class FrictionCone:
    """Coulomb cone: directions within arctan(cof) of the inward normal."""

    contact_point: np.ndarray
    inward_normal: np.ndarray
    cof: float
    edge_count: int = 8

    def __post_init__(self):
        point = np.asarray(self.contact_point, dtype=float).reshape(3)
        normal = np.asarray(self.inward_normal, dtype=float).reshape(3)
        norm = np.linalg.norm(normal)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("inward_normal must be unit length")
        if self.cof < 0.0:
            raise ValueError("cof must be >= 0")
        if self.edge_count < 3:
            raise ValueError("edge_count must be >= 3")
        object.__setattr__(self, "contact_point", readonly(point))
        object.__setattr__(self, "inward_normal", readonly(normal))

    @property
    def half_angle(self) -> float:
        return math.atan(self.cof)

    def contains(self, direction) -> bool:
        """Whether a direction lies inside the cone (unit input not required)."""
        direction = np.asarray(direction, dtype=float).reshape(3)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            return False
        cos_angle = float(direction @ self.inward_normal) / norm
        return cos_angle >= 1.0 / math.sqrt(1.0 + self.cof**2) - _CONE_EPS

    def edges(self) -> np.ndarray:
        """Unit edge directions; a frictionless cone degenerates to the normal."""
        if self.cof == 0.0:
            return self.inward_normal.reshape(1, 3)
        t1, t2 = _orthonormal_tangents(self.inward_normal)
        angles = 2.0 * math.pi * np.arange(self.edge_count) / self.edge_count
        lateral = np.outer(np.cos(angles), t1) + np.outer(np.sin(angles), t2)
        return math.cos(self.half_angle) * self.inward_normal + math.sin(self.half_angle) * lateral


@dataclass(frozen=True)
class Contact:
    point: np.ndarray
    face_index: int

    def __post_init__(self):
        object.__setattr__(self, "point", readonly(np.asarray(self.point, dtype=float).reshape(3)))


@dataclass(frozen=True)
class GraspCandidate:
    """Two mutually antipodal contacts plus the gripper approach direction."""

    contact_a: Contact
    contact_b: Contact
    closing_vector: np.ndarray
    approach_vector: np.ndarray

    def __post_init__(self):
        closing = np.asarray(self.closing_vector, dtype=float).reshape(3)
        approach = np.asarray(self.approach_vector, dtype=float).reshape(3)
        span = self.contact_b.point - self.contact_a.point
        expected = span / np.linalg.norm(span)
        if np.linalg.norm(closing - expected) > 1e-9:
            raise ValueError("closing_vector must be the unit vector from contact_a to contact_b")
        object.__setattr__(self, "closing_vector", readonly(closing))
        object.__setattr__(self, "approach_vector", readonly(approach))

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.contact_b.point - self.contact_a.point))


@dataclass(frozen=True)
class GraspScore:
    quality: float
    force_closure: bool


@dataclass(frozen=True)
class GripperGeometry:
    """Three-box parallel-jaw proxy used for collision checking."""

    finger_length: float = 0.05
    finger_width: float = 0.02
    max_opening: float = 0.08
    palm_depth: float = 0.02

    def __post_init__(self):
        for name in ("finger_length", "finger_width", "max_opening", "palm_depth"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


def assign_face_friction(mesh: TriangleMesh, cloud: PointCloud, field) -> TriangleMesh:
    """Give each face the friction of the cloud point nearest its centroid."""
    values = np.asarray(getattr(field, "point_friction", field), dtype=float).reshape(-1)
    if len(values) != len(cloud):
        raise ValueError("per-point friction length must match the cloud")
    nearest = nearest_point_indices(mesh.face_centroids, cloud)
    return mesh.with_face_friction(values[nearest])


def _sample_cone_direction(axis: np.ndarray, cof: float, rng) -> np.ndarray:
    """Solid-angle-uniform direction within the cone around a unit axis."""
    cos_half = 1.0 / math.sqrt(1.0 + cof**2)
    cos_theta = 1.0 - rng.random() * (1.0 - cos_half)
    phi = rng.random() * 2.0 * math.pi
    sin_theta = math.sqrt(max(1.0 - cos_theta**2, 0.0))
    t1, t2 = _orthonormal_tangents(axis)
    return cos_theta * axis + sin_theta * (math.cos(phi) * t1 + math.sin(phi) * t2)


def sample_antipodal(mesh: TriangleMesh, count: int, seed=0) -> list[GraspCandidate]:
    """Draw mutually antipodal contact pairs constrained by local friction cones.

    Each attempt picks a surface point (faces weighted by area), shoots a ray
    uniformly inside that face's friction cone, and keeps the pair when the
    reverse closing direction also fits the hit face's cone. The approach
    vector is a uniformly random roll about the closing line. Runs until
    `count` pairs are accepted or 100*count attempts are spent; zero accepted
    pairs raise SamplingInfeasibleError.
    """
    if mesh.face_friction is None:
        raise ValueError("mesh has no per-face friction assigned")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = ensure_rng(seed)
    probs = mesh.face_areas / mesh.face_areas.sum()
    accepted: list[GraspCandidate] = []
    budget = 100 * count
    for _ in range(budget):
        if len(accepted) >= count:
            break
        face_a = int(rng.choice(mesh.n_faces, p=probs))
        point_a = sample_face_point(mesh, face_a, rng)
        inward_a = -mesh.face_normals[face_a]
        ray = _sample_cone_direction(inward_a, float(mesh.face_friction[face_a]), rng)
        hit = ray_mesh_intersection(mesh, point_a, ray, t_min=CONTACT_CLEARANCE)
        if hit is None:
            continue
        face_b, _, point_b = hit
        cone_b = FrictionCone(
            contact_point=point_b,
            inward_normal=-mesh.face_normals[face_b],
            cof=float(mesh.face_friction[face_b]),
        )
        if not cone_b.contains(-ray):
            continue
        t1, t2 = _orthonormal_tangents(ray)
        roll = rng.random() * 2.0 * math.pi
        approach = math.cos(roll) * t1 + math.sin(roll) * t2
        accepted.append(
            GraspCandidate(
                contact_a=Contact(point=point_a, face_index=face_a),
                contact_b=Contact(point=point_b, face_index=face_b),
                closing_vector=ray,
                approach_vector=approach,
            )
        )
    if not accepted:
        raise SamplingInfeasibleError(
            f"no antipodal pair accepted within {budget} attempts"
        )
    return accepted


def _gripper_boxes(candidate: GraspCandidate, gripper: GripperGeometry):
    """Finger and palm boxes as (center, half_extents, axes-as-columns)."""
    a = candidate.contact_a.point
    b = candidate.contact_b.point
    closing = candidate.closing_vector
    approach = candidate.approach_vector
    lateral = np.cross(closing, approach)
    lateral /= np.linalg.norm(lateral)
    axes = np.column_stack([closing, lateral, approach])
    fw, fl, pd = gripper.finger_width, gripper.finger_length, gripper.palm_depth
    mid = 0.5 * (a + b)
    separation = candidate.separation
    boxes = [
        (a - 0.5 * fw * closing - 0.5 * fl * approach, np.array([fw / 2, fw / 2, fl / 2]), axes),
        (b + 0.5 * fw * closing - 0.5 * fl * approach, np.array([fw / 2, fw / 2, fl / 2]), axes),
        (
            mid - (fl + 0.5 * pd) * approach,
            np.array([separation / 2 + fw, fw / 2, pd / 2]),
            axes,
        ),
    ]
    return boxes


def check_collision(
    candidate: GraspCandidate, mesh: TriangleMesh, gripper: GripperGeometry = GripperGeometry()
) -> bool:
    """True when the grasp is reachable: opening fits and no box hits the mesh.

    Faces within CONTACT_CLEARANCE of either contact are exempt, since the
    fingertips touch them by construction.
    """
    if candidate.separation > gripper.max_opening:
        return False
    exempt = (
        point_triangle_distances(candidate.contact_a.point, mesh) <= CONTACT_CLEARANCE
    ) | (point_triangle_distances(candidate.contact_b.point, mesh) <= CONTACT_CLEARANCE)
    for center, half, axes in _gripper_boxes(candidate, gripper):
        overlap = box_triangle_overlaps(center, half, axes, mesh)
        if np.any(overlap & ~exempt):
            return False
    return True


def contact_wrenches(cone: FrictionCone, torque_origin, torque_scale: float) -> np.ndarray:
    """Primitive 6D wrenches of a cone: unit edge forces with scaled torques."""
    if torque_scale <= 0.0:
        raise ValueError("torque_scale must be positive")
    origin = np.asarray(torque_origin, dtype=float).reshape(3)
    edges = cone.edges()
    lever = cone.contact_point - origin
    torques = np.cross(np.broadcast_to(lever, edges.shape), edges) / torque_scale
    return np.hstack([edges, torques])


def ferrari_canny_l1(wrenches) -> GraspScore:
    """Largest origin-centered wrench ball inside the union hull of primitives."""
    wrenches = np.asarray(wrenches, dtype=float).reshape(-1, 6)
    if len(wrenches) == 0:
        raise ValueError("at least one wrench is required")
    quality = hull_interior_distance(wrenches, tolerance=1e-9)
    return GraspScore(quality=quality, force_closure=quality > 0.0)


def grasp_wrenches(
    candidate: GraspCandidate, mesh: TriangleMesh, cone_edges: int, torque_origin, torque_scale
) -> np.ndarray:
    """All primitive wrenches of both contacts of a candidate."""
    if mesh.face_friction is None:
        raise ValueError("mesh has no per-face friction assigned")
    parts = []
    for contact in (candidate.contact_a, candidate.contact_b):
        cone = FrictionCone(
            contact_point=contact.point,
            inward_normal=-mesh.face_normals[contact.face_index],
            cof=float(mesh.face_friction[contact.face_index]),
            edge_count=cone_edges,
        )
        parts.append(contact_wrenches(cone, torque_origin, torque_scale))
    return np.vstack(parts)


def rank_grasps(
    candidates,
    mesh: TriangleMesh,
    gripper: GripperGeometry = GripperGeometry(),
    cone_edges: int = 8,
    top_k: int = 5,
) -> list[tuple[GraspCandidate, GraspScore]]:
    """Collision-filter, score, and return the top_k candidates by quality.

    Torques are taken about the mesh centroid and normalized by the largest
    vertex radius. Quality ties keep the lower candidate index first.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    candidates = list(candidates)
    torque_origin = mesh.centroid()
    torque_scale = mesh.max_radius()
    survivors = [
        (i, c) for i, c in enumerate(candidates) if check_collision(c, mesh, gripper)
    ]
    if not survivors:
        raise NoValidGraspError("all candidates collide with the mesh")
    scored = []
    for index, candidate in survivors:
        wrenches = grasp_wrenches(candidate, mesh, cone_edges, torque_origin, torque_scale)
        scored.append((index, candidate, ferrari_canny_l1(wrenches)))
    scored.sort(key=lambda item: (-item[2].quality, item[0]))
    return [(candidate, score) for _, candidate, score in scored[:top_k]]
