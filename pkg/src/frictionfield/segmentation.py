"""Supervoxel-style partitioning of a cloud into connected homogeneous regions.

The clustering is a seeded k-means variant: seeds on a grid at the requested
resolution, a joint color + normalized-spatial distance, a fixed number of
refinement rounds, and a final pass that splits spatially disconnected
fragments into their own regions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud, save_cloud
from .validation import ensure_rng, readonly, require_positive

REFINEMENT_ROUNDS = 5

# Distinct debug colors; region id indexes this palette modulo its size.
_PALETTE = np.array(
    [
        (0.90, 0.10, 0.10), (0.10, 0.60, 0.90), (0.15, 0.75, 0.15), (0.95, 0.65, 0.10),
        (0.60, 0.25, 0.80), (0.95, 0.90, 0.20), (0.10, 0.85, 0.75), (0.85, 0.30, 0.60),
        (0.55, 0.40, 0.20), (0.35, 0.35, 0.95), (0.65, 0.85, 0.30), (0.90, 0.45, 0.30),
        (0.25, 0.50, 0.30), (0.70, 0.70, 0.70), (0.95, 0.75, 0.80), (0.20, 0.20, 0.55),
        (0.75, 0.55, 0.90), (0.45, 0.80, 0.95), (0.80, 0.80, 0.40), (0.30, 0.30, 0.30),
    ]
)


class PartitionError(ValueError):
    """A partition violates coverage or disjointness; the message names the index."""


@dataclass(frozen=True)
class Region:
    """One connected region: member point indices plus summary statistics."""

    id: int
    member_indices: np.ndarray
    centroid: np.ndarray
    mean_color: np.ndarray

    def __post_init__(self):
        members = np.asarray(self.member_indices, dtype=int)
        if members.size == 0:
            raise ValueError(f"region {self.id} has no members")
        object.__setattr__(self, "member_indices", readonly(np.sort(members)))
        object.__setattr__(self, "centroid", readonly(np.asarray(self.centroid, dtype=float)))
        object.__setattr__(self, "mean_color", readonly(np.asarray(self.mean_color, dtype=float)))

    def __len__(self) -> int:
        return len(self.member_indices)


@dataclass(frozen=True)
class Partition:
    """A set of regions over a cloud of source_point_count points."""

    regions: tuple
    source_point_count: int

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        ids = [r.id for r in self.regions]
        if sorted(ids) != list(range(len(ids))):
            raise ValueError("region ids must be unique and contiguous from 0")

    def __len__(self) -> int:
        return len(self.regions)

    def labels(self) -> np.ndarray:
        """Per-point region id; -1 marks uncovered points (invalid partitions)."""
        out = np.full(self.source_point_count, -1, dtype=int)
        for region in self.regions:
            out[region.member_indices] = region.id
        return out


def validate_partition(partition: Partition) -> None:
    """Check both partition constraints: full coverage and disjointness."""
    seen = np.zeros(partition.source_point_count, dtype=np.int64)
    for region in partition.regions:
        members = region.member_indices
        if members.min() < 0:
            raise PartitionError(f"point index {int(members.min())} is negative")
        if members.max() >= partition.source_point_count:
            raise PartitionError(
                f"point index {int(members.max())} is outside [0, {partition.source_point_count})"
            )
        np.add.at(seen, members, 1)
        if len(np.unique(members)) != len(members):
            dup = members[np.argmax(np.bincount(members) > 1)]
            raise PartitionError(f"point index {int(dup)} belongs to multiple regions")
    over = np.nonzero(seen > 1)[0]
    if over.size:
        raise PartitionError(f"point index {int(over[0])} belongs to multiple regions")
    missing = np.nonzero(seen == 0)[0]
    if missing.size:
        raise PartitionError(f"point index {int(missing[0])} is not covered by any region")


def _grid_seeds(positions: np.ndarray, resolution: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of one seed point per occupied grid cell, in seeded order."""
    lo = positions.min(axis=0)
    extent = positions.max(axis=0) - lo
    cells = np.maximum(np.ceil(extent / resolution).astype(int), 1)
    idx = np.minimum((positions - lo) // resolution, cells - 1).astype(int)
    keys = [tuple(k) for k in idx]
    by_cell: dict[tuple, int] = {}
    for point_index, key in enumerate(keys):
        center = lo + (np.asarray(key) + 0.5) * resolution
        dist = float(np.linalg.norm(positions[point_index] - center))
        best = by_cell.get(key)
        if best is None or dist < best[0] - 1e-15:
            by_cell[key] = (dist, point_index)
    ordered = [by_cell[key][1] for key in sorted(by_cell)]
    perm = rng.permutation(len(ordered))
    return np.asarray(ordered, dtype=int)[perm]


def _assign(positions, colors, centers_pos, centers_col, color_weight, spatial_weight, resolution):
    """Per-point argmin of the joint distance; ties go to the lowest seed id."""
    n = len(positions)
    labels = np.empty(n, dtype=int)
    sw = spatial_weight / (resolution * resolution)
    for start in range(0, n, 2048):
        stop = min(start + 2048, n)
        d_pos = ((positions[start:stop, None, :] - centers_pos[None, :, :]) ** 2).sum(axis=2)
        d_col = ((colors[start:stop, None, :] - centers_col[None, :, :]) ** 2).sum(axis=2)
        labels[start:stop] = np.argmin(color_weight * d_col + sw * d_pos, axis=1)
    return labels


def _connected_components(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Components of the radius graph, each as local index array."""
    n = len(points)
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    comps = []
    for root in np.unique(roots):
        comps.append(np.nonzero(roots == root)[0])
    return comps


def segment(
    cloud: PointCloud,
    seed_resolution: float = 0.02,
    color_weight: float = 1.0,
    spatial_weight: float = 1.0,
    seed=0,
) -> Partition:
    """Partition a cloud into connected regions of similar color and extent.

    Every point lands in exactly one region (validated before returning), and
    regions whose members split into several spatial components at the seed
    resolution are divided into separate regions.
    """
    if len(cloud) == 0:
        raise ValueError("cannot segment an empty cloud")
    require_positive(seed_resolution, "seed_resolution")
    if color_weight < 0 or spatial_weight < 0:
        raise ValueError("weights must be non-negative")
    if color_weight == 0 and spatial_weight == 0:
        raise ValueError("at least one of color_weight/spatial_weight must be positive")
    rng = ensure_rng(seed)
    positions = cloud.positions
    colors = cloud.colors

    seeds = _grid_seeds(positions, seed_resolution, rng)
    centers_pos = positions[seeds].copy()
    centers_col = colors[seeds].copy()
    labels = _assign(
        positions, colors, centers_pos, centers_col, color_weight, spatial_weight, seed_resolution
    )
    for _ in range(REFINEMENT_ROUNDS):
        for c in range(len(seeds)):
            members = labels == c
            if members.any():
                centers_pos[c] = positions[members].mean(axis=0)
                centers_col[c] = colors[members].mean(axis=0)
        labels = _assign(
            positions, colors, centers_pos, centers_col, color_weight, spatial_weight,
            seed_resolution,
        )

    # Split spatially disconnected fragments into their own regions.
    pieces = []
    for c in range(len(seeds)):
        members = np.nonzero(labels == c)[0]
        if members.size == 0:
            continue
        for comp in _connected_components(positions[members], seed_resolution):
            pieces.append(members[comp])
    pieces.sort(key=lambda m: int(m.min()))

    regions = []
    for rid, members in enumerate(pieces):
        regions.append(
            Region(
                id=rid,
                member_indices=members,
                centroid=positions[members].mean(axis=0),
                mean_color=colors[members].mean(axis=0),
            )
        )
    partition = Partition(regions=tuple(regions), source_point_count=len(cloud))
    validate_partition(partition)
    return partition


def export_partition_ply(partition: Partition, cloud: PointCloud, path) -> None:
    """Debug export: each region painted with a fixed palette color."""
    labels = partition.labels()
    colors = _PALETTE[labels % len(_PALETTE)]
    save_cloud(PointCloud(cloud.positions, colors, cloud.frame_id), path)
