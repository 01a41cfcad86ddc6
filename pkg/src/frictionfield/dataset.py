"""Assembly of the joint visuo-haptic training set from a partitioned cloud."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .segmentation import Partition
from .validation import readonly


@dataclass(frozen=True)
class VisuoHapticSample:
    """One observation: RGB visual part, plus a friction value when measured."""

    visual: np.ndarray
    haptic: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "visual", readonly(np.asarray(self.visual, dtype=float).reshape(3)))
        if self.haptic is not None:
            h = float(self.haptic)
            if not math.isfinite(h) or h < 0.0:
                raise ValueError(f"haptic value must be finite and >= 0, got {h}")
            object.__setattr__(self, "haptic", h)

    @property
    def is_full(self) -> bool:
        return self.haptic is not None


@dataclass(frozen=True)
class VisuoHapticDataset:
    """Per-point samples over a partitioned cloud.

    `cof` is NaN-coded: finite entries are full (visual + haptic) samples,
    NaN entries are visual-only. `explored_region_ids` lists regions with at
    least one full sample.
    """

    colors: np.ndarray
    cof: np.ndarray
    region_ids: np.ndarray
    explored_region_ids: frozenset

    def __post_init__(self):
        object.__setattr__(self, "colors", readonly(np.asarray(self.colors, dtype=float)))
        object.__setattr__(self, "cof", readonly(np.asarray(self.cof, dtype=float)))
        object.__setattr__(self, "region_ids", readonly(np.asarray(self.region_ids, dtype=int)))
        object.__setattr__(self, "explored_region_ids", frozenset(self.explored_region_ids))
        if not (len(self.colors) == len(self.cof) == len(self.region_ids)):
            raise ValueError("colors, cof, and region_ids must have equal length")

    def __len__(self) -> int:
        return len(self.cof)

    @property
    def full_mask(self) -> np.ndarray:
        return np.isfinite(self.cof)

    @property
    def n_full(self) -> int:
        return int(self.full_mask.sum())

    def full_samples(self) -> np.ndarray:
        """(n_full, 4) array of [R, G, B, c.o.f.] rows."""
        mask = self.full_mask
        return np.column_stack([self.colors[mask], self.cof[mask]])

    def samples(self) -> list[VisuoHapticSample]:
        return [
            VisuoHapticSample(self.colors[i], None if np.isnan(self.cof[i]) else self.cof[i])
            for i in range(len(self))
        ]

    def is_explored(self, region_id: int) -> bool:
        return region_id in self.explored_region_ids


def build_dataset(partition: Partition, cloud: PointCloud, annotations) -> VisuoHapticDataset:
    """Pair annotated point colors with their friction; the rest stay visual-only.

    A point touched several times gets the mean of its measured coefficients.
    Regions containing at least one annotated point are tagged explored.
    """
    if partition.source_point_count != len(cloud):
        raise ValueError("partition does not match the cloud size")
    sums = np.zeros(len(cloud))
    counts = np.zeros(len(cloud))
    for ann in annotations:
        if not 0 <= ann.point_index < len(cloud):
            raise ValueError(f"annotation index {ann.point_index} outside [0, {len(cloud)})")
        sums[ann.point_index] += ann.friction
        counts[ann.point_index] += 1.0
    cof = np.full(len(cloud), np.nan)
    touched = counts > 0
    cof[touched] = sums[touched] / counts[touched]

    labels = partition.labels()
    explored = frozenset(int(r) for r in np.unique(labels[touched])) if touched.any() else frozenset()
    return VisuoHapticDataset(
        colors=cloud.colors, cof=cof, region_ids=labels, explored_region_ids=explored
    )
