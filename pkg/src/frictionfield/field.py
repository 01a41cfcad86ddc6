"""Per-region friction fields inferred from a fitted mixture."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .mixture import VisuoHapticMixture, infer_friction
from .segmentation import Partition
from .validation import readonly, require_positive


@dataclass(frozen=True)
class FrictionField:
    """Friction mean/variance per region, expanded to every point."""

    region_ids: np.ndarray
    region_friction: np.ndarray
    region_variance: np.ndarray
    point_friction: np.ndarray
    point_variance: np.ndarray

    def __post_init__(self):
        for name in ("region_ids", "region_friction", "region_variance",
                     "point_friction", "point_variance"):
            arr = np.asarray(getattr(self, name), dtype=int if name == "region_ids" else float)
            object.__setattr__(self, name, readonly(arr))
        if np.any(self.region_variance < 0) or np.any(self.point_variance < 0):
            raise ValueError("variance entries must be non-negative")

    def __len__(self) -> int:
        return len(self.region_ids)


def infer_field(
    model: VisuoHapticMixture,
    partition: Partition,
    cloud: PointCloud,
    per_point: bool = False,
) -> FrictionField:
    """Evaluate conditional friction for every region of a partitioned cloud.

    Region values come from the region's mean color. By default each point
    inherits its region's values; with per_point=True the per-point expansion
    is evaluated at each point's own color instead (the region entries are
    unchanged), which is what the per-point PLY export uses.
    """
    if partition.source_point_count != len(cloud):
        raise ValueError("partition does not match the cloud size")
    region_colors = np.array([r.mean_color for r in partition.regions])
    region_mean, region_var = infer_friction(model, region_colors)

    labels = partition.labels()
    if per_point:
        point_mean, point_var = infer_friction(model, cloud.colors)
    else:
        point_mean = region_mean[labels]
        point_var = region_var[labels]
    return FrictionField(
        region_ids=np.array([r.id for r in partition.regions]),
        region_friction=region_mean,
        region_variance=region_var,
        point_friction=point_mean,
        point_variance=point_var,
    )


@dataclass(frozen=True)
class DensityHistogram:
    """Region counts per friction bin over [0, max observed value]."""

    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bin_edges", readonly(np.asarray(self.bin_edges, dtype=float)))
        object.__setattr__(self, "counts", readonly(np.asarray(self.counts, dtype=int)))

    def rows(self) -> list[tuple[float, float, int]]:
        """(bin_low, bin_high, count) rows for CSV export."""
        return [
            (float(self.bin_edges[i]), float(self.bin_edges[i + 1]), int(self.counts[i]))
            for i in range(len(self.counts))
        ]


def density_histogram(field, bin_width: float) -> DensityHistogram:
    """Histogram of region friction means with fixed-width bins from 0.

    Accepts a FrictionField or a plain array of per-region values.
    """
    require_positive(bin_width, "bin_width")
    values = np.asarray(getattr(field, "region_friction", field), dtype=float).reshape(-1)
    top = float(values.max()) if len(values) else 0.0
    n_bins = int(np.floor(max(top, 0.0) / bin_width)) + 1
    edges = np.arange(n_bins + 1) * bin_width
    idx = np.minimum((values // bin_width).astype(int), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    return DensityHistogram(bin_edges=edges, counts=counts)


def histogram_peaks(histogram: DensityHistogram, min_fraction: float = 0.05) -> list[float]:
    """Locations (bin centers) of local maxima above a fraction of the total.

    Runs of equal counts collapse into a single plateau; a plateau is a peak
    when it exceeds both neighbors (the histogram is zero-padded at the ends)
    and its count passes the threshold.
    """
    counts = histogram.counts
    total = counts.sum()
    if total == 0:
        return []
    threshold = min_fraction * total
    padded = np.concatenate([[0], counts, [0]])
    peaks = []
    i = 1
    while i < len(padded) - 1:
        j = i
        while j + 1 < len(padded) - 1 and padded[j + 1] == padded[i]:
            j += 1
        if padded[i] > padded[i - 1] and padded[i] > padded[j + 1] and padded[i] > threshold:
            mid = (i + j) / 2.0 - 1.0  # back to unpadded bin coordinates
            left = histogram.bin_edges[int(np.floor(mid))]
            right = histogram.bin_edges[int(np.ceil(mid)) + 1]
            peaks.append(float((left + right) / 2.0))
        i = j + 1
    return peaks
