"""scikit-learn style facades over the segmentation and friction-regression cores.

These wrappers let the algorithms participate in the usual estimator
ecosystem (get_params/set_params, cloning, pipelines) while the functional
modules keep the file- and type-level contracts.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, RegressorMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from .cloud import PointCloud
from .mixture import (
    DEFAULT_BACKGROUND_MEAN,
    DEFAULT_BACKGROUND_VARIANCE,
    DEFAULT_COV_FLOOR,
    fit_mixture,
    infer_friction,
    make_background,
)
from .dataset import VisuoHapticDataset
from .segmentation import segment


class SupervoxelSegmenter(BaseEstimator, ClusterMixin):
    """Cluster [x, y, z, r, g, b] rows into connected color-homogeneous regions.

    X stacks positions (meters) and colors (in [0, 1]) column-wise. After
    `fit`, `labels_` holds the region id per row and `partition_` the full
    region structure.
    """

    def __init__(self, seed_resolution=0.02, color_weight=1.0, spatial_weight=1.0, random_state=0):
        self.seed_resolution = seed_resolution
        self.color_weight = color_weight
        self.spatial_weight = spatial_weight
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] != 6:
            raise ValueError("X must have 6 columns: x, y, z, r, g, b")
        cloud = PointCloud(X[:, :3], X[:, 3:])
        self.partition_ = segment(
            cloud,
            seed_resolution=self.seed_resolution,
            color_weight=self.color_weight,
            spatial_weight=self.spatial_weight,
            seed=self.random_state,
        )
        self.labels_ = self.partition_.labels()
        return self


class FrictionMixtureRegressor(BaseEstimator, RegressorMixin):
    """Friction-from-color regression backed by the joint visuo-haptic mixture.

    X holds RGB rows in [0, 1]; y holds measured friction coefficients with
    NaN marking visual-only rows. `fit` accepts an optional `scene_colors`
    array for the background component statistics (defaults to X itself).
    """

    def __init__(
        self,
        n_materials=1,
        max_iter=200,
        log_lik_tol=1e-8,
        cov_floor=DEFAULT_COV_FLOOR,
        background_mean=DEFAULT_BACKGROUND_MEAN,
        background_variance=DEFAULT_BACKGROUND_VARIANCE,
        random_state=0,
    ):
        self.n_materials = n_materials
        self.max_iter = max_iter
        self.log_lik_tol = log_lik_tol
        self.cov_floor = cov_floor
        self.background_mean = background_mean
        self.background_variance = background_variance
        self.random_state = random_state

    def fit(self, X, y, scene_colors=None):
        X = check_array(X)
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.shape[1] != 3:
            raise ValueError("X must have 3 color columns")
        if len(y) != len(X):
            raise ValueError("X and y must have the same length")
        dataset = VisuoHapticDataset(
            colors=X,
            cof=y,
            region_ids=np.zeros(len(X), dtype=int),
            explored_region_ids=frozenset([0]) if np.isfinite(y).any() else frozenset(),
        )
        background = make_background(
            X if scene_colors is None else np.asarray(scene_colors, dtype=float),
            h_prior_mean=self.background_mean,
            h_prior_var=self.background_variance,
            cov_floor=self.cov_floor,
        )
        self.model_ = fit_mixture(
            dataset,
            n_materials=self.n_materials,
            background=background,
            max_iter=self.max_iter,
            log_lik_tol=self.log_lik_tol,
            cov_floor=self.cov_floor,
            seed=self.random_state,
        )
        self.log_likelihoods_ = np.asarray(self.model_.em_log_likelihoods)
        return self

    def predict(self, X, return_variance=False):
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit before predict")
        X = check_array(X)
        mean, variance = infer_friction(self.model_, X)
        if return_variance:
            return mean, variance
        return mean
