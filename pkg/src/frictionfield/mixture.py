"""Joint visuo-haptic Gaussian mixture: EM fitting and conditional inference.

The model has one component per material plus a fixed background component
built from whole-scene color statistics with a wide friction prior. Fitting
runs EM on the full (visual + haptic) samples, then re-estimates each
material component's visual mean and covariance from all samples weighted by
visual responsibility, so color statistics reflect the whole region while the
friction and cross blocks come only from measured points. Friction for a new
color is inferred from the conditional mixture: per-component linear-Gaussian
conditionals blended by visual responsibilities, with the mixture variance
including the spread of the component means.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .dataset import VisuoHapticDataset
from .validation import ensure_rng, readonly

DEFAULT_COV_FLOOR = 1e-6
DEFAULT_BACKGROUND_MEAN = 0.5
DEFAULT_BACKGROUND_VARIANCE = 0.25

_LOG_2PI = math.log(2.0 * math.pi)


class NumericalFitError(RuntimeError):
    """EM produced non-finite or degenerate parameters."""


def floor_covariance(cov: np.ndarray, cov_floor: float) -> np.ndarray:
    """Symmetrize and lift every eigenvalue to at least cov_floor."""
    cov = 0.5 * (cov + cov.T)
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, cov_floor)
    return (vecs * vals) @ vecs.T


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component over the 4D [R, G, B, c.o.f.] space."""

    prior: float
    mean: np.ndarray
    covariance: np.ndarray
    is_background: bool = False

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(4)
        cov = np.asarray(self.covariance, dtype=float).reshape(4, 4)
        if not (0.0 < self.prior <= 1.0):
            raise ValueError(f"prior must be in (0, 1], got {self.prior}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("component parameters must be finite")
        if np.max(np.abs(cov - cov.T)) > 1e-9:
            raise ValueError("covariance must be symmetric within 1e-9")
        if np.linalg.eigvalsh(cov).min() <= 0.0:
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "prior", float(self.prior))
        object.__setattr__(self, "mean", readonly(mean))
        object.__setattr__(self, "covariance", readonly(cov))

    @property
    def mean_visual(self) -> np.ndarray:
        return self.mean[:3]

    @property
    def mean_haptic(self) -> float:
        return float(self.mean[3])

    @property
    def cov_visual(self) -> np.ndarray:
        return self.covariance[:3, :3]

    @property
    def cov_cross(self) -> np.ndarray:
        """The visual-to-haptic covariance block as a 3-vector."""
        return self.covariance[:3, 3]

    @property
    def cov_haptic(self) -> float:
        return float(self.covariance[3, 3])


class VisuoHapticMixture:
    """An immutable fitted mixture with exactly one background component."""

    def __init__(self, components, em_log_likelihoods=()):
        components = tuple(components)
        if not components:
            raise ValueError("a mixture needs at least one component")
        n_background = sum(1 for c in components if c.is_background)
        if n_background != 1:
            raise ValueError(f"exactly one background component required, got {n_background}")
        total = sum(c.prior for c in components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"component priors must sum to 1 within 1e-9, got {total}")
        self.components = components
        self.n_materials = len(components) - 1
        self.em_log_likelihoods = tuple(float(v) for v in em_log_likelihoods)
        self._freeze()

    def _freeze(self):
        self._log_priors = np.log([c.prior for c in self.components])
        self._chol_v = []
        self._slopes = np.empty((len(self.components), 3))
        self._cond_var = np.empty(len(self.components))
        for i, c in enumerate(self.components):
            chol = np.linalg.cholesky(c.cov_visual)
            self._chol_v.append(chol)
            slope = np.linalg.solve(c.cov_visual, c.cov_cross)
            self._slopes[i] = slope
            self._cond_var[i] = max(c.cov_haptic - float(c.cov_cross @ slope), 0.0)

    def __len__(self) -> int:
        return len(self.components)

    def _visual_log_density(self, colors: np.ndarray) -> np.ndarray:
        """(m, C) log densities of the visual marginals."""
        out = np.empty((len(colors), len(self.components)))
        for i, c in enumerate(self.components):
            chol = self._chol_v[i]
            diff = colors - c.mean_visual
            solved = np.linalg.solve(chol, diff.T)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            out[:, i] = -0.5 * ((solved**2).sum(axis=0) + logdet + 3 * _LOG_2PI)
        return out

    def to_dict(self) -> dict:
        return {
            "n_materials": self.n_materials,
            "components": [
                {
                    "prior": c.prior,
                    "mean": c.mean.tolist(),
                    "covariance": c.covariance.tolist(),
                    "is_background": c.is_background,
                }
                for c in self.components
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "VisuoHapticMixture":
        components = [
            GaussianComponent(
                prior=entry["prior"],
                mean=np.asarray(entry["mean"], dtype=float),
                covariance=np.asarray(entry["covariance"], dtype=float),
                is_background=bool(entry["is_background"]),
            )
            for entry in payload["components"]
        ]
        model = cls(components)
        if model.n_materials != int(payload["n_materials"]):
            raise ValueError("n_materials does not match the component count")
        return model

    def save_json(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load_json(cls, path) -> "VisuoHapticMixture":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_dict(json.load(fh))


def make_background(
    scene,
    h_prior_mean: float = DEFAULT_BACKGROUND_MEAN,
    h_prior_var: float = DEFAULT_BACKGROUND_VARIANCE,
    cov_floor: float = DEFAULT_COV_FLOOR,
) -> GaussianComponent:
    """Background component from whole-scene color statistics.

    The visual block is the sample mean/covariance of every scene color
    (before any filtering); the friction block is the uninformative prior and
    the cross block is zero. Accepts a PointCloud or an (n, 3) color array.
    Covariance uses the 1/n convention, floored so quantized colors cannot
    make it singular.
    """
    colors = np.asarray(getattr(scene, "colors", scene), dtype=float).reshape(-1, 3)
    if len(colors) < 2:
        raise ValueError("background statistics need at least 2 scene points")
    if h_prior_var <= 0.0:
        raise ValueError("h_prior_var must be positive")
    mean_v = colors.mean(axis=0)
    diff = colors - mean_v
    cov_v = floor_covariance(diff.T @ diff / len(colors), cov_floor)
    mean = np.concatenate([mean_v, [h_prior_mean]])
    cov = np.zeros((4, 4))
    cov[:3, :3] = cov_v
    cov[3, 3] = h_prior_var
    return GaussianComponent(prior=1.0, mean=mean, covariance=cov, is_background=True)


def _log_density_full(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    diff = x - mean
    solved = np.linalg.solve(chol, diff.T)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * ((solved**2).sum(axis=0) + logdet + x.shape[1] * _LOG_2PI)


def _kmeanspp_rows(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: k rows of x chosen by squared-distance weighting."""
    chosen = [int(rng.integers(len(x)))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total <= 0.0:
            chosen.append(int(rng.integers(len(x))))
        else:
            chosen.append(int(rng.choice(len(x), p=d2 / total)))
        d2 = np.minimum(d2, ((x - x[chosen[-1]]) ** 2).sum(axis=1))
    return x[chosen].copy()


def fit_mixture(
    dataset: VisuoHapticDataset,
    n_materials: int,
    background: GaussianComponent | None = None,
    max_iter: int = 200,
    log_lik_tol: float = 1e-8,
    cov_floor: float = DEFAULT_COV_FLOOR,
    seed=0,
) -> VisuoHapticMixture:
    """Fit the material components by EM and return the full mixture.

    EM runs over the full samples with the background held fixed apart from
    its prior. Afterwards each material component's visual block is
    re-estimated from all samples (full and visual-only) weighted by visual
    responsibility. Component means are seeded k-means++ style from the full
    samples with the given seed, so the fit is deterministic.
    """
    if n_materials < 1:
        raise ValueError("n_materials must be >= 1")
    x = dataset.full_samples()
    if len(x) == 0:
        raise ValueError("fitting requires at least one full (visual + haptic) sample")
    if background is None:
        background = make_background(dataset.colors, cov_floor=cov_floor)
    rng = ensure_rng(seed)
    n, n_comp = len(x), n_materials + 1

    means = np.empty((n_comp, 4))
    covs = np.empty((n_comp, 4, 4))
    means[:n_materials] = _kmeanspp_rows(x, n_materials, rng)
    diff = x - x.mean(axis=0)
    covs[:n_materials] = floor_covariance(diff.T @ diff / n, cov_floor)
    means[n_materials] = background.mean
    covs[n_materials] = background.covariance
    priors = np.full(n_comp, 1.0 / n_comp)

    log_likelihoods = []
    previous = -np.inf
    for iteration in range(max_iter):
        log_dens = np.column_stack(
            [_log_density_full(x, means[c], covs[c]) for c in range(n_comp)]
        )
        weighted = log_dens + np.log(priors)
        per_sample = logsumexp(weighted, axis=1)
        log_lik = float(per_sample.sum())
        if not math.isfinite(log_lik):
            raise NumericalFitError(f"non-finite log-likelihood at iteration {iteration}")
        log_likelihoods.append(log_lik)
        if log_lik - previous < log_lik_tol and iteration > 0:
            break
        previous = log_lik

        resp = np.exp(weighted - per_sample[:, None])
        mass = resp.sum(axis=0)
        priors = mass / n
        for c in range(n_materials):
            if mass[c] <= 1e-12:
                raise NumericalFitError(
                    f"component {c} received no responsibility at iteration {iteration}"
                )
            means[c] = resp[:, c] @ x / mass[c]
            centered = x - means[c]
            covs[c] = floor_covariance(
                (resp[:, c, None] * centered).T @ centered / mass[c], cov_floor
            )
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covs))):
            raise NumericalFitError(f"non-finite parameters at iteration {iteration}")

    components = [
        GaussianComponent(prior=float(priors[c]), mean=means[c], covariance=covs[c])
        for c in range(n_materials)
    ]
    components.append(
        GaussianComponent(
            prior=float(priors[n_materials]),
            mean=background.mean,
            covariance=background.covariance,
            is_background=True,
        )
    )
    model = VisuoHapticMixture(components, em_log_likelihoods=log_likelihoods)
    model = _reestimate_visual_blocks(model, dataset.colors, cov_floor)
    return model


def _reestimate_visual_blocks(
    model: VisuoHapticMixture, all_colors: np.ndarray, cov_floor: float
) -> VisuoHapticMixture:
    """Replace material components' visual mean/covariance using every sample.

    Visual-only points carry color evidence for a material's appearance even
    though they contribute nothing to the friction or cross blocks.
    """
    resp = visual_responsibilities(model, all_colors)
    rebuilt = []
    for i, comp in enumerate(model.components):
        if comp.is_background:
            rebuilt.append(comp)
            continue
        w = resp[:, i]
        mass = float(w.sum())
        if mass <= 1e-12:
            rebuilt.append(comp)
            continue
        mean_v = w @ all_colors / mass
        centered = all_colors - mean_v
        cov_v = (w[:, None] * centered).T @ centered / mass
        mean = comp.mean.copy()
        mean[:3] = mean_v
        cov = comp.covariance.copy()
        cov[:3, :3] = cov_v
        cov = floor_covariance(cov, cov_floor)
        rebuilt.append(
            GaussianComponent(prior=comp.prior, mean=mean, covariance=cov, is_background=False)
        )
    return VisuoHapticMixture(rebuilt, em_log_likelihoods=model.em_log_likelihoods)


def visual_responsibilities(model: VisuoHapticMixture, colors) -> np.ndarray:
    """Posterior component weights given only a color, per input row.

    Computed in the log domain, so inputs far from every component resolve to
    the dominant (usually background) component instead of dividing by zero.
    A single 3-vector input returns a (C,) vector.
    """
    colors = np.asarray(colors, dtype=float)
    single = colors.ndim == 1
    colors = colors.reshape(-1, 3)
    log_w = model._visual_log_density(colors) + model._log_priors
    log_norm = logsumexp(log_w, axis=1)
    resp = np.exp(log_w - log_norm[:, None])
    return resp[0] if single else resp


def infer_friction(model: VisuoHapticMixture, colors) -> tuple:
    """Conditional friction mean and variance for each input color.

    Each component contributes a linear-Gaussian conditional; the mixture
    variance adds the dispersion of the conditional means around the blended
    mean, so it never goes negative. A single 3-vector input returns scalars.
    """
    colors = np.asarray(colors, dtype=float)
    single = colors.ndim == 1
    colors = colors.reshape(-1, 3)
    resp = visual_responsibilities(model, colors)
    cond_means = np.empty((len(colors), len(model.components)))
    for i, comp in enumerate(model.components):
        cond_means[:, i] = comp.mean_haptic + (colors - comp.mean_visual) @ model._slopes[i]
    mean = (resp * cond_means).sum(axis=1)
    second_moment = (resp * (model._cond_var[None, :] + cond_means**2)).sum(axis=1)
    variance = np.maximum(second_moment - mean**2, 0.0)
    if single:
        return float(mean[0]), float(variance[0])
    return mean, variance
