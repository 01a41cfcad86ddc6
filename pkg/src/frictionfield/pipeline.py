"""File-level orchestration: scene synthesis, the estimation pipeline, and grasping runs."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.spatial import cKDTree

from .cloud import crop_depth, load_cloud, load_friction_cloud, remove_plane, save_cloud
from .dataset import build_dataset
from .field import density_histogram, histogram_peaks, infer_field
from .grasping import (
    GripperGeometry,
    assign_face_friction,
    rank_grasps,
    sample_antipodal,
)
from .haptics import associate, estimate_trace, load_trace_csv, save_trace_csv, synth_trace
from .mesh import load_mesh, save_mesh_off
from .mixture import fit_mixture, make_background
from .segmentation import segment
from .synthetic import SHAPES, box_mesh, cylinder_mesh, default_trace_chord, generate_scene


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 1)."""


class PipelineIOError(RuntimeError):
    """Missing or unreadable input, unwritable output (CLI exit code 2)."""


@dataclass
class PipelineConfig:
    """Flat run configuration; JSON keys and CLI flags share these names."""

    cloud: str = ""
    out: str = ""
    n_materials: int = 1
    trace: str | None = None
    truth: str | None = None
    seed: int = 0
    max_distance: float = 1.5
    crop_origin: tuple = (0.0, 0.0, 0.0)
    plane_threshold: float = 0.01
    seed_resolution: float = 0.02
    color_weight: float = 1.0
    spatial_weight: float = 1.0
    em_max_iter: int = 200
    em_tol: float = 1e-8
    cov_floor: float = 1e-6
    background_mean: float = 0.5
    background_variance: float = 0.25
    normal_force: float = 5.0
    speed: float = 0.02
    trace_noise: float = 0.02
    min_normal_force: float = 0.5
    trace_start: tuple | None = None
    trace_end: tuple | None = None
    bin_width: float = 0.025

    @classmethod
    def from_dict(cls, payload: dict, overrides: dict | None = None) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        merged = dict(payload)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        unknown = set(merged) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**merged)

    def validate(self) -> None:
        if not self.cloud:
            raise ConfigError("config requires a 'cloud' input path")
        if not self.out:
            raise ConfigError("config requires an 'out' directory")
        if self.n_materials < 1:
            raise ConfigError("n_materials must be >= 1")
        if self.trace is None and self.truth is None:
            raise ConfigError("config needs either a 'trace' CSV or a 'truth' CSV to synthesize one")
        for path in (self.cloud, self.trace, self.truth):
            if path is not None and not os.path.isfile(path):
                raise PipelineIOError(f"input file not found: {path}")
        if self.bin_width <= 0:
            raise ConfigError("bin_width must be positive")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _config_hash(config_dict: dict) -> str:
    return hashlib.sha256(json.dumps(config_dict, sort_keys=True).encode()).hexdigest()


def write_manifest(out_dir, config_dict: dict, seed, artifact_names) -> str:
    """Manifest with the config hash, seed, and a checksum per artifact."""
    manifest = {
        "config": config_dict,
        "config_sha256": _config_hash(config_dict),
        "seed": seed,
        "artifacts": {
            name: _sha256(os.path.join(out_dir, name)) for name in sorted(artifact_names)
        },
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def load_truth_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read `index,cof,label` rows into aligned (cof, label) arrays."""
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["index", "cof", "label"]:
            raise ValueError("truth CSV must start with header index,cof,label")
        rows = [(int(r[0]), float(r[1]), int(r[2])) for r in reader if r]
    n = max(r[0] for r in rows) + 1 if rows else 0
    cof = np.zeros(n)
    labels = np.zeros(n, dtype=int)
    for idx, value, label in rows:
        cof[idx] = value
        labels[idx] = label
    return cof, labels


def write_synthetic_scene(
    shape: str,
    materials,
    out_dir,
    noise: float = 0.01,
    seed: int = 0,
    spacing: float = 0.004,
    mesh_out: str | None = None,
) -> dict:
    """Write cloud.ply, truth.csv, a manifest, and optionally a surface mesh."""
    if shape not in SHAPES:
        raise ConfigError(f"unknown shape {shape!r} (choose from {', '.join(SHAPES)})")
    if not materials:
        raise ConfigError("at least one material is required")
    os.makedirs(out_dir, exist_ok=True)
    scene = generate_scene(shape, materials, noise=noise, seed=seed, spacing=spacing)
    save_cloud(scene.cloud, os.path.join(out_dir, "cloud.ply"))
    with open(os.path.join(out_dir, "truth.csv"), "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "cof", "label"])
        for i in range(len(scene.cloud)):
            writer.writerow([i, repr(float(scene.cof[i])), int(scene.labels[i])])
    artifacts = ["cloud.ply", "truth.csv"]
    if mesh_out:
        mesh = {
            "box": lambda: box_mesh(),
            "cylinder": lambda: cylinder_mesh(),
            "two-band-cylinder": lambda: cylinder_mesh(),
            "checkerboard": lambda: box_mesh(size=(0.24, 0.24, 0.02)),
        }[shape]()
        save_mesh_off(mesh, os.path.join(out_dir, mesh_out))
        artifacts.append(mesh_out)
    config_dict = {
        "shape": shape,
        "materials": [[list(map(float, c)), float(m)] for c, m in materials],
        "noise": noise,
        "seed": seed,
        "spacing": spacing,
    }
    write_manifest(out_dir, config_dict, seed, artifacts)
    return {"out": out_dir, "points": len(scene.cloud)}


def _map_truth_to_filtered(original_cloud, filtered_cloud, truth_cof) -> np.ndarray:
    """Carry per-point truth through filtering by exact position lookup."""
    tree = cKDTree(original_cloud.positions)
    dist, idx = tree.query(filtered_cloud.positions)
    if dist.max() > 1e-9:
        raise PipelineIOError("truth CSV does not align with the cloud positions")
    return truth_cof[idx]


def run_pipeline(config: PipelineConfig) -> dict:
    """Filter, segment, explore, fit, infer, and write all artifacts.

    Returns a summary dict with artifact paths and headline numbers.
    """
    config.validate()
    os.makedirs(config.out, exist_ok=True)
    try:
        scene_cloud = load_cloud(config.cloud)
    except (OSError, ValueError) as exc:
        raise PipelineIOError(f"failed to load cloud: {exc}") from exc

    cropped = crop_depth(scene_cloud, config.max_distance, config.crop_origin)
    if len(cropped) < 3:
        raise PipelineIOError("cloud is empty after depth cropping")
    filtered, plane = remove_plane(
        cropped, inlier_threshold=config.plane_threshold, seed=config.seed
    )
    if len(filtered) == 0:
        raise PipelineIOError("cloud is empty after plane removal")

    partition = segment(
        filtered,
        seed_resolution=config.seed_resolution,
        color_weight=config.color_weight,
        spatial_weight=config.spatial_weight,
        seed=config.seed,
    )

    if config.trace is not None:
        try:
            trace = load_trace_csv(config.trace)
        except (OSError, ValueError) as exc:
            raise PipelineIOError(f"failed to load trace: {exc}") from exc
    else:
        try:
            truth_cof, _ = load_truth_csv(config.truth)
        except (OSError, ValueError) as exc:
            raise PipelineIOError(f"failed to load truth: {exc}") from exc
        if len(truth_cof) != len(scene_cloud):
            raise PipelineIOError("truth CSV length does not match the cloud")
        filtered_truth = _map_truth_to_filtered(scene_cloud, filtered, truth_cof)
        if config.trace_start is not None and config.trace_end is not None:
            start = np.asarray(config.trace_start, dtype=float)
            end = np.asarray(config.trace_end, dtype=float)
        else:
            start, end = default_trace_chord(filtered)
        trace = synth_trace(
            filtered,
            start,
            end,
            filtered_truth,
            normal_force=config.normal_force,
            speed=config.speed,
            noise_std=config.trace_noise,
            seed=config.seed,
        )
        save_trace_csv(trace, os.path.join(config.out, "trace.csv"))

    estimates = estimate_trace(trace, config.min_normal_force)
    pairs = [(trace.samples[i], cof) for i, cof in estimates]
    annotations = associate(pairs, filtered)
    dataset = build_dataset(partition, filtered, annotations)

    background = make_background(
        scene_cloud,
        h_prior_mean=config.background_mean,
        h_prior_var=config.background_variance,
        cov_floor=config.cov_floor,
    )
    model = fit_mixture(
        dataset,
        n_materials=config.n_materials,
        background=background,
        max_iter=config.em_max_iter,
        log_lik_tol=config.em_tol,
        cov_floor=config.cov_floor,
        seed=config.seed,
    )
    field = infer_field(model, partition, filtered)

    save_cloud(
        filtered,
        os.path.join(config.out, "friction.ply"),
        friction=field.point_friction,
        variance=field.point_variance,
    )
    model.save_json(os.path.join(config.out, "model.json"))
    histogram = density_histogram(field, config.bin_width)
    write_density_csv(histogram, os.path.join(config.out, "density.csv"))
    _write_regions_csv(
        os.path.join(config.out, "regions.csv"), partition, dataset, field
    )

    artifacts = ["friction.ply", "model.json", "density.csv", "regions.csv"]
    if config.trace is None:
        artifacts.append("trace.csv")
    config_dict = asdict(config)
    config_dict["crop_origin"] = list(config.crop_origin)
    write_manifest(config.out, config_dict, config.seed, artifacts)
    return {
        "out": config.out,
        "n_points": len(filtered),
        "n_regions": len(partition),
        "n_annotations": len(annotations),
        "peaks": histogram_peaks(histogram),
        "plane_normal": plane.normal.tolist(),
    }


def write_density_csv(histogram, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low", "bin_high", "count"])
        for low, high, count in histogram.rows():
            writer.writerow([repr(low), repr(high), count])


def _write_regions_csv(path, partition, dataset, field) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["region_id", "point_count", "mean_r", "mean_g", "mean_b", "friction", "variance", "explored"]
        )
        for region in partition.regions:
            writer.writerow(
                [
                    region.id,
                    len(region),
                    repr(float(region.mean_color[0])),
                    repr(float(region.mean_color[1])),
                    repr(float(region.mean_color[2])),
                    repr(float(field.region_friction[region.id])),
                    repr(float(field.region_variance[region.id])),
                    int(dataset.is_explored(region.id)),
                ]
            )


def load_regions_csv(path) -> dict:
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    return {
        "friction": np.array([float(r["friction"]) for r in rows]),
        "variance": np.array([float(r["variance"]) for r in rows]),
        "explored": np.array([bool(int(r["explored"])) for r in rows]),
    }


def run_repeat(config: PipelineConfig, runs: int) -> dict:
    """Run the pipeline `runs` times with consecutive seeds; summarize peaks."""
    if runs < 2:
        raise ConfigError("repeat needs runs >= 2")
    config.validate()
    os.makedirs(config.out, exist_ok=True)
    per_run = []
    for r in range(runs):
        sub = PipelineConfig(**{**asdict(config), "seed": config.seed + r,
                                "out": os.path.join(config.out, f"run_{r:03d}")})
        try:
            summary = run_pipeline(sub)
        except Exception as exc:
            raise type(exc)(f"run {r} failed: {exc}") from exc
        per_run.append({"run": r, "seed": sub.seed, "peaks": summary["peaks"]})
    payload = {
        "runs": runs,
        "bin_width": config.bin_width,
        "per_run": per_run,
        "peak_counts": [len(entry["peaks"]) for entry in per_run],
    }
    with open(os.path.join(config.out, "summary.json"), "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return payload


def run_grasp(
    friction_ply,
    mesh_path,
    out_dir,
    count: int = 200,
    top_k: int = 5,
    seed: int = 0,
    cone_edges: int = 8,
    uniform_friction: float | None = None,
    gripper: GripperGeometry = GripperGeometry(),
) -> dict:
    """Transfer friction onto a mesh, sample antipodal grasps, rank, and export."""
    if count < 1:
        raise ConfigError("count must be >= 1")
    if top_k < 1:
        raise ConfigError("top_k must be >= 1")
    for path in (friction_ply, mesh_path):
        if not os.path.isfile(path):
            raise PipelineIOError(f"input file not found: {path}")
    os.makedirs(out_dir, exist_ok=True)
    try:
        cloud, friction, _ = load_friction_cloud(friction_ply)
        mesh = load_mesh(mesh_path)
    except (OSError, ValueError) as exc:
        raise PipelineIOError(f"failed to load inputs: {exc}") from exc
    if uniform_friction is not None:
        mesh = mesh.with_face_friction(np.full(mesh.n_faces, float(uniform_friction)))
    else:
        if friction is None:
            raise PipelineIOError("friction PLY has no friction property")
        mesh = assign_face_friction(mesh, cloud, friction)
    candidates = sample_antipodal(mesh, count=count, seed=seed)
    ranked = rank_grasps(candidates, mesh, gripper=gripper, cone_edges=cone_edges, top_k=top_k)
    payload = [
        {
            "contact_a": candidate.contact_a.point.tolist(),
            "contact_b": candidate.contact_b.point.tolist(),
            "approach": candidate.approach_vector.tolist(),
            "quality": score.quality,
        }
        for candidate, score in ranked
    ]
    with open(os.path.join(out_dir, "grasps.json"), "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    config_dict = {
        "friction_ply": str(friction_ply),
        "mesh": str(mesh_path),
        "count": count,
        "top_k": top_k,
        "seed": seed,
        "cone_edges": cone_edges,
        "uniform_friction": uniform_friction,
    }
    write_manifest(out_dir, config_dict, seed, ["grasps.json"])
    return {
        "out": out_dir,
        "accepted": len(candidates),
        "ranked": len(ranked),
        "top_quality": max((s.quality for _, s in ranked), default=0.0),
    }
