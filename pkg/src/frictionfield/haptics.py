"""Sliding-contact friction estimation and a bristle-model simulation oracle.

Per-contact friction comes from the ratio of tangential to normal force at a
sliding contact. The bristle (LuGre-type) simulator provides dynamic traces
for comparing that pointwise estimator against a reference friction model,
and `synth_trace` stands in for a robot dragging a force-sensing finger along
a linear path over a cloud with known per-point friction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud
from .validation import ensure_rng, require_positive

TRACE_RATE_HZ = 100.0
DEFAULT_MIN_NORMAL_FORCE = 0.5
TRACE_CSV_HEADER = ("time", "x", "y", "z", "fx", "fy", "fz")


class DegenerateContactError(ValueError):
    """Normal force below the validity gate: free-air or grazing contact."""


class IntegrationError(RuntimeError):
    """The friction simulation produced a non-finite state."""


@dataclass(frozen=True)
class ContactSample:
    """One timestamped contact: position in the cloud frame, force in contact frame.

    Force components are (f_x, f_y) tangential and f_z normal, in newtons.
    """

    time: float
    contact_position: tuple
    force: tuple

    def __post_init__(self):
        if not (math.isfinite(self.time) and self.time >= 0.0):
            raise ValueError(f"sample time must be finite and non-negative, got {self.time}")
        object.__setattr__(self, "contact_position", tuple(float(v) for v in self.contact_position))
        object.__setattr__(self, "force", tuple(float(v) for v in self.force))
        if len(self.contact_position) != 3 or len(self.force) != 3:
            raise ValueError("contact_position and force must be 3-vectors")


@dataclass(frozen=True)
class HapticTrace:
    """Time-ordered contact samples with strictly increasing timestamps."""

    samples: tuple = field(default_factory=tuple)

    def __post_init__(self):
        samples = tuple(self.samples)
        times = [s.time for s in samples]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("trace timestamps must be strictly increasing")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def positions(self) -> np.ndarray:
        return np.array([s.contact_position for s in self.samples], dtype=float).reshape(-1, 3)


@dataclass(frozen=True)
class LuGreParams:
    """Bristle-model parameters; mu_s >= mu_c and all values positive.

    sigma0: bristle stiffness [N/m], sigma1: bristle damping [N s/m],
    sigma2: viscous coefficient [N s/m], v_s: Stribeck velocity [m/s].
    """

    sigma0: float = 1.0e5
    sigma1: float = 316.0
    sigma2: float = 0.4
    mu_c: float = 0.2
    mu_s: float = 0.4
    v_s: float = 0.01

    def __post_init__(self):
        for name in ("sigma0", "mu_c", "mu_s", "v_s"):
            require_positive(getattr(self, name), name)
        for name in ("sigma1", "sigma2"):  # zero damping/viscosity is a valid regime
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.mu_s < self.mu_c:
            raise ValueError("mu_s must be >= mu_c")


@dataclass(frozen=True)
class PointAnnotation:
    """A friction coefficient attached to one cloud point."""

    point_index: int
    friction: float

    def __post_init__(self):
        if self.friction < 0.0 or not math.isfinite(self.friction):
            raise ValueError(f"friction must be finite and >= 0, got {self.friction}")


def coulomb_cof(sample: ContactSample, min_normal_force: float = DEFAULT_MIN_NORMAL_FORCE) -> float:
    """Friction coefficient ||(f_x, f_y)|| / |f_z| of one sliding contact."""
    fx, fy, fz = sample.force
    if abs(fz) < min_normal_force:
        raise DegenerateContactError(
            f"normal force {abs(fz):.4g} N below gate {min_normal_force:.4g} N"
        )
    return math.hypot(fx, fy) / abs(fz)


def estimate_trace(
    trace: HapticTrace, min_normal_force: float = DEFAULT_MIN_NORMAL_FORCE
) -> list[tuple[int, float]]:
    """Pointwise friction estimates as (sample index, c.o.f.), in trace order.

    Samples failing the normal-force gate are skipped silently.
    """
    out = []
    for i, sample in enumerate(trace):
        try:
            out.append((i, coulomb_cof(sample, min_normal_force)))
        except DegenerateContactError:
            continue
    return out


def _bristle_restoring(v: float, z: float, p: LuGreParams, normal_force: float) -> float:
    f_c = p.mu_c * normal_force
    f_s = p.mu_s * normal_force
    g = f_c + (f_s - f_c) * math.exp(-((v / p.v_s) ** 2))
    return v - p.sigma0 * abs(v) * z / g


def simulate_lugre(
    params: LuGreParams,
    velocity_profile,
    normal_force: float,
    dt: float = 1e-4,
) -> HapticTrace:
    """Integrate the bristle friction dynamics along a sliding-speed profile.

    The internal bristle state z follows dz/dt = v - sigma0 |v| z / g(v) with
    g(v) = F_c + (F_s - F_c) exp(-(v/v_s)^2); the emitted tangential force is
    sigma0 z + sigma1 dz/dt + sigma2 v. Integration is explicit 4th-order
    Runge-Kutta at step dt, with the speed profile interpolated linearly
    between its samples. One ContactSample is emitted per profile entry, with
    f_z equal to the (constant) normal force and the contact position moving
    along +x by the integrated sliding distance.
    """
    require_positive(dt, "dt")
    require_positive(normal_force, "normal_force")
    profile = [float(v) for v in velocity_profile]
    if not profile:
        raise ValueError("velocity profile must be non-empty")

    def v_at(k: float) -> float:
        # fractional profile index with linear interpolation, clamped at the end
        lo = int(math.floor(k))
        if lo >= len(profile) - 1:
            return profile[-1]
        frac = k - lo
        return profile[lo] * (1.0 - frac) + profile[lo + 1] * frac

    z = 0.0
    distance = 0.0
    samples = []
    for k, v in enumerate(profile):
        dz = _bristle_restoring(v, z, params, normal_force)
        f_t = params.sigma0 * z + params.sigma1 * dz + params.sigma2 * v
        if not (math.isfinite(z) and math.isfinite(f_t)):
            raise IntegrationError(
                f"non-finite state at step {k} (t={k * dt:.6g} s); try a smaller dt"
            )
        samples.append(
            ContactSample(time=k * dt, contact_position=(distance, 0.0, 0.0), force=(f_t, 0.0, normal_force))
        )
        if k == len(profile) - 1:
            break
        v_mid = v_at(k + 0.5)
        v_next = profile[k + 1]
        k1 = _bristle_restoring(v, z, params, normal_force)
        k2 = _bristle_restoring(v_mid, z + 0.5 * dt * k1, params, normal_force)
        k3 = _bristle_restoring(v_mid, z + 0.5 * dt * k2, params, normal_force)
        k4 = _bristle_restoring(v_next, z + dt * k3, params, normal_force)
        z += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        distance += 0.5 * dt * (v + v_next)
    return HapticTrace(samples=tuple(samples))


def nearest_point_indices(query_positions, cloud: PointCloud) -> np.ndarray:
    """Exact nearest cloud point per query; ties resolve to the lowest index."""
    if len(cloud) == 0:
        raise ValueError("cloud must be non-empty")
    queries = np.asarray(query_positions, dtype=float).reshape(-1, 3)
    out = np.empty(len(queries), dtype=int)
    pos = cloud.positions
    for start in range(0, len(queries), 256):
        stop = min(start + 256, len(queries))
        d2 = ((queries[start:stop, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        out[start:stop] = np.argmin(d2, axis=1)
    return out


def associate(estimates, cloud: PointCloud) -> list[PointAnnotation]:
    """Attach each (ContactSample, c.o.f.) estimate to its nearest cloud point.

    Multiple estimates may land on the same point; all are kept, in input
    order.
    """
    estimates = list(estimates)
    if not estimates:
        return []
    queries = np.array([s.contact_position for s, _ in estimates], dtype=float)
    indices = nearest_point_indices(queries, cloud)
    return [
        PointAnnotation(point_index=int(idx), friction=float(cof))
        for idx, (_, cof) in zip(indices, estimates)
    ]


def synth_trace(
    cloud: PointCloud,
    path_start,
    path_end,
    friction_map,
    normal_force: float = 5.0,
    speed: float = 0.02,
    noise_std: float = 0.0,
    seed=0,
) -> HapticTrace:
    """Simulate a linear sliding exploration over a cloud with known friction.

    Contact positions are sampled along the segment at 100 Hz; each sample
    takes the ground-truth c.o.f. of its nearest cloud point and emits force
    (mu F_n + noise F_n, 0, F_n).
    """
    require_positive(speed, "speed")
    require_positive(normal_force, "normal_force")
    start = np.asarray(path_start, dtype=float).reshape(3)
    end = np.asarray(path_end, dtype=float).reshape(3)
    length = float(np.linalg.norm(end - start))
    if length <= 0.0:
        raise ValueError("path endpoints must be distinct")
    friction_map = np.asarray(friction_map, dtype=float).reshape(-1)
    if len(friction_map) != len(cloud):
        raise ValueError("friction_map length must match the cloud")
    rng = ensure_rng(seed)
    n_samples = int(math.floor(length / speed * TRACE_RATE_HZ)) + 1
    times = np.arange(n_samples) / TRACE_RATE_HZ
    fractions = np.minimum(times * speed / length, 1.0)
    positions = start[None, :] + fractions[:, None] * (end - start)[None, :]
    nearest = nearest_point_indices(positions, cloud)
    noise = rng.standard_normal(n_samples) * noise_std if noise_std > 0 else np.zeros(n_samples)
    samples = []
    for k in range(n_samples):
        mu = friction_map[nearest[k]]
        fx = (mu + noise[k]) * normal_force
        samples.append(
            ContactSample(
                time=float(times[k]),
                contact_position=tuple(positions[k]),
                force=(fx, 0.0, normal_force),
            )
        )
    return HapticTrace(samples=tuple(samples))


def save_trace_csv(trace: HapticTrace, path) -> None:
    """Write `time,x,y,z,fx,fy,fz` rows in SI units."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_CSV_HEADER)
        for s in trace:
            writer.writerow(
                [repr(float(v)) for v in (s.time, *s.contact_position, *s.force)]
            )


def load_trace_csv(path) -> HapticTrace:
    """Read a trace written by save_trace_csv (or recorded externally)."""
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_CSV_HEADER:
            raise ValueError(f"trace CSV must start with header {','.join(TRACE_CSV_HEADER)}")
        samples = []
        for row in reader:
            if not row:
                continue
            if len(row) != 7:
                raise ValueError(f"trace CSV row {len(samples) + 2} must have 7 fields")
            t, x, y, z, fx, fy, fz = (float(v) for v in row)
            samples.append(ContactSample(time=t, contact_position=(x, y, z), force=(fx, fy, fz)))
    return HapticTrace(samples=tuple(samples))
