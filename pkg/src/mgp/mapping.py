"""Direct georeferencing of scanner returns and reflector-based evaluation.

A scan point measured in the scanner frame reaches world (ENU) coordinates
through the rigid chain

    p_world = pose.p + R_eb * (lever_arm + R_boresight * p_scan)

using the platform pose nearest in time to the pulse. No pose interpolation
is applied: a pulse with no pose within ``max_pose_gap_s`` is dropped and
counted. Accuracy is evaluated against surveyed reflector discs by
truth-seeded clustering: flagged returns within a fixed radius of each known
reflector position are averaged and compared against it.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import UnitQuaternion, Vec3, quat_to_matrix
from .errors import InputError, ValidationError

# Half the 10 Hz pose interval: a pulse further than this from every pose
# epoch has no usable pose.
DEFAULT_MAX_POSE_GAP_S = 0.06
DEFAULT_CLUSTER_RADIUS_M = 0.5
DEFAULT_MIN_HITS = 10


@dataclass(frozen=True)
class Pose:
    """Platform pose at one epoch: ENU position and body->ENU attitude."""

    t: float
    p: Vec3
    q: UnitQuaternion

    def __post_init__(self) -> None:
        if not math.isfinite(self.t):
            raise ValidationError("pose timestamp must be finite")


@dataclass(frozen=True)
class MountCalibration:
    """Scanner mounting: body-frame lever arm and scanner->body boresight."""

    lever_arm: Vec3 = Vec3(0.0, 0.0, 0.0)
    boresight: UnitQuaternion = field(default_factory=UnitQuaternion.identity)


@dataclass(frozen=True)
class ScanPulse:
    """One range return in the scanner frame; ``reflector`` is a truth label."""

    t: float
    p: Vec3
    reflector: bool = False


@dataclass(frozen=True)
class ScanFrame:
    """One scanner revolution's worth of pulses."""

    t: float
    pulses: tuple[ScanPulse, ...]


@dataclass(frozen=True)
class GeoPoint:
    """A world-frame (ENU) cloud point."""

    p: Vec3
    t: float
    reflector_flag: bool = False


@dataclass(frozen=True)
class ReflectorResult:
    """Association outcome for one surveyed reflector."""

    truth: Vec3
    error: Vec3 | None
    n_hits: int
    resolved: bool


@dataclass(frozen=True)
class ReflectorReport:
    """Cloud accuracy against surveyed reflectors.

    RMS values cover resolved reflectors only; ``unresolved`` counts the
    reflectors excluded for having fewer than the required hits.
    """

    per_reflector: tuple[ReflectorResult, ...]
    rms_horizontal_m: float | None
    rms_vertical_m: float | None
    unresolved: int


def georeference(pose: Pose, calib: MountCalibration, scan_point: Vec3) -> GeoPoint:
    """Transform one scanner-frame point to world coordinates."""
    r_eb = quat_to_matrix(pose.q).as_array()
    r_bs = quat_to_matrix(calib.boresight).as_array()
    body = calib.lever_arm.as_array() + r_bs @ scan_point.as_array()
    world = pose.p.as_array() + r_eb @ body
    return GeoPoint(p=Vec3.from_array(world), t=pose.t)


def georeference_stream(
    poses: Sequence[Pose],
    frames: Iterable[ScanFrame],
    calib: MountCalibration,
    max_pose_gap_s: float = DEFAULT_MAX_POSE_GAP_S,
) -> tuple[list[GeoPoint], int]:
    """Georeference every pulse against its nearest-in-time pose.

    Returns the cloud and the count of pulses dropped for having no pose
    within ``max_pose_gap_s``. Poses must be strictly increasing in time.
    """
    if not poses:
        raise ValidationError("no poses supplied")
    if not (max_pose_gap_s > 0.0):
        raise ValidationError("max_pose_gap_s must be positive")
    times = np.array([p.t for p in poses], dtype=np.float64)
    if np.any(np.diff(times) <= 0.0):
        raise ValidationError("pose timestamps must be strictly increasing")

    pulse_t: list[float] = []
    pulse_p: list[tuple[float, float, float]] = []
    pulse_flag: list[bool] = []
    for frame in frames:
        for pulse in frame.pulses:
            pulse_t.append(pulse.t)
            pulse_p.append((pulse.p.x, pulse.p.y, pulse.p.z))
            pulse_flag.append(pulse.reflector)
    if not pulse_t:
        return [], 0

    ts = np.asarray(pulse_t)
    pts = np.asarray(pulse_p)
    # nearest pose per pulse: candidate just below and just above
    hi = np.clip(np.searchsorted(times, ts), 0, len(times) - 1)
    lo = np.clip(hi - 1, 0, len(times) - 1)
    pick_hi = np.abs(times[hi] - ts) <= np.abs(times[lo] - ts)
    nearest = np.where(pick_hi, hi, lo)
    gap = np.abs(times[nearest] - ts)
    keep = gap <= max_pose_gap_s
    dropped = int((~keep).sum())

    r_bs = quat_to_matrix(calib.boresight).as_array()
    lever = calib.lever_arm.as_array()
    body = pts @ r_bs.T + lever

    world = np.empty_like(body)
    for j in np.unique(nearest[keep]):
        mask = keep & (nearest == j)
        r_eb = quat_to_matrix(poses[j].q).as_array()
        world[mask] = body[mask] @ r_eb.T + poses[j].p.as_array()

    cloud = [
        GeoPoint(p=Vec3(float(w[0]), float(w[1]), float(w[2])), t=float(t), reflector_flag=bool(f))
        for w, t, f, k in zip(world, ts, pulse_flag, keep)
        if k
    ]
    return cloud, dropped


def evaluate_reflectors(
    cloud: Sequence[GeoPoint],
    truth_reflectors: Sequence[Vec3],
    cluster_radius_m: float = DEFAULT_CLUSTER_RADIUS_M,
    min_hits: int = DEFAULT_MIN_HITS,
) -> ReflectorReport:
    """Compare flagged cloud points against surveyed reflector positions.

    Each reflector's estimate is the centroid of flagged points within
    ``cluster_radius_m`` of its surveyed position; reflectors with fewer
    than ``min_hits`` such points are reported unresolved and excluded from
    the RMS figures.
    """
    if not truth_reflectors:
        raise ValidationError("no reflectors to evaluate")
    if not (cluster_radius_m > 0.0):
        raise ValidationError("cluster_radius_m must be positive")
    if min_hits < 1:
        raise ValidationError("min_hits must be at least 1")

    flagged = np.array(
        [g.p.as_array() for g in cloud if g.reflector_flag], dtype=np.float64
    ).reshape(-1, 3)
    results: list[ReflectorResult] = []
    sq_h: list[float] = []
    sq_v: list[float] = []
    for truth in truth_reflectors:
        if flagged.shape[0]:
            d = flagged - truth.as_array()
            mask = np.einsum("ij,ij->i", d, d) <= cluster_radius_m**2
            n_hits = int(mask.sum())
        else:
            n_hits = 0
        if n_hits < min_hits:
            results.append(ReflectorResult(truth=truth, error=None, n_hits=n_hits, resolved=False))
            continue
        centroid = flagged[mask].mean(axis=0)
        err = Vec3.from_array(centroid - truth.as_array())
        results.append(ReflectorResult(truth=truth, error=err, n_hits=n_hits, resolved=True))
        sq_h.append(err.x**2 + err.y**2)
        sq_v.append(err.z**2)
    rms_h = math.sqrt(sum(sq_h) / len(sq_h)) if sq_h else None
    rms_v = math.sqrt(sum(sq_v) / len(sq_v)) if sq_v else None
    return ReflectorReport(
        per_reflector=tuple(results),
        rms_horizontal_m=rms_h,
        rms_vertical_m=rms_v,
        unresolved=sum(1 for r in results if not r.resolved),
    )


_BIN_RECORD = struct.Struct("<dddB")


def write_cloud(path: str | Path, cloud: Sequence[GeoPoint]) -> None:
    """Write a cloud file; format chosen by extension (.xyz ASCII, .bin binary)."""
    path = Path(path)
    if path.suffix == ".xyz":
        with open(path, "w") as fh:
            for g in cloud:
                fh.write(f"{g.p.x!r} {g.p.y!r} {g.p.z!r} {int(g.reflector_flag)}\n")
    elif path.suffix == ".bin":
        with open(path, "wb") as fh:
            for g in cloud:
                fh.write(_BIN_RECORD.pack(g.p.x, g.p.y, g.p.z, int(g.reflector_flag)))
    else:
        raise InputError(f"unsupported cloud extension {path.suffix!r} (use .xyz or .bin)")


def read_cloud(path: str | Path) -> list[GeoPoint]:
    """Read a cloud written by :func:`write_cloud`. Timestamps are not stored."""
    path = Path(path)
    cloud: list[GeoPoint] = []
    if path.suffix == ".xyz":
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if len(parts) != 4:
                    raise InputError(f"{path}:{lineno}: expected 'E N U flag'")
                try:
                    e, n, u = (float(p) for p in parts[:3])
                    flag = int(parts[3])
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: {exc}") from exc
                cloud.append(GeoPoint(p=Vec3(e, n, u), t=0.0, reflector_flag=bool(flag)))
    elif path.suffix == ".bin":
        data = path.read_bytes()
        if len(data) % _BIN_RECORD.size:
            raise InputError(f"{path}: truncated binary cloud record")
        for off in range(0, len(data), _BIN_RECORD.size):
            e, n, u, flag = _BIN_RECORD.unpack_from(data, off)
            cloud.append(GeoPoint(p=Vec3(e, n, u), t=0.0, reflector_flag=bool(flag)))
    else:
        raise InputError(f"unsupported cloud extension {path.suffix!r} (use .xyz or .bin)")
    return cloud
