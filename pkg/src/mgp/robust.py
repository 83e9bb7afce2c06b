"""RANSAC consensus wrapper around the Q-method attitude estimator.

Wrong-fix baselines are metre-level gross errors, not noise, so the plain
weighted solve tilts under them. The wrapper samples minimal two-baseline
subsets, scores each candidate rotation by how many full-length baselines it
reproduces within the inlier threshold, and refits on the winning consensus
set. Observations flagged non-fixed never enter the candidate pool; they are
reported as outliers directly.

Sampling is deterministic for a given seed: hypothesis draws come from one
``numpy`` Generator in a fixed order, and degenerate (near-collinear) pairs
consume resample budget without consuming iterations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attitude import (
    AttitudeSolution,
    VectorObservation,
    _max_eigenpair_raw,
    estimate_attitude,
)
from .core import UnitQuaternion, rotate
from .errors import DegenerateGeometryError, InsufficientDataError, ValidationError

# Sampled body-baseline pairs separated by less than this angle are rejected
# as degenerate before the eigen solve.
MIN_PAIR_ANGLE_DEG = 5.0
# Degenerate draws are retried up to this multiple of max_iterations.
RESAMPLE_BUDGET_FACTOR = 10


@dataclass(frozen=True)
class RansacParams:
    """Tuning for the consensus search.

    ``inlier_threshold_m`` applies to the full-length baseline residual in
    metres. ``min_inliers`` is the consensus size below which the epoch is
    declared unavailable rather than trusted.
    """

    min_sample: int = 2
    max_iterations: int = 100
    inlier_threshold_m: float = 0.05
    min_inliers: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.min_sample != 2:
            raise ValidationError("minimal sample size is fixed at 2 baselines")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")
        if not (self.inlier_threshold_m > 0.0):
            raise ValidationError("inlier_threshold_m must be positive")
        if self.min_inliers < self.min_sample:
            raise ValidationError("min_inliers cannot be below the sample size")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")


@dataclass(frozen=True)
class RobustAttitudeResult:
    """Consensus outcome for one epoch.

    ``solution.available`` is False when the best consensus set stayed below
    ``min_inliers``. Inlier and outlier pair sets partition the input
    observations; every non-fixed observation lands in the outlier set.
    """

    solution: AttitudeSolution
    inlier_pairs: frozenset[tuple[int, int]]
    outlier_pairs: frozenset[tuple[int, int]]
    iterations_used: int


def baseline_residual(obs: VectorObservation, q_eb: UnitQuaternion) -> float:
    """Full-length residual ``|| v - R(q_eb) w ||`` in metres."""
    predicted = rotate(q_eb, obs.w)
    return (obs.v - predicted).norm()


def _davenport_k2(
    v0: tuple[float, float, float],
    w0: tuple[float, float, float],
    a0: float,
    v1: tuple[float, float, float],
    w1: tuple[float, float, float],
    a1: float,
) -> list[list[float]]:
    """Two-observation Davenport matrix without array dispatch overhead."""
    b00 = a0 * w0[0] * v0[0] + a1 * w1[0] * v1[0]
    b01 = a0 * w0[0] * v0[1] + a1 * w1[0] * v1[1]
    b02 = a0 * w0[0] * v0[2] + a1 * w1[0] * v1[2]
    b10 = a0 * w0[1] * v0[0] + a1 * w1[1] * v1[0]
    b11 = a0 * w0[1] * v0[1] + a1 * w1[1] * v1[1]
    b12 = a0 * w0[1] * v0[2] + a1 * w1[1] * v1[2]
    b20 = a0 * w0[2] * v0[0] + a1 * w1[2] * v1[0]
    b21 = a0 * w0[2] * v0[1] + a1 * w1[2] * v1[1]
    b22 = a0 * w0[2] * v0[2] + a1 * w1[2] * v1[2]
    tr = b00 + b11 + b22
    z0 = b21 - b12
    z1 = b02 - b20
    z2 = b10 - b01
    return [
        [2.0 * b00 - tr, b01 + b10, b02 + b20, z0],
        [b01 + b10, 2.0 * b11 - tr, b12 + b21, z1],
        [b02 + b20, b12 + b21, 2.0 * b22 - tr, z2],
        [z0, z1, z2, tr],
    ]


def _rot_be_from_raw(q: tuple[float, float, float, float]) -> np.ndarray:
    """Body->ENU rotation from a raw ENU->body eigenvector (transpose of R(q))."""
    x, y, z, w = q
    n = math.sqrt(x * x + y * y + z * z + w * w)
    x, y, z, w = x / n, y / n, z / n, w / n
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    # R(q) maps ENU->body here; return its transpose (body->ENU).
    return np.array(
        [
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy + wz), 2.0 * (xz - wy)],
            [2.0 * (xy - wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz + wx)],
            [2.0 * (xz + wy), 2.0 * (yz - wx), 1.0 - 2.0 * (xx + yy)],
        ]
    )


def ransac_attitude(
    observations: list[VectorObservation], params: RansacParams
) -> RobustAttitudeResult:
    """Consensus attitude over baseline observations.

    Raises InsufficientDataError when fewer than two fixed observations
    exist, and DegenerateGeometryError when every sampled pair within the
    resample budget was near-collinear.
    """
    if len(observations) < params.min_sample:
        raise InsufficientDataError("RANSAC needs at least 2 baseline observations")
    candidates = [o for o in observations if o.fixed]
    m = len(candidates)
    if m < params.min_sample:
        raise InsufficientDataError("RANSAC needs at least 2 fixed baseline observations")

    vs = np.array([o.v.as_array() for o in candidates])
    ws = np.array([o.w.as_array() for o in candidates])
    v_len = np.linalg.norm(vs, axis=1)
    w_len = np.linalg.norm(ws, axis=1)
    vs_hat = vs / v_len[:, None]
    ws_hat = ws / w_len[:, None]
    vs_t = [tuple(map(float, row)) for row in vs_hat]
    ws_t = [tuple(map(float, row)) for row in ws_hat]
    wl_t = [float(x) for x in w_len]
    min_cross = math.sin(math.radians(MIN_PAIR_ANGLE_DEG))

    rng = np.random.default_rng(params.seed)
    budget = RESAMPLE_BUDGET_FACTOR * params.max_iterations
    cache: dict[tuple[int, int], tuple[np.ndarray, int, float]] = {}
    best: tuple[int, float, np.ndarray] | None = None
    iterations = 0
    draws = 0
    while iterations < params.max_iterations and draws < budget:
        draws += 1
        i = int(rng.integers(0, m))
        j = int(rng.integers(0, m))
        if i == j:
            continue
        wi = ws_t[i]
        wj = ws_t[j]
        cx = wi[1] * wj[2] - wi[2] * wj[1]
        cy = wi[2] * wj[0] - wi[0] * wj[2]
        cz = wi[0] * wj[1] - wi[1] * wj[0]
        if math.sqrt(cx * cx + cy * cy + cz * cz) < min_cross:
            continue
        iterations += 1
        key = (i, j) if i < j else (j, i)
        hit = cache.get(key)
        if hit is None:
            p0, p1 = key
            a0 = wl_t[p0] / (wl_t[p0] + wl_t[p1])
            k4 = _davenport_k2(
                vs_t[p0], ws_t[p0], a0,
                vs_t[p1], ws_t[p1], 1.0 - a0,
            )
            try:
                _, q_raw = _max_eigenpair_raw(k4)
            except DegenerateGeometryError:
                # Angle screening above makes this unreachable in practice;
                # treat it as a wasted iteration with no consensus.
                cache[key] = (np.zeros(m, dtype=bool), 0, math.inf)
                continue
            r_eb = _rot_be_from_raw(q_raw)
            res = np.linalg.norm(vs - ws @ r_eb.T, axis=1)
            mask = res <= params.inlier_threshold_m
            hit = (mask, int(mask.sum()), float(res[mask].sum()))
            cache[key] = hit
        mask, count, sres = hit
        if best is None or count > best[0] or (count == best[0] and sres < best[1]):
            best = (count, sres, mask)

    if best is None:
        raise DegenerateGeometryError(
            "no non-degenerate baseline pair found within the resample budget"
        )

    count, _, mask = best
    all_pairs = frozenset(o.antenna_pair for o in observations)
    if count >= params.min_inliers:
        inlier_obs = [candidates[i] for i in range(m) if mask[i]]
        solution = estimate_attitude(inlier_obs)
        inliers = frozenset(o.antenna_pair for o in inlier_obs)
    else:
        solution = AttitudeSolution.unavailable()
        inliers = frozenset()
    return RobustAttitudeResult(
        solution=solution,
        inlier_pairs=inliers,
        outlier_pairs=all_pairs - inliers,
        iterations_used=iterations,
    )
