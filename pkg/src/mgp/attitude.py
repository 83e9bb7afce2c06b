"""Attitude from GNSS baseline vectors via the Davenport Q-method.

Each relatively-positioned antenna pair contributes one vector observation:
the measured baseline ``v`` in ENU and the known rigid-body baseline ``w``
in body coordinates. The optimal rotation minimizes the weighted loss

    L(R) = 0.5 * sum_i a_i * || v_hat_i - R w_hat_i ||^2

which is equivalent to maximizing the gain ``g = 1 - L = q^T K q`` over unit
quaternions, so the answer is the dominant eigenvector of the symmetric 4x4
Davenport matrix ``K``. Weights follow baseline length: longer baselines
carry proportionally more angular information for the same carrier-phase
noise.

The eigen solve is a fixed-size cyclic Jacobi iteration rather than a
general-purpose library call; the RANSAC wrapper evaluates it hundreds of
times per epoch and the 4x4 case needs no pivot heuristics, shifts, or
workspace allocation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import UnitQuaternion, Vec3
from .errors import DegenerateGeometryError, InsufficientDataError, ValidationError

# Distinct eigenvalues closer than this leave the maximizing quaternion
# direction numerically undetermined.
EIGEN_GAP_TOL = 1e-9

_JACOBI_SWEEPS = 50
_JACOBI_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class VectorObservation:
    """One baseline measurement: ENU vector ``v`` against body vector ``w``.

    ``antenna_pair`` is the ordered (from, to) pair of 1-based antenna ids;
    ``fixed`` records whether both endpoint solutions were ambiguity-fixed.
    Non-fixed observations are carried for bookkeeping but excluded from
    estimation.
    """

    v: Vec3
    w: Vec3
    antenna_pair: tuple[int, int]
    fixed: bool = True

    def __post_init__(self) -> None:
        if self.v.norm() <= 0.0 or self.w.norm() <= 0.0:
            raise ValidationError("baseline vectors must have positive length")
        a, b = self.antenna_pair
        if a == b:
            raise ValidationError("antenna pair must reference two distinct antennas")


@dataclass(frozen=True)
class AttitudeSolution:
    """Result of one attitude solve.

    ``q`` maps body to ENU. ``lambda_max`` is the dominant eigenvalue of the
    Davenport matrix (at most the weight sum, with equality only for a
    perfectly consistent observation set).
    """

    available: bool
    q: UnitQuaternion | None = None
    lambda_max: float | None = None
    weights_sum: float | None = None
    used_observations: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.available and self.q is None:
            raise ValidationError("available solution requires a quaternion")
        if not self.available and self.q is not None:
            raise ValidationError("unavailable solution cannot carry a quaternion")
        if self.lambda_max is not None and self.weights_sum is not None:
            if self.lambda_max > self.weights_sum + 1e-9:
                raise ValidationError(
                    f"gain {self.lambda_max!r} exceeds the weight sum {self.weights_sum!r}"
                )

    @classmethod
    def unavailable(cls) -> "AttitudeSolution":
        return cls(available=False)


def baseline_weights(observations: Sequence[VectorObservation]) -> list[float]:
    """Normalized weights ``a_i = |w_i| / sum_j |w_j|`` (sum to one)."""
    if not observations:
        raise InsufficientDataError("no observations to weight")
    lengths = [o.w.norm() for o in observations]
    total = sum(lengths)
    return [ln / total for ln in lengths]


def davenport_matrix(
    observations: Sequence[VectorObservation], weights: Sequence[float]
) -> np.ndarray:
    """Symmetric 4x4 gain matrix ``K`` with ``q^T K q = sum_i a_i w_hat_i . R(q) v_hat_i``.

    Directions are unit-normalized here, so callers pass raw baseline
    vectors. The dominant eigenvector of ``K`` is the ENU-to-body rotation
    (the inverse of the stored attitude).
    """
    if len(observations) < 2:
        raise InsufficientDataError("attitude needs at least 2 baseline observations")
    if len(weights) != len(observations):
        raise ValidationError("one weight required per observation")
    vs = np.array([o.v.as_array() for o in observations])
    ws = np.array([o.w.as_array() for o in observations])
    a = np.asarray(weights, dtype=np.float64)
    vs /= np.linalg.norm(vs, axis=1)[:, None]
    ws /= np.linalg.norm(ws, axis=1)[:, None]
    return _davenport_k(vs, ws, a)


def _davenport_k(vs_hat: np.ndarray, ws_hat: np.ndarray, a: np.ndarray) -> np.ndarray:
    b = (ws_hat * a[:, None]).T @ vs_hat
    tr = b[0, 0] + b[1, 1] + b[2, 2]
    k = np.empty((4, 4), dtype=np.float64)
    k[:3, :3] = b + b.T
    k[0, 0] -= tr
    k[1, 1] -= tr
    k[2, 2] -= tr
    # Off-diagonal sign makes q^T K q the gain under the rotation convention
    # R(q) v rather than the transposed (frame-transform) convention.
    z0 = b[2, 1] - b[1, 2]
    z1 = b[0, 2] - b[2, 0]
    z2 = b[1, 0] - b[0, 1]
    k[0, 3] = k[3, 0] = z0
    k[1, 3] = k[3, 1] = z1
    k[2, 3] = k[3, 2] = z2
    k[3, 3] = tr
    return k


def _jacobi_eigh4(rows: list[list[float]]) -> tuple[list[float], list[list[float]]]:
    """Cyclic Jacobi diagonalization of a symmetric 4x4 matrix.

    Returns eigenvalues and eigenvector columns (``vecs[r][c]`` is row r of
    eigenvector c). Plain-float inner loops: this sits inside the RANSAC
    hypothesis loop where array dispatch overhead dominates at this size.
    """
    a = [list(map(float, row)) for row in rows]
    v = [[1.0 if i == j else 0.0 for j in range(4)] for i in range(4)]
    scale = max(1.0, max(abs(a[i][j]) for i in range(4) for j in range(4)))
    stop = (1e-15 * scale) ** 2
    for _ in range(_JACOBI_SWEEPS):
        off = 0.0
        for p, q in _JACOBI_PAIRS:
            off += a[p][q] * a[p][q]
        if off <= stop:
            break
        for p, q in _JACOBI_PAIRS:
            apq = a[p][q]
            if apq == 0.0:
                continue
            theta = 0.5 * (a[q][q] - a[p][p]) / apq
            t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
            if theta < 0.0:
                t = -t
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            tau = s / (1.0 + c)
            app = a[p][p]
            aqq = a[q][q]
            a[p][p] = app - t * apq
            a[q][q] = aqq + t * apq
            a[p][q] = 0.0
            a[q][p] = 0.0
            for r in range(4):
                if r == p or r == q:
                    continue
                arp = a[r][p]
                arq = a[r][q]
                a[r][p] = arp - s * (arq + tau * arp)
                a[p][r] = a[r][p]
                a[r][q] = arq + s * (arp - tau * arq)
                a[q][r] = a[r][q]
            for r in range(4):
                vrp = v[r][p]
                vrq = v[r][q]
                v[r][p] = vrp - s * (vrq + tau * vrp)
                v[r][q] = vrq + s * (vrp - tau * vrq)
    vals = [a[0][0], a[1][1], a[2][2], a[3][3]]
    return vals, v


def _max_eigenpair_raw(
    rows: list[list[float]],
) -> tuple[float, tuple[float, float, float, float]]:
    vals, vecs = _jacobi_eigh4(rows)
    order = sorted(range(4), key=lambda i: vals[i], reverse=True)
    top = order[0]
    gap = vals[top] - vals[order[1]]
    if gap < EIGEN_GAP_TOL:
        raise DegenerateGeometryError(
            f"dominant eigenvalue separated by only {gap:.3e}; geometry is degenerate"
        )
    q = (vecs[0][top], vecs[1][top], vecs[2][top], vecs[3][top])
    return vals[top], q


def solve_max_eigenpair(k: np.ndarray) -> tuple[float, UnitQuaternion]:
    """Dominant eigenpair of a symmetric 4x4 matrix.

    Raises DegenerateGeometryError when the top two eigenvalues are closer
    than EIGEN_GAP_TOL, which is how unobservable (collinear-baseline)
    geometry manifests.
    """
    k = np.asarray(k, dtype=np.float64)
    if k.shape != (4, 4):
        raise ValidationError("K must be 4x4")
    if not np.allclose(k, k.T, atol=1e-9 * max(1.0, float(np.max(np.abs(k))))):
        raise ValidationError("K must be symmetric")
    k = 0.5 * (k + k.T)
    lam, q = _max_eigenpair_raw(k.tolist())
    return lam, UnitQuaternion.from_array(np.array(q))


def estimate_attitude(observations: Iterable[VectorObservation]) -> AttitudeSolution:
    """Weighted Q-method attitude from the fixed observations.

    The eigen solve yields the ENU-to-body quaternion; the returned solution
    stores its conjugate so ``q`` rotates body vectors into ENU.
    """
    fixed = [o for o in observations if o.fixed]
    if len(fixed) < 2:
        raise InsufficientDataError("attitude needs at least 2 fixed baseline observations")
    weights = baseline_weights(fixed)
    k = davenport_matrix(fixed, weights)
    lam, q_be = _max_eigenpair_raw(k.tolist())
    q_eb = UnitQuaternion.from_array(np.array((-q_be[0], -q_be[1], -q_be[2], q_be[3])))
    return AttitudeSolution(
        available=True,
        q=q_eb,
        lambda_max=lam,
        weights_sum=sum(weights),
        used_observations=tuple(o.antenna_pair for o in fixed),
    )
