"""Hybrid platform positioning from per-antenna GNSS solutions.

Every ambiguity-fixed antenna provides an independent centimetre-grade
position. With the platform attitude known, each one maps back to the body
origin through its lever arm, and the average over all fixed antennas is the
platform position:

    p = (1/N_fix) * sum_i (p_i - R q_i)

where ``q_i`` is the antenna's body-frame mount offset. Availability then
requires only one fixed antenna rather than one specific receiver. Float and
no-solution antennas never contribute.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import AntennaLayout, UnitQuaternion, Vec3, quat_to_matrix
from .errors import ConfigurationError, ValidationError


class FixStatus(enum.Enum):
    """Ambiguity state of one antenna's relative-positioning solution."""

    FIXED = "fixed"
    FLOAT = "float"
    NONE = "none"


@dataclass(frozen=True)
class FixSolution:
    """One antenna's epoch solution. ``p`` is ENU metres from the reference."""

    antenna_id: int
    status: FixStatus
    p: Vec3 | None = None
    sats_used: int = 0

    def __post_init__(self) -> None:
        if self.antenna_id < 1:
            raise ValidationError("antenna ids are 1-based")
        if self.status is FixStatus.NONE and self.p is not None:
            raise ValidationError("a no-solution antenna cannot carry a position")
        if self.status is not FixStatus.NONE and self.p is None:
            raise ValidationError(f"{self.status.value} solution requires a position")
        if self.sats_used < 0:
            raise ValidationError("sats_used must be nonnegative")


@dataclass(frozen=True)
class PositionSolution:
    """Platform position for one epoch.

    ``available`` is False when no fixed antenna could be mapped to the body
    origin; ``p`` is then absent.
    """

    available: bool
    p: Vec3 | None = None
    n_used: int = 0
    contributing_antennas: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.available and self.p is None:
            raise ValidationError("available position requires coordinates")
        if not self.available and self.p is not None:
            raise ValidationError("unavailable position cannot carry coordinates")
        if self.available != (self.n_used >= 1):
            raise ValidationError("available must hold exactly when n_used >= 1")
        if self.n_used != len(self.contributing_antennas):
            raise ValidationError("n_used must match the contributing antenna set")

    @classmethod
    def unavailable(cls) -> "PositionSolution":
        return cls(available=False)


def hybrid_position(
    fixes: list[FixSolution],
    attitude: UnitQuaternion | None,
    layout: AntennaLayout,
) -> PositionSolution:
    """Average body-origin position over all fixed antennas.

    Without an attitude the lever arms cannot be removed, so only an antenna
    mounted exactly at the body origin can still contribute (alone).
    """
    seen: set[int] = set()
    for f in fixes:
        if f.antenna_id in seen:
            raise ValidationError(f"duplicate solution for antenna {f.antenna_id}")
        seen.add(f.antenna_id)

    fixed = [f for f in fixes if f.status is FixStatus.FIXED]
    for f in fixed:
        if f.antenna_id > layout.antenna_count:
            raise ConfigurationError(
                f"antenna {f.antenna_id} has no layout entry (layout has "
                f"{layout.antenna_count})"
            )
    if not fixed:
        return PositionSolution.unavailable()

    if attitude is None:
        for f in fixed:
            if layout.position_of(f.antenna_id).norm() == 0.0:
                return PositionSolution(
                    available=True,
                    p=f.p,
                    n_used=1,
                    contributing_antennas=frozenset({f.antenna_id}),
                )
        return PositionSolution.unavailable()

    r_eb = quat_to_matrix(attitude).m
    acc = np.zeros(3)
    for f in fixed:
        lever = layout.position_of(f.antenna_id).as_array()
        acc += f.p.as_array() - r_eb @ lever
    mean = acc / len(fixed)
    return PositionSolution(
        available=True,
        p=Vec3.from_array(mean),
        n_used=len(fixed),
        contributing_antennas=frozenset(f.antenna_id for f in fixed),
    )
