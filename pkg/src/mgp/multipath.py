"""Multipath detection from cross-antenna SNR disagreement.

Antennas sit within a couple of metres of each other, so a satellite seen by
direct line of sight shows nearly the same carrier SNR at every antenna. A
reflected signal interferes constructively at one mount point and
destructively at another, so its SNR scatters across the array. The
per-satellite population standard deviation

    sigma_snr = sqrt((1/N) * sum_n (SNR_n - mean)^2)

over the N antennas tracking the satellite is therefore a direct multipath
discriminator: flag the satellite when sigma_snr exceeds a threshold, given
enough antennas track it to make the statistic meaningful.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InsufficientDataError, ValidationError

SNR_MIN_DBHZ = 10.0
SNR_MAX_DBHZ = 60.0

DEFAULT_SD_THRESHOLD_DBHZ = 4.0
DEFAULT_MIN_ANTENNA_COUNT = 4


class MultipathVerdict(enum.Enum):
    """Classification of one satellite at one epoch."""

    CLEAN = "clean"
    MULTIPATH = "multipath"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SnrRow:
    """SNR of one satellite across the array; ``None`` where untracked."""

    sat_id: str
    snr_dbhz: tuple[float | None, ...]

    def __post_init__(self) -> None:
        if not self.sat_id:
            raise ValidationError("satellite id must be non-empty")
        present = [s for s in self.snr_dbhz if s is not None]
        if not present:
            raise ValidationError(f"{self.sat_id}: no antenna tracks this satellite")
        for s in present:
            if not (SNR_MIN_DBHZ <= s <= SNR_MAX_DBHZ):
                raise ValidationError(
                    f"{self.sat_id}: SNR {s} outside [{SNR_MIN_DBHZ}, {SNR_MAX_DBHZ}] dB-Hz"
                )


@dataclass(frozen=True)
class SatelliteAssessment:
    """Per-satellite detection detail."""

    sigma_snr: float | None
    n_antennas: int
    verdict: MultipathVerdict


@dataclass(frozen=True)
class MultipathReport:
    """Detection outcome for one epoch.

    ``excluded_sats`` contains exactly the satellites whose verdict is
    MULTIPATH.
    """

    per_satellite: dict[str, SatelliteAssessment]
    excluded_sats: frozenset[str]


def snr_sd(values: Sequence[float]) -> float:
    """Population standard deviation (divide by N, not N-1)."""
    if len(values) < 2:
        raise InsufficientDataError("SNR spread needs at least 2 values")
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return math.sqrt(var)


def detect_multipath(
    rows: Sequence[SnrRow],
    threshold_dbhz: float = DEFAULT_SD_THRESHOLD_DBHZ,
    min_count: int = DEFAULT_MIN_ANTENNA_COUNT,
) -> MultipathReport:
    """Classify every satellite row by its cross-antenna SNR spread.

    Satellites tracked by fewer than ``min_count`` antennas stay UNKNOWN
    (never excluded): the spread of a couple of samples says nothing. An
    empty row list yields an empty report.
    """
    if not (threshold_dbhz > 0.0):
        raise ValidationError("threshold must be positive")
    if min_count < 2:
        raise ValidationError("min_count must be at least 2")
    seen: set[str] = set()
    per_sat: dict[str, SatelliteAssessment] = {}
    excluded: set[str] = set()
    for row in rows:
        if row.sat_id in seen:
            raise ValidationError(f"duplicate SNR row for satellite {row.sat_id}")
        seen.add(row.sat_id)
        present = [s for s in row.snr_dbhz if s is not None]
        sigma = snr_sd(present) if len(present) >= 2 else None
        if len(present) < min_count:
            verdict = MultipathVerdict.UNKNOWN
        elif sigma > threshold_dbhz:
            verdict = MultipathVerdict.MULTIPATH
            excluded.add(row.sat_id)
        else:
            verdict = MultipathVerdict.CLEAN
        per_sat[row.sat_id] = SatelliteAssessment(
            sigma_snr=sigma, n_antennas=len(present), verdict=verdict
        )
    return MultipathReport(per_satellite=per_sat, excluded_sats=frozenset(excluded))
