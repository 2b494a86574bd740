"""Nominal pitch classes: eight frequency bands covering 50-800 Hz plus a
voicing/silence class.

Class index order is fixed everywhere (vectors, weight files, CSV):
index 0..7 = bands S1..S8 in ascending frequency, index 8 = V (unvoiced).
"""
from __future__ import annotations

import enum

import numpy as np

# Band edges in Hz; band i covers [BAND_EDGES_HZ[i], BAND_EDGES_HZ[i+1]).
BAND_EDGES_HZ = (50.0, 75.0, 100.0, 150.0, 200.0, 300.0, 400.0, 600.0, 800.0)

F0_MIN_HZ = BAND_EDGES_HZ[0]
F0_MAX_HZ = BAND_EDGES_HZ[-1]

NUM_CLASSES = 9  # 8 bands + voicing class


class BandLabel(enum.IntEnum):
    """One of the eight pitch bands, or V for unvoiced/silence."""

    S1 = 0
    S2 = 1
    S3 = 2
    S4 = 3
    S5 = 4
    S6 = 5
    S7 = 6
    S8 = 7
    V = 8

    @property
    def is_band(self) -> bool:
        return self != BandLabel.V


class FrequencyRangeError(ValueError):
    """f0 outside the supported [50, 800) Hz range."""


def band_of_frequency(f0_hz: float) -> BandLabel:
    """Map a fundamental frequency to its band label.

    Intervals are half-open [lo, hi), so 75.0 Hz belongs to S2, not S1.
    Raises FrequencyRangeError outside [50, 800).
    """
    if not (F0_MIN_HZ <= f0_hz < F0_MAX_HZ):
        raise FrequencyRangeError(
            f"f0 {f0_hz} Hz outside supported range [{F0_MIN_HZ:g}, {F0_MAX_HZ:g})"
        )
    # searchsorted with side='right' gives the index of the first edge > f0
    idx = int(np.searchsorted(BAND_EDGES_HZ, f0_hz, side="right")) - 1
    return BandLabel(idx)


def band_edges(label: BandLabel) -> tuple[float, float]:
    """Return (f_lo, f_hi) in Hz for a band label. V has no band."""
    if not label.is_band:
        raise ValueError("voicing class V has no frequency band")
    return BAND_EDGES_HZ[label], BAND_EDGES_HZ[label + 1]


def band_lag_range(label: BandLabel, sample_rate: int) -> tuple[int, int]:
    """Plausible period search range (in samples) for a band.

    A 25 % margin is allowed on both sides so pitches at the band edges are
    still recoverable: lag_min = floor(0.8*fs/f_hi), lag_max = ceil(1.25*fs/f_lo).
    """
    f_lo, f_hi = band_edges(label)
    lag_min = int(np.floor(0.8 * sample_rate / f_hi))
    lag_max = int(np.ceil(1.25 * sample_rate / f_lo))
    return max(lag_min, 1), lag_max


def one_hot(label: BandLabel) -> np.ndarray:
    vec = np.zeros(NUM_CLASSES, dtype=np.float32)
    vec[int(label)] = 1.0
    return vec


def oracle_labels(track) -> list[BandLabel]:
    """Label each ground-truth frame with its band (or V when unvoiced)."""
    labels = []
    for f0, voiced in zip(track.f0_hz, track.voiced):
        labels.append(band_of_frequency(float(f0)) if voiced else BandLabel.V)
    return labels
