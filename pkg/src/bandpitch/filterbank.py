"""Fourth-order elliptic band-pass filters, one per pitch band.

Coefficients are embedded constants (see tools/gen_filter_coeffs.py and
docs/filterbank_table.txt); this module only validates and applies them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import sosfilt

from . import filter_coeffs
from .bands import BandLabel

DESIGN_RATE = filter_coeffs.SAMPLE_RATE


@dataclass(frozen=True)
class BiquadCascade:
    """Two second-order sections, rows (b0, b1, b2, 1, a1, a2)."""

    sections: np.ndarray
    band: BandLabel

    def __post_init__(self):
        sections = np.asarray(self.sections, dtype=np.float64)
        object.__setattr__(self, "sections", sections)
        if sections.shape != (2, 6):
            raise ValueError(f"expected 2 biquad sections, got shape {sections.shape}")
        for b0, b1, b2, a0, a1, a2 in sections:
            if a0 != 1.0:
                raise ValueError("sections must be normalized to a0 = 1")
            poles = np.roots([1.0, a1, a2])
            if np.any(np.abs(poles) >= 1.0):
                raise ValueError(f"unstable section for band {self.band.name}")

    def response_db(self, freq_hz, sample_rate: int = DESIGN_RATE) -> np.ndarray:
        """Magnitude response in dB, evaluated directly from the biquads."""
        w = 2.0 * np.pi * np.atleast_1d(np.asarray(freq_hz, dtype=np.float64)) / sample_rate
        z = np.exp(1j * w)
        h = np.ones_like(z)
        for b0, b1, b2, _, a1, a2 in self.sections:
            h *= (b0 + b1 / z + b2 / z**2) / (1.0 + a1 / z + a2 / z**2)
        return 20.0 * np.log10(np.abs(h))


def design_band_filter(label: BandLabel, sample_rate: int = DESIGN_RATE) -> BiquadCascade:
    """Band-pass cascade for a band label at the fixed 16 kHz pipeline rate."""
    if not label.is_band:
        raise ValueError("cannot design a band filter for the voicing class V")
    if sample_rate != DESIGN_RATE:
        raise ValueError(f"filterbank is designed for {DESIGN_RATE} Hz, got {sample_rate}")
    return BiquadCascade(filter_coeffs.BAND_SOS[int(label)], label)


def apply_filter(filt: BiquadCascade, samples: np.ndarray) -> np.ndarray:
    """Causal single-pass filtering with zero initial state."""
    return sosfilt(filt.sections, np.asarray(samples, dtype=np.float64))
