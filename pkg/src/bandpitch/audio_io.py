"""Audio and pitch-track I/O: WAV loading, polyphase resampling, calibrated
noise mixing, and the CSV pitch-track format.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.signal import firwin, resample_poly

from .bands import F0_MAX_HZ, F0_MIN_HZ

PIPELINE_RATE = 16000  # Hz; the analysis pipeline runs at this rate


class AudioFormatError(ValueError):
    """Unreadable or unsupported WAV file."""


class PitchTrackError(ValueError):
    """Malformed pitch-track data or CSV."""


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float samples (nominal [-1, 1]) at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional (mono)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or Inf")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class PitchTrack:
    """Per-frame pitch contour. f0 = 0 Hz encodes unvoiced frames."""

    times: np.ndarray      # seconds, uniformly spaced
    f0_hz: np.ndarray
    voiced: np.ndarray     # bool
    hop_seconds: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        voiced = np.asarray(self.voiced, dtype=bool)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "voiced", voiced)
        if not (len(times) == len(f0) == len(voiced)):
            raise PitchTrackError("times, f0_hz and voiced must have equal length")
        if len(times) > 1:
            steps = np.diff(times)
            if np.any(np.abs(steps - self.hop_seconds) > 1e-9):
                raise PitchTrackError("times must be uniformly spaced by hop_seconds")
            if np.any(steps <= 0):
                raise PitchTrackError("times must be strictly increasing")
        if np.any(f0[~voiced] != 0.0):
            raise PitchTrackError("unvoiced frames must have f0 = 0")
        bad = voiced & ((f0 < F0_MIN_HZ) | (f0 >= F0_MAX_HZ))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise PitchTrackError(
                f"voiced f0 {f0[i]:g} Hz at entry {i} outside [{F0_MIN_HZ:g}, {F0_MAX_HZ:g})"
            )

    def __len__(self) -> int:
        return len(self.times)


# ---------------------------------------------------------------------------
# WAV I/O (RIFF, PCM16 or IEEE float32, 1-2 channels)
# ---------------------------------------------------------------------------

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


def load_wav(path) -> AudioBuffer:
    """Read a RIFF/WAVE file into a mono AudioBuffer.

    16-bit PCM is scaled by 1/32768; 32-bit float is taken as-is. Stereo is
    averaged to mono. Anything else raises AudioFormatError naming the field.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise AudioFormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise AudioFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise AudioFormatError(f"{path}: missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format == _WAVE_FORMAT_EXTENSIBLE:
        raise AudioFormatError(f"{path}: unsupported format tag 0xFFFE (extensible)")
    if audio_format not in (_WAVE_FORMAT_PCM, _WAVE_FORMAT_IEEE_FLOAT):
        raise AudioFormatError(f"{path}: unsupported format tag {audio_format} (not PCM or float)")
    if channels not in (1, 2):
        raise AudioFormatError(f"{path}: unsupported channel count {channels}")

    if audio_format == _WAVE_FORMAT_PCM:
        if bits != 16:
            raise AudioFormatError(f"{path}: unsupported PCM bit depth {bits} (only 16)")
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    else:
        if bits != 32:
            raise AudioFormatError(f"{path}: unsupported float bit depth {bits} (only 32)")
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4")
        samples = raw.astype(np.float64)

    if channels == 2:
        samples = samples[: len(samples) // 2 * 2].reshape(-1, 2).mean(axis=1)
    return AudioBuffer(samples, int(sample_rate))


def save_wav(path, buf: AudioBuffer, fmt: str = "float32") -> None:
    """Write an AudioBuffer as a mono WAV file (float32 by default).

    float32 output is not clipped; pcm16 clips to [-1, 1) before quantizing.
    """
    if fmt == "float32":
        payload = buf.samples.astype("<f4").tobytes()
        tag, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
    elif fmt == "pcm16":
        clipped = np.clip(buf.samples, -1.0, 32767.0 / 32768.0)
        payload = (np.round(clipped * 32768.0).astype("<i2")).tobytes()
        tag, bits = _WAVE_FORMAT_PCM, 16
    else:
        raise ValueError(f"unknown wav format {fmt!r}")
    block = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, tag, 1, buf.sample_rate, buf.sample_rate * block, block, bits,
        b"data", len(payload),
    )
    Path(path).write_bytes(header + payload)


# ---------------------------------------------------------------------------
# Resampling and noise mixing
# ---------------------------------------------------------------------------

_TAPS_PER_PHASE = 64
_KAISER_BETA = 8.6
_CUTOFF_MARGIN = 0.94


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Band-limited rational resampling (windowed-sinc polyphase, Kaiser).

    Identity when target_rate equals the source rate (bit-equal samples).
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    ratio = Fraction(target_rate, buf.sample_rate)
    up, down = ratio.numerator, ratio.denominator
    # cutoff at min(input, output) Nyquist, relative to the upsampled Nyquist;
    # pulled in slightly so the Kaiser transition band stays below it
    cutoff = min(1.0, up / down) / up * _CUTOFF_MARGIN
    taps = firwin(_TAPS_PER_PHASE * max(up, down) + 1, cutoff,
                  window=("kaiser", _KAISER_BETA))
    out = resample_poly(buf.samples, up, down, window=taps)
    n_out = int(math.ceil(len(buf.samples) * up / down))
    return AudioBuffer(out[:n_out], target_rate)


def rms(samples: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(samples, dtype=np.float64))))


def mix_noise(clean: AudioBuffer, noise: AudioBuffer, snr_db: float) -> AudioBuffer:
    """Add noise scaled so that the clean/noise power ratio equals snr_db.

    The noise must be at least as long as the clean signal and is truncated
    to it. No clipping is applied.
    """
    if clean.sample_rate != noise.sample_rate:
        raise ValueError(
            f"sample rate mismatch: clean {clean.sample_rate} Hz vs noise {noise.sample_rate} Hz"
        )
    if len(noise) < len(clean):
        raise ValueError(f"noise ({len(noise)} samples) shorter than clean ({len(clean)})")
    clean_rms = rms(clean.samples)
    noise_cut = noise.samples[: len(clean)]
    noise_rms = rms(noise_cut)
    if clean_rms == 0.0:
        raise ValueError("clean signal has zero energy")
    if noise_rms == 0.0:
        raise ValueError("noise signal has zero energy")
    gain = clean_rms / (noise_rms * 10.0 ** (snr_db / 20.0))
    return AudioBuffer(clean.samples + gain * noise_cut, clean.sample_rate)


# ---------------------------------------------------------------------------
# Pitch-track CSV
# ---------------------------------------------------------------------------

_CSV_HEADER = "time_s,f0_hz,voiced"


def write_pitch_track(track: PitchTrack, path) -> None:
    """Write the track as CSV: time_s,f0_hz,voiced (6/4 decimals, 0/1 flag)."""
    lines = [_CSV_HEADER]
    for t, f0, v in zip(track.times, track.f0_hz, track.voiced):
        lines.append(f"{t:.6f},{f0:.4f},{int(v)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_pitch_track(path) -> PitchTrack:
    """Parse a pitch-track CSV written by write_pitch_track."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != _CSV_HEADER:
        raise PitchTrackError(f"{path}: missing header '{_CSV_HEADER}'")
    times, f0s, voiced = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise PitchTrackError(f"{path}: line {lineno}: expected 3 columns, got {len(parts)}")
        try:
            t = float(parts[0])
            f0 = float(parts[1])
            v = int(parts[2])
        except ValueError as exc:
            raise PitchTrackError(f"{path}: line {lineno}: {exc}") from None
        if v not in (0, 1):
            raise PitchTrackError(f"{path}: line {lineno}: voiced flag must be 0 or 1")
        times.append(t)
        f0s.append(f0)
        voiced.append(bool(v))
    if not times:
        raise PitchTrackError(f"{path}: no data rows")
    hop = times[1] - times[0] if len(times) > 1 else 0.01
    try:
        return PitchTrack(np.array(times), np.array(f0s), np.array(voiced), hop)
    except PitchTrackError as exc:
        raise PitchTrackError(f"{path}: {exc}") from None


def read_ground_truth(path) -> PitchTrack:
    """Read a reference pitch track; identical schema to write_pitch_track.

    Voiced f0 outside [50, 800) is rejected (out of the method's range).
    """
    return read_pitch_track(path)
