"""Shared synthesis helpers and fixtures for the test suite."""
from pathlib import Path

import numpy as np
import pytest

from bandpitch.audio_io import AudioBuffer, PitchTrack
from bandpitch.bands import BandLabel, band_of_frequency
from bandpitch.dsp import frame_geometry, num_frames

FS = 16000
FIXTURES = Path(__file__).parent / "fixtures"


def tone(f0, seconds=1.0, phase=0.0, fs=FS, amp=1.0):
    n = int(round(seconds * fs))
    return amp * np.sin(2 * np.pi * f0 * np.arange(n) / fs + phase)


def sawtooth(f0, seconds=1.0, phase=0.0, fs=FS):
    n = int(round(seconds * fs))
    return 2.0 * ((f0 * np.arange(n) / fs + phase) % 1.0) - 1.0


def pulse_train(f0, seconds=1.0, phase=0.0, fs=FS):
    n = int(round(seconds * fs))
    t = f0 * np.arange(n) / fs + phase
    return (np.floor(t) != np.floor(t - f0 / fs)).astype(np.float64)


def truth_labels(f0, n_samples, fs=FS):
    """Oracle band labels per frame for a constant-pitch signal.

    Frames whose 50 ms window runs past the end of the signal see zero
    padding, so the ground truth marks them unvoiced.
    """
    frame_len, hop = frame_geometry(fs)
    labels = []
    for t in range(num_frames(n_samples, hop)):
        if t * hop + frame_len <= n_samples:
            f = f0 if np.isscalar(f0) else f0[t]
            labels.append(band_of_frequency(float(f)))
        else:
            labels.append(BandLabel.V)
    return labels


def truth_track(f0, n_samples, fs=FS):
    """Ground-truth PitchTrack matching truth_labels."""
    labels = truth_labels(f0, n_samples, fs)
    _, hop = frame_geometry(fs)
    times = np.arange(len(labels)) * hop / fs
    voiced = np.array([lab != BandLabel.V for lab in labels])
    if np.isscalar(f0):
        f0s = np.where(voiced, float(f0), 0.0)
    else:
        f0s = np.where(voiced, np.asarray(f0, dtype=float)[: len(labels)], 0.0)
    return PitchTrack(times, f0s, voiced, hop / fs)


def buffer_of(samples, fs=FS):
    return AudioBuffer(np.asarray(samples, dtype=np.float64), fs)


@pytest.fixture(scope="session")
def fixture_model_path():
    path = FIXTURES / "model.hf0w"
    if not path.exists():
        pytest.skip("trained fixture model not present")
    return path


@pytest.fixture(scope="session")
def fixture_weights(fixture_model_path):
    from bandpitch.model import load_weights
    return load_weights(fixture_model_path)


def load_golden_fixtures():
    """Read (grid, posterior) pairs produced by the reference pipeline."""
    import struct
    path = FIXTURES / "golden_fixtures.bin"
    data = path.read_bytes()
    (count,) = struct.unpack_from("<I", data, 0)
    pos = 4
    pairs = []
    grid_bytes = 5 * 320 * 4
    for _ in range(count):
        grid = np.frombuffer(data[pos:pos + grid_bytes], dtype="<f4").reshape(5, 320)
        pos += grid_bytes
        post = np.frombuffer(data[pos:pos + 9 * 4], dtype="<f4")
        pos += 9 * 4
        pairs.append((grid.astype(np.float64), post.astype(np.float64)))
    return pairs
