"""bandpitch: hybrid pitch extraction.

A small CNN maps autocorrelation features to one of eight pitch bands (or
an unvoiced class); a filter-and-autocorrelate decoder then recovers the
precise f0 from the predicted band.
"""
from .audio_io import (AudioBuffer, PitchTrack, load_wav, mix_noise,
                       read_ground_truth, read_pitch_track, resample,
                       save_wav, write_pitch_track)
from .bands import BandLabel, band_edges, band_of_frequency, oracle_labels
from .decoder import decode_pitch, segment_runs
from .metrics import EvalReport, evaluate
from .model import ModelWeights, classify_track, load_weights, predict, save_weights

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer", "PitchTrack", "BandLabel", "ModelWeights", "EvalReport",
    "load_wav", "save_wav", "resample", "mix_noise",
    "read_pitch_track", "write_pitch_track", "read_ground_truth",
    "band_of_frequency", "band_edges", "oracle_labels",
    "decode_pitch", "segment_runs", "evaluate",
    "load_weights", "save_weights", "predict", "classify_track",
    "extract_pitch", "__version__",
]


def extract_pitch(buf: AudioBuffer, weights: ModelWeights) -> PitchTrack:
    """Full pipeline: resample to 16 kHz, classify bands, decode f0."""
    from .audio_io import PIPELINE_RATE
    buf = resample(buf, PIPELINE_RATE)
    labels = classify_track(weights, buf)
    return decode_pitch(buf, labels)
