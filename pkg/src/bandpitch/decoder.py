"""Unsupervised pitch decoding: per-band filtering of contiguous label runs,
double autocorrelation, nearest-peak refinement, period -> f0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio_io import AudioBuffer, PIPELINE_RATE, PitchTrack
from .bands import F0_MAX_HZ, F0_MIN_HZ, BandLabel, band_edges, band_lag_range
from .dsp import estimate_period, frame_geometry, frame_signal
from .filterbank import apply_filter, design_band_filter

RUN_PAD_SECONDS = 0.025  # filter warm-up padding on each side of a run


@dataclass(frozen=True)
class LabelRun:
    """Maximal contiguous run of one band label along the frame axis."""

    label: BandLabel
    start_frame: int
    end_frame: int    # inclusive
    start_sample: int
    end_sample: int   # exclusive, includes warm-up padding


@dataclass
class FrameDiagnostics:
    frame: int
    label: BandLabel
    raw_t0: int | None
    refined_lag: float | None
    clamped: bool
    no_peak: bool = False


def segment_runs(labels: list[BandLabel], n_samples: int,
                 sample_rate: int = PIPELINE_RATE) -> list[LabelRun]:
    """Split a frame-label sequence into maximal same-label runs.

    Sample spans cover the run's frames plus 25 ms padding each side,
    clipped to the signal bounds.
    """
    frame_len, hop = frame_geometry(sample_rate)
    pad = round(RUN_PAD_SECONDS * sample_rate)
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            start_sample = max(0, start * hop - pad)
            end_sample = min(n_samples, (i - 1) * hop + frame_len + pad)
            runs.append(LabelRun(labels[start], start, i - 1, start_sample, end_sample))
            start = i
    return runs


def decode_pitch(buf: AudioBuffer, labels: list[BandLabel],
                 diagnostics: list[FrameDiagnostics] | None = None) -> PitchTrack:
    """Turn per-frame band labels plus the raw signal into a pitch track.

    Each band run is filtered with its elliptic band-pass (fresh state per
    run), re-framed at the original frame positions, and each frame's period
    is located on the double ACF then refined on the single ACF (tapered, see
    estimate_period). Estimates outside the band's tolerated range are
    clamped to the band edge.
    """
    if buf.sample_rate != PIPELINE_RATE:
        raise ValueError(f"decode_pitch expects {PIPELINE_RATE} Hz input")
    series = frame_signal(buf)
    if len(labels) != len(series):
        raise ValueError(
            f"label count {len(labels)} does not match frame count {len(series)}"
        )
    frame_len, hop = series.frame_len, series.hop
    fs = buf.sample_rate
    f0 = np.zeros(len(series))
    voiced = np.zeros(len(series), dtype=bool)

    for run in segment_runs(labels, len(buf.samples), fs):
        if run.label == BandLabel.V:
            if diagnostics is not None:
                for t in range(run.start_frame, run.end_frame + 1):
                    diagnostics.append(FrameDiagnostics(t, run.label, None, None, False))
            continue
        segment = buf.samples[run.start_sample:run.end_sample]
        cascade = design_band_filter(run.label, fs)
        # filter the run in both directions: the causal pass rings at the
        # segment head, the reversed pass at the tail. Each frame later reads
        # from whichever pass keeps the transient farther away.
        forward = apply_filter(cascade, segment)
        backward = apply_filter(cascade, segment[::-1])[::-1]
        lag_min, lag_max = band_lag_range(run.label, fs)
        f_lo, f_hi = band_edges(run.label)
        # keep printable CSV precision below the 800 Hz exclusive bound
        clamp_hi = F0_MAX_HZ - 1e-4
        for t in range(run.start_frame, run.end_frame + 1):
            offset = t * hop - run.start_sample
            head_gap = offset
            tail_gap = len(segment) - (offset + frame_len)
            source = backward if head_gap < tail_gap else forward
            window = source[offset: offset + frame_len]
            if len(window) < frame_len:
                window = np.pad(window, (0, frame_len - len(window)))
            refined, t0, found = estimate_period(window, lag_min, lag_max)
            estimate = fs / refined
            clamped = False
            if estimate < 0.8 * f_lo:
                estimate, clamped = f_lo, True
            elif estimate > 1.25 * f_hi:
                estimate, clamped = f_hi, True
            # the track type only admits [50, 800); tolerated band overshoot
            # beyond that is clamped too
            if not F0_MIN_HZ <= estimate <= clamp_hi:
                estimate = min(max(estimate, F0_MIN_HZ), clamp_hi)
                clamped = True
            f0[t] = estimate
            voiced[t] = True
            if diagnostics is not None:
                diagnostics.append(
                    FrameDiagnostics(t, run.label, t0, refined, clamped, not found)
                )

    if diagnostics is not None:
        diagnostics.sort(key=lambda d: d.frame)
    times = np.arange(len(series)) * series.hop_seconds
    return PitchTrack(times, f0, voiced, series.hop_seconds)


def write_diagnostics(diags: list[FrameDiagnostics], path) -> None:
    """Sidecar CSV: frame, label, raw t0, refined lag, clamped flag."""
    lines = ["frame,label,raw_t0,refined_lag,clamped"]
    for d in diags:
        raw = "" if d.raw_t0 is None else str(d.raw_t0)
        refined = "" if d.refined_lag is None else f"{d.refined_lag:.4f}"
        lines.append(f"{d.frame},{d.label.name},{raw},{refined},{int(d.clamped)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
