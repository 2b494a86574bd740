"""Evaluation of an estimated pitch track against a reference.

Speech metrics: voicing decision error (VDE), gross pitch error (GPE),
fine pitch error (FPE, percent), f0 frame error (FFE).
Singing metrics: voicing decision recall (VD), voicing false alarm (VFA),
raw pitch accuracy (RPA), raw chroma accuracy (RCA), overall accuracy (OA).

Conventions: 20 % relative threshold for gross errors, 50 cents for raw
pitch/chroma, reference frames aligned to the nearest estimate frame.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio_io import PitchTrack

GROSS_ERROR_RELATIVE = 0.20
RAW_PITCH_CENTS = 50.0


@dataclass(frozen=True)
class EvalReport:
    vde: float
    gpe: float
    fpe: float            # percent
    ffe: float
    vd_recall: float
    vfa: float
    rpa: float
    rca: float
    oa: float
    total_frames: int
    voiced_truth_frames: int
    unvoiced_truth_frames: int
    both_voiced_frames: int
    undefined: tuple[str, ...] = ()   # metrics whose denominator was empty

    _CSV_FIELDS = ("vde", "gpe", "fpe", "ffe", "vd_recall", "vfa", "rpa", "rca", "oa",
                   "total_frames", "voiced_truth_frames", "unvoiced_truth_frames",
                   "both_voiced_frames")

    def as_text(self) -> str:
        lines = [f"{name}={getattr(self, name):.6g}" for name in self._CSV_FIELDS]
        if self.undefined:
            lines.append("undefined=" + "|".join(self.undefined))
        return "\n".join(lines)

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(cls._CSV_FIELDS)

    def csv_row(self) -> str:
        return ",".join(f"{getattr(self, name):.6g}" for name in self._CSV_FIELDS)


def cents(f_est: float, f_ref: float) -> float:
    """Interval between two frequencies in cents (1200 per octave)."""
    if f_est <= 0 or f_ref <= 0:
        raise ValueError("cents requires positive frequencies")
    return 1200.0 * np.log2(f_est / f_ref)


def align(est: PitchTrack, ref: PitchTrack) -> np.ndarray:
    """Index of the estimate frame nearest each reference frame (ties: earlier).

    Reference frames beyond the estimate span take the nearest edge frame.
    """
    if len(est) == 0 or len(ref) == 0:
        raise ValueError("cannot align an empty pitch track")
    idx = np.searchsorted(est.times, ref.times)
    idx = np.clip(idx, 1, len(est) - 1) if len(est) > 1 else np.zeros(len(ref), int)
    if len(est) > 1:
        left = est.times[idx - 1]
        right = est.times[idx]
        # strict inequality keeps the earlier frame on exact midpoints
        idx = np.where(np.abs(ref.times - right) < np.abs(ref.times - left), idx, idx - 1)
    return idx


def evaluate(est: PitchTrack, ref: PitchTrack) -> EvalReport:
    """Compare an estimated track with a reference, frame by frame."""
    pairs = align(est, ref)
    est_f0 = est.f0_hz[pairs]
    est_voiced = est.voiced[pairs]
    ref_f0 = ref.f0_hz
    ref_voiced = ref.voiced

    total = len(ref)
    voiced_truth = int(np.sum(ref_voiced))
    unvoiced_truth = total - voiced_truth
    both = ref_voiced & est_voiced
    n_both = int(np.sum(both))

    voicing_mistakes = int(np.sum(ref_voiced != est_voiced))

    rel_err = np.zeros(total)
    rel_err[both] = np.abs(est_f0[both] / ref_f0[both] - 1.0)
    gross = both & (rel_err > GROSS_ERROR_RELATIVE)
    n_gross = int(np.sum(gross))
    fine = both & ~gross

    cent_dev = np.zeros(total)
    cent_dev[both] = 1200.0 * np.log2(est_f0[both] / ref_f0[both])
    # fold into (-600, +600] for chroma
    chroma_dev = cent_dev - 1200.0 * np.ceil(cent_dev / 1200.0 - 0.5)

    pitch_ok = both & (np.abs(cent_dev) <= RAW_PITCH_CENTS)
    chroma_ok = both & (np.abs(chroma_dev) <= RAW_PITCH_CENTS)
    correct = (~ref_voiced & ~est_voiced) | pitch_ok

    undefined = []

    def ratio(num: int | float, den: int, name: str) -> float:
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    report = EvalReport(
        vde=ratio(voicing_mistakes, total, "vde"),
        gpe=ratio(n_gross, n_both, "gpe"),
        fpe=100.0 * ratio(float(np.sum(rel_err[fine])), int(np.sum(fine)), "fpe"),
        ffe=ratio(voicing_mistakes + n_gross, total, "ffe"),
        vd_recall=ratio(n_both, voiced_truth, "vd_recall"),
        vfa=ratio(int(np.sum(~ref_voiced & est_voiced)), unvoiced_truth, "vfa"),
        rpa=ratio(int(np.sum(pitch_ok)), voiced_truth, "rpa"),
        rca=ratio(int(np.sum(chroma_ok)), voiced_truth, "rca"),
        oa=ratio(int(np.sum(correct)), total, "oa"),
        total_frames=total,
        voiced_truth_frames=voiced_truth,
        unvoiced_truth_frames=unvoiced_truth,
        both_voiced_frames=n_both,
        undefined=tuple(undefined),
    )
    return report


def summarize(reports: list[EvalReport]) -> dict[str, tuple[float, float]]:
    """Unweighted per-file mean and sample variance of each ratio metric."""
    out = {}
    for name in ("vde", "gpe", "fpe", "ffe", "vd_recall", "vfa", "rpa", "rca", "oa"):
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        mean = float(values.mean())
        var = float(values.var(ddof=1)) if len(values) > 1 else 0.0
        out[name] = (mean, var)
    return out
