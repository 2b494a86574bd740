"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from pydantic import BaseModel, Field

from .metrics import EvalReport


class TrackModel(BaseModel):
    """JSON form of a pitch track; f0 = 0 on unvoiced frames."""

    hop_seconds: float = Field(gt=0)
    times: list[float]
    f0_hz: list[float]
    voiced: list[bool]


class ExtractResponse(BaseModel):
    track: TrackModel
    frames: int
    oracle_mode: bool


class EvaluateRequest(BaseModel):
    est: TrackModel
    ref: TrackModel


class EvaluateResponse(BaseModel):
    vde: float
    gpe: float
    fpe: float
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
    undefined: list[str]

    @classmethod
    def from_report(cls, report: EvalReport) -> "EvaluateResponse":
        return cls(
            vde=report.vde, gpe=report.gpe, fpe=report.fpe, ffe=report.ffe,
            vd_recall=report.vd_recall, vfa=report.vfa, rpa=report.rpa,
            rca=report.rca, oa=report.oa,
            total_frames=report.total_frames,
            voiced_truth_frames=report.voiced_truth_frames,
            unvoiced_truth_frames=report.unvoiced_truth_frames,
            both_voiced_frames=report.both_voiced_frames,
            undefined=list(report.undefined),
        )


class ModelInfo(BaseModel):
    loaded: bool
    path: str | None = None
    input_lags: int | None = None
    context: int | None = None
    flatten_dim: int | None = None
    parameters: int | None = None


class LoadModelRequest(BaseModel):
    path: str


class MixNoiseResponse(BaseModel):
    snr_db: float
    gain_applied: bool = True
