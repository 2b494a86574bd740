"""FastAPI service wrapping the extraction pipeline.

Run with: uvicorn bandpitch.service:app
Set BANDPITCH_MODEL to preload a weight file at startup, or POST to
/model/load afterwards. Extraction accepts WAV uploads and returns the
pitch track as JSON; oracle mode takes a ground-truth CSV upload instead
of using the classifier.
"""
from __future__ import annotations

import contextlib
import os
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, HTTPException, UploadFile

from . import audio_io, decoder, metrics, model
from .audio_io import PIPELINE_RATE, PitchTrack
from .cli import _oracle_frame_labels
from .schemas import (EvaluateRequest, EvaluateResponse, ExtractResponse,
                      LoadModelRequest, ModelInfo, TrackModel)

class _State:
    weights: model.ModelWeights | None = None
    path: str | None = None


state = _State()


@contextlib.asynccontextmanager
async def _lifespan(_: FastAPI):
    path = os.environ.get("BANDPITCH_MODEL")
    if path:
        state.weights = model.load_weights(path)
        state.path = path
    yield


app = FastAPI(title="bandpitch", version="0.1.0", lifespan=_lifespan)


def _to_track_model(track: PitchTrack) -> TrackModel:
    return TrackModel(
        hop_seconds=track.hop_seconds,
        times=[round(float(t), 6) for t in track.times],
        f0_hz=[round(float(f), 4) for f in track.f0_hz],
        voiced=[bool(v) for v in track.voiced],
    )


def _from_track_model(m: TrackModel) -> PitchTrack:
    try:
        return PitchTrack(np.array(m.times), np.array(m.f0_hz),
                          np.array(m.voiced), m.hop_seconds)
    except audio_io.PitchTrackError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/model/info", response_model=ModelInfo)
def model_info():
    w = state.weights
    if w is None:
        return ModelInfo(loaded=False)
    return ModelInfo(loaded=True, path=state.path, input_lags=w.input_lags,
                     context=w.context, flatten_dim=w.flatten_dim,
                     parameters=w.parameter_count)


@app.post("/model/load", response_model=ModelInfo)
def model_load(req: LoadModelRequest):
    try:
        state.weights = model.load_weights(req.path)
    except (OSError, model.WeightFormatError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    state.path = req.path
    return model_info()


def _load_uploaded_wav(upload: UploadFile) -> audio_io.AudioBuffer:
    data = upload.file.read()
    with tempfile.NamedTemporaryFile(suffix=".wav", delete=False) as tmp:
        tmp.write(data)
        tmp_path = tmp.name
    try:
        return audio_io.load_wav(tmp_path)
    except audio_io.AudioFormatError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    finally:
        os.unlink(tmp_path)


@app.post("/extract", response_model=ExtractResponse)
def extract(wav: UploadFile = File(...), oracle_truth: UploadFile | None = File(None)):
    buf = audio_io.resample(_load_uploaded_wav(wav), PIPELINE_RATE)
    if oracle_truth is not None:
        with tempfile.NamedTemporaryFile(suffix=".csv", delete=False) as tmp:
            tmp.write(oracle_truth.file.read())
            tmp_path = tmp.name
        try:
            truth = audio_io.read_ground_truth(tmp_path)
        except audio_io.PitchTrackError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        finally:
            os.unlink(tmp_path)
        labels = _oracle_frame_labels(truth, len(buf.samples))
        oracle = True
    else:
        if state.weights is None:
            raise HTTPException(status_code=409, detail="no model loaded")
        labels = model.classify_track(state.weights, buf)
        oracle = False
    track = decoder.decode_pitch(buf, labels)
    return ExtractResponse(track=_to_track_model(track), frames=len(track),
                           oracle_mode=oracle)


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate(req: EvaluateRequest):
    est = _from_track_model(req.est)
    ref = _from_track_model(req.ref)
    try:
        report = metrics.evaluate(est, ref)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return EvaluateResponse.from_report(report)
