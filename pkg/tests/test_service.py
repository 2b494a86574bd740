"""HTTP service endpoints via the in-process test client."""
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient

from bandpitch.audio_io import save_wav, write_pitch_track
from bandpitch.service import app, state

from conftest import buffer_of, sawtooth, tone, truth_track


@pytest.fixture()
def client():
    state.weights = None
    state.path = None
    with TestClient(app) as c:
        yield c


def _wav_bytes(tmp_path, samples):
    path = tmp_path / "u.wav"
    save_wav(path, buffer_of(samples))
    return path.read_bytes()


def _truth_bytes(tmp_path, f0, n_samples):
    path = tmp_path / "t.csv"
    write_pitch_track(truth_track(f0, n_samples), path)
    return path.read_bytes()


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_model_info_before_load(client):
    resp = client.get("/model/info")
    assert resp.status_code == 200
    assert resp.json()["loaded"] is False


def test_model_load_and_info(client, fixture_model_path):
    resp = client.post("/model/load", json={"path": str(fixture_model_path)})
    assert resp.status_code == 200
    body = resp.json()
    assert body["loaded"] is True
    assert body["input_lags"] == 320
    assert body["flatten_dim"] == 20480
    assert client.get("/model/info").json()["loaded"] is True


def test_model_load_bad_path(client, tmp_path):
    resp = client.post("/model/load", json={"path": str(tmp_path / "nope.hf0w")})
    assert resp.status_code == 400


def test_model_load_corrupt_file(client, tmp_path):
    bad = tmp_path / "bad.hf0w"
    bad.write_bytes(b"garbage")
    resp = client.post("/model/load", json={"path": str(bad)})
    assert resp.status_code == 400
    assert "magic" in resp.json()["detail"]


def test_extract_without_model_is_conflict(client, tmp_path):
    wav = _wav_bytes(tmp_path, tone(220.0, seconds=0.2))
    resp = client.post("/extract", files={"wav": ("u.wav", wav, "audio/wav")})
    assert resp.status_code == 409
    assert "no model" in resp.json()["detail"]


def test_extract_oracle_mode(client, tmp_path):
    samples = tone(220.0, seconds=0.5)
    wav = _wav_bytes(tmp_path, samples)
    truth = _truth_bytes(tmp_path, 220.0, len(samples))
    resp = client.post("/extract",
                       files={"wav": ("u.wav", wav, "audio/wav"),
                              "oracle_truth": ("t.csv", truth, "text/csv")})
    assert resp.status_code == 200, resp.text
    body = resp.json()
    assert body["oracle_mode"] is True
    track = body["track"]
    assert body["frames"] == len(track["times"]) == len(track["f0_hz"])
    voiced_f0 = [f for f, v in zip(track["f0_hz"], track["voiced"]) if v]
    assert voiced_f0 and max(abs(f - 220.0) for f in voiced_f0) < 1.0


def test_extract_model_mode(client, tmp_path, fixture_model_path):
    client.post("/model/load", json={"path": str(fixture_model_path)})
    wav = _wav_bytes(tmp_path, sawtooth(250.0, seconds=0.4))
    resp = client.post("/extract", files={"wav": ("u.wav", wav, "audio/wav")})
    assert resp.status_code == 200, resp.text
    body = resp.json()
    assert body["oracle_mode"] is False
    voiced_f0 = [f for f, v in zip(body["track"]["f0_hz"], body["track"]["voiced"]) if v]
    assert voiced_f0 and abs(np.median(voiced_f0) - 250.0) < 2.0


def test_extract_rejects_non_wav_upload(client):
    resp = client.post("/extract", files={"wav": ("u.wav", b"not audio", "audio/wav")})
    assert resp.status_code == 422
    assert "RIFF" in resp.json()["detail"]


def test_extract_rejects_malformed_truth(client, tmp_path):
    wav = _wav_bytes(tmp_path, tone(220.0, seconds=0.2))
    resp = client.post("/extract",
                       files={"wav": ("u.wav", wav, "audio/wav"),
                              "oracle_truth": ("t.csv", b"bogus\n", "text/csv")})
    assert resp.status_code == 422


def test_evaluate_endpoint(client):
    track = {
        "hop_seconds": 0.01,
        "times": [0.0, 0.01, 0.02],
        "f0_hz": [110.0, 0.0, 220.0],
        "voiced": [True, False, True],
    }
    resp = client.post("/evaluate", json={"est": track, "ref": track})
    assert resp.status_code == 200
    body = resp.json()
    assert body["oa"] == 1.0 and body["gpe"] == 0.0
    assert body["total_frames"] == 3
    assert body["undefined"] == []


def test_evaluate_rejects_invalid_track(client):
    bad = {
        "hop_seconds": 0.01,
        "times": [0.0, 0.01],
        "f0_hz": [110.0, 20.0],   # voiced f0 below 50 Hz
        "voiced": [True, True],
    }
    resp = client.post("/evaluate", json={"est": bad, "ref": bad})
    assert resp.status_code == 422
    assert "outside" in resp.json()["detail"]


def test_model_preload_from_environment(tmp_path, fixture_model_path, monkeypatch):
    monkeypatch.setenv("BANDPITCH_MODEL", str(fixture_model_path))
    state.weights = None
    state.path = None
    with TestClient(app) as c:
        assert c.get("/model/info").json()["loaded"] is True
    state.weights = None
    state.path = None
