#!/usr/bin/env python3
"""Generate checked-in test fixtures for the classifier.

Trains a small reference model (torch) on synthetic voices, exports it as
tests/fixtures/model.hf0w, and writes tests/fixtures/golden_fixtures.bin
holding (input grid, posterior) pairs computed by the torch forward pass.
The torch pipeline is an independent oracle for bandpitch.model.predict.

Run from the repository root: python3 tools/make_fixtures.py
"""
import struct
import sys
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from bandpitch.audio_io import AudioBuffer  # noqa: E402
from bandpitch.bands import BAND_EDGES_HZ, BandLabel  # noqa: E402
from bandpitch.dsp import autocorr, frame_signal, normalize_acf  # noqa: E402
from bandpitch.model import (DEFAULT_INPUT_LAGS, ModelWeights,  # noqa: E402
                             save_weights)

FS = 16000
LAGS = DEFAULT_INPUT_LAGS
SEED = 20240817
FIXDIR = ROOT / "tests" / "fixtures"


class RefNet(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv2d(1, 64, 3, padding=1)
        self.bn1 = nn.BatchNorm2d(64)
        self.pool = nn.MaxPool2d(2, 2)
        self.conv2 = nn.Conv2d(64, 64, 3, padding=1)
        self.bn2 = nn.BatchNorm2d(64)
        self.drop = nn.Dropout(0.2)
        self.dense = nn.Linear((5 // 2) * (LAGS // 2) * 64, 9)

    def forward(self, x):
        x = self.bn1(torch.relu(self.conv1(x)))
        x = self.drop(self.pool(x))
        x = self.bn2(torch.relu(self.conv2(x)))
        x = self.drop(x)
        # flatten in (row, column, channel) order to match the HF0W contract
        x = x.permute(0, 2, 3, 1).reshape(x.shape[0], -1)
        return self.dense(x)


def synth_clip(rng, kind, f0, seconds=0.35):
    n = int(seconds * FS)
    t = np.arange(n) / FS
    phase = rng.uniform(0, 1)
    if kind == "sine":
        x = np.sin(2 * np.pi * (f0 * t + phase))
    elif kind == "saw":
        x = 2 * ((f0 * t + phase) % 1.0) - 1
    elif kind == "pulse":
        marks = np.floor(f0 * t + phase) != np.floor(f0 * t + phase - f0 / FS)
        x = marks.astype(float)
    else:  # harmonic stack with random amplitudes
        x = np.zeros(n)
        for k in range(1, 9):
            if k * f0 >= FS / 2:
                break
            x += rng.uniform(0.2, 1.0) / k * np.sin(2 * np.pi * (k * f0 * t + rng.uniform(0, 1)))
    x *= rng.uniform(0.05, 1.0) / max(1e-9, np.abs(x).max())
    snr_db = rng.uniform(15, 45)
    noise = rng.standard_normal(n)
    noise *= np.sqrt(np.mean(x ** 2)) / np.sqrt(np.mean(noise ** 2)) * 10 ** (-snr_db / 20)
    return x + noise


def unvoiced_clip(rng, seconds=0.35):
    n = int(seconds * FS)
    kind = rng.integers(0, 3)
    if kind == 0:
        return np.zeros(n)
    if kind == 1:
        return rng.uniform(0.01, 0.5) * rng.standard_normal(n)
    # low-pass-ish rumble without a stable pitch
    x = rng.standard_normal(n)
    return rng.uniform(0.05, 0.5) * np.convolve(x, np.ones(8) / 8, mode="same")


def clip_examples(samples, target):
    series = frame_signal(AudioBuffer(samples, FS))
    nacf = np.stack([normalize_acf(autocorr(f)).values[:LAGS] for f in series.frames])
    last = len(series) - 1
    grids, targets = [], []
    # skip boundary frames; their zero-padding does not match the label
    for t in range(2, last - 3):
        rows = [nacf[min(max(t + d, 0), last)] for d in range(-2, 3)]
        grids.append(np.stack(rows).astype(np.float32))
        targets.append(target)
    return grids, targets


def build_dataset(rng, clips_per_band=26):
    grids, targets = [], []
    kinds = ["sine", "saw", "pulse", "stack"]
    for band in range(8):
        lo, hi = BAND_EDGES_HZ[band], BAND_EDGES_HZ[band + 1]
        for i in range(clips_per_band):
            f0 = rng.uniform(lo * 1.02, hi * 0.98)
            g, y = clip_examples(synth_clip(rng, kinds[i % 4], f0), band)
            grids += g
            targets += y
    for _ in range(8 * clips_per_band // 2):
        g, y = clip_examples(unvoiced_clip(rng), int(BandLabel.V))
        grids += g
        targets += y
    x = np.stack(grids)
    y = np.array(targets, dtype=np.int64)
    order = rng.permutation(len(x))
    return x[order], y[order]


def export(net: RefNet, path):
    sd = {k: v.detach().numpy() for k, v in net.state_dict().items()}

    def conv(w):  # torch (out, in, kh, kw) -> HF0W (kh, kw, in, out)
        return np.transpose(w, (2, 3, 1, 0))

    flat = (5 // 2) * (LAGS // 2) * 64
    # torch flattens were done in (H, W, C) order already, so the dense
    # weight maps 1:1; just transpose to (flatten_dim, 9)
    weights = ModelWeights(
        conv1_kernel=conv(sd["conv1.weight"]), conv1_bias=sd["conv1.bias"],
        bn1_gamma=sd["bn1.weight"], bn1_beta=sd["bn1.bias"],
        bn1_mean=sd["bn1.running_mean"], bn1_var=sd["bn1.running_var"],
        bn1_eps=net.bn1.eps,
        conv2_kernel=conv(sd["conv2.weight"]), conv2_bias=sd["conv2.bias"],
        bn2_gamma=sd["bn2.weight"], bn2_beta=sd["bn2.bias"],
        bn2_mean=sd["bn2.running_mean"], bn2_var=sd["bn2.running_var"],
        bn2_eps=net.bn2.eps,
        dense_weight=sd["dense.weight"].T.reshape(flat, 9),
        dense_bias=sd["dense.bias"],
    )
    weights.validate()
    save_weights(weights, path)
    return weights


def write_golden(net: RefNet, grids: np.ndarray, path):
    net.eval()
    with torch.no_grad():
        logits = net(torch.from_numpy(grids[:, None, :, :]))
        posteriors = torch.softmax(logits, dim=1).numpy().astype(np.float32)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(grids)))
        for grid, post in zip(grids, posteriors):
            fh.write(grid.astype("<f4").tobytes())
            fh.write(post.astype("<f4").tobytes())


def main():
    torch.manual_seed(SEED)
    rng = np.random.default_rng(SEED)
    x, y = build_dataset(rng)
    n_val = len(x) // 5
    x_tr, y_tr = x[n_val:], y[n_val:]
    x_va, y_va = x[:n_val], y[:n_val]
    print(f"dataset: {len(x_tr)} train / {len(x_va)} val examples")

    net = RefNet()
    opt = torch.optim.SGD(net.parameters(), lr=0.001, momentum=0.9)
    loss_fn = nn.CrossEntropyLoss()
    xt = torch.from_numpy(x_tr[:, None]); yt = torch.from_numpy(y_tr)
    xv = torch.from_numpy(x_va[:, None]); yv = torch.from_numpy(y_va)
    best_acc, best_state, stall = 0.0, None, 0
    for epoch in range(30):
        net.train()
        perm = torch.randperm(len(xt))
        for i in range(0, len(xt), 64):
            idx = perm[i:i + 64]
            opt.zero_grad()
            loss = loss_fn(net(xt[idx]), yt[idx])
            loss.backward()
            opt.step()
        net.eval()
        with torch.no_grad():
            acc = (net(xv).argmax(1) == yv).float().mean().item()
        print(f"epoch {epoch}: val acc {acc:.4f}")
        if acc > best_acc:
            best_acc, stall = acc, 0
            best_state = {k: v.clone() for k, v in net.state_dict().items()}
        else:
            stall += 1
            if stall >= 10:
                break
    net.load_state_dict(best_state)

    FIXDIR.mkdir(parents=True, exist_ok=True)
    export(net, FIXDIR / "model.hf0w")
    # golden inputs: a mix of real feature grids and pure-noise grids
    rng2 = np.random.default_rng(SEED + 1)
    golden = np.concatenate([
        x_va[:16],
        rng2.standard_normal((8, 5, LAGS)).astype(np.float32) * 0.3,
    ])
    write_golden(net, golden, FIXDIR / "golden_fixtures.bin")
    (FIXDIR / "README.txt").write_text(
        "Generated by tools/make_fixtures.py (torch reference pipeline).\n"
        f"model.hf0w: trained fixture model, val accuracy {best_acc:.4f}\n"
        "golden_fixtures.bin: u32 count, then per fixture 5x320 float32 grid\n"
        "followed by 9 float32 posteriors from the torch forward pass.\n"
    )
    print(f"wrote fixtures, best val acc {best_acc:.4f}")


if __name__ == "__main__":
    main()
