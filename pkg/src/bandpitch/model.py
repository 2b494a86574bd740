"""CNN band classifier: weight file I/O and the deterministic forward pass.

Architecture (fixed): conv 3x3x64 -> ReLU -> batch-norm -> max-pool 2x2 ->
conv 3x3x64 -> ReLU -> batch-norm -> flatten -> dense(9) -> softmax.
Input is a 5-frame context of normalized autocorrelation rows.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio_io import AudioBuffer
from .bands import NUM_CLASSES, BandLabel
from .dsp import FrameSeries, autocorr, frame_signal, normalize_acf

HF0W_MAGIC = b"HF0W"
HF0W_VERSION = 1

DEFAULT_INPUT_LAGS = 320  # covers the longest period, 16000/50 samples
CONTEXT_FRAMES = 5

_TENSOR_NAMES = (
    "conv1.kernel", "conv1.bias", "bn1.gamma", "bn1.beta", "bn1.mean", "bn1.var",
    "bn1.eps",
    "conv2.kernel", "conv2.bias", "bn2.gamma", "bn2.beta", "bn2.mean", "bn2.var",
    "bn2.eps",
    "dense.weight", "dense.bias",
)


class WeightFormatError(ValueError):
    """Malformed or inconsistent HF0W weight file."""


@dataclass(frozen=True)
class ModelWeights:
    """All parameters of the band classifier (inference form)."""

    conv1_kernel: np.ndarray   # (3, 3, 1, 64)
    conv1_bias: np.ndarray     # (64,)
    bn1_gamma: np.ndarray
    bn1_beta: np.ndarray
    bn1_mean: np.ndarray
    bn1_var: np.ndarray
    bn1_eps: float
    conv2_kernel: np.ndarray   # (3, 3, 64, 64)
    conv2_bias: np.ndarray
    bn2_gamma: np.ndarray
    bn2_beta: np.ndarray
    bn2_mean: np.ndarray
    bn2_var: np.ndarray
    bn2_eps: float
    dense_weight: np.ndarray   # (flatten_dim, 9)
    dense_bias: np.ndarray     # (9,)
    input_lags: int = DEFAULT_INPUT_LAGS
    context: int = CONTEXT_FRAMES

    @property
    def flatten_dim(self) -> int:
        # one 2x2/stride-2 pool after conv1, "same" padding everywhere
        return (self.context // 2) * (self.input_lags // 2) * 64

    @property
    def parameter_count(self) -> int:
        return sum(t.size for t in self._tensors().values())

    def _tensors(self) -> dict[str, np.ndarray]:
        return {
            "conv1.kernel": self.conv1_kernel, "conv1.bias": self.conv1_bias,
            "bn1.gamma": self.bn1_gamma, "bn1.beta": self.bn1_beta,
            "bn1.mean": self.bn1_mean, "bn1.var": self.bn1_var,
            "bn1.eps": np.array([self.bn1_eps], dtype=np.float32),
            "conv2.kernel": self.conv2_kernel, "conv2.bias": self.conv2_bias,
            "bn2.gamma": self.bn2_gamma, "bn2.beta": self.bn2_beta,
            "bn2.mean": self.bn2_mean, "bn2.var": self.bn2_var,
            "bn2.eps": np.array([self.bn2_eps], dtype=np.float32),
            "dense.weight": self.dense_weight, "dense.bias": self.dense_bias,
        }

    def validate(self) -> None:
        shapes = {
            "conv1.kernel": (3, 3, 1, 64), "conv1.bias": (64,),
            "bn1.gamma": (64,), "bn1.beta": (64,), "bn1.mean": (64,), "bn1.var": (64,),
            "bn1.eps": (1,),
            "conv2.kernel": (3, 3, 64, 64), "conv2.bias": (64,),
            "bn2.gamma": (64,), "bn2.beta": (64,), "bn2.mean": (64,), "bn2.var": (64,),
            "bn2.eps": (1,),
            "dense.weight": (self.flatten_dim, NUM_CLASSES),
            "dense.bias": (NUM_CLASSES,),
        }
        for name, tensor in self._tensors().items():
            if tensor.shape != shapes[name]:
                raise WeightFormatError(
                    f"tensor {name}: expected shape {shapes[name]}, got {tensor.shape}"
                )
            if not np.all(np.isfinite(tensor)):
                raise WeightFormatError(f"tensor {name} contains non-finite values")
        if np.any(self.bn1_var <= 0) or np.any(self.bn2_var <= 0):
            raise WeightFormatError("batch-norm running variances must be positive")
        if self.bn1_eps <= 0 or self.bn2_eps <= 0:
            raise WeightFormatError("batch-norm epsilon must be positive")


def save_weights(weights: ModelWeights, path) -> None:
    """Write an HF0W weight file (little-endian, float32 payloads)."""
    out = bytearray()
    out += HF0W_MAGIC
    out += struct.pack("<III", HF0W_VERSION, weights.input_lags, weights.context)
    tensors = weights._tensors()
    out += struct.pack("<I", len(tensors))
    for name, tensor in tensors.items():
        encoded = name.encode("utf-8")
        arr = np.ascontiguousarray(tensor, dtype="<f4")
        out += struct.pack("<H", len(encoded)) + encoded
        out += struct.pack("<B", arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.tobytes()
    Path(path).write_bytes(bytes(out))


def load_weights(path) -> ModelWeights:
    """Load and validate an HF0W weight file."""
    data = Path(path).read_bytes()
    pos = 0

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(data):
            raise WeightFormatError(f"{path}: unexpected end of file at offset {pos}")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    if take(4) != HF0W_MAGIC:
        raise WeightFormatError(f"{path}: bad magic (not an HF0W file)")
    version, input_lags, context = struct.unpack("<III", take(12))
    if version != HF0W_VERSION:
        raise WeightFormatError(f"{path}: unsupported version {version}")
    (count,) = struct.unpack("<I", take(4))
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        (rank,) = struct.unpack("<B", take(1))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        n_values = int(np.prod(dims)) if rank else 1
        payload = take(4 * n_values)
        tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float64)
    missing = [n for n in _TENSOR_NAMES if n not in tensors]
    if missing:
        raise WeightFormatError(f"{path}: missing tensors {missing}")

    weights = ModelWeights(
        conv1_kernel=tensors["conv1.kernel"], conv1_bias=tensors["conv1.bias"],
        bn1_gamma=tensors["bn1.gamma"], bn1_beta=tensors["bn1.beta"],
        bn1_mean=tensors["bn1.mean"], bn1_var=tensors["bn1.var"],
        bn1_eps=float(tensors["bn1.eps"][0]),
        conv2_kernel=tensors["conv2.kernel"], conv2_bias=tensors["conv2.bias"],
        bn2_gamma=tensors["bn2.gamma"], bn2_beta=tensors["bn2.beta"],
        bn2_mean=tensors["bn2.mean"], bn2_var=tensors["bn2.var"],
        bn2_eps=float(tensors["bn2.eps"][0]),
        dense_weight=tensors["dense.weight"], dense_bias=tensors["dense.bias"],
        input_lags=input_lags, context=context,
    )
    weights.validate()
    return weights


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------

def conv2d_same(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """2-D convolution with zero 'same' padding, stride 1.

    x: (H, W, Cin), kernel: (kh, kw, Cin, Cout) -> (H, W, Cout).
    """
    kh, kw = kernel.shape[:2]
    padded = np.pad(x, ((kh // 2, kh // 2), (kw // 2, kw // 2), (0, 0)))
    windows = sliding_window_view(padded, (kh, kw), axis=(0, 1))
    return np.einsum("hwcij,ijco->hwo", windows, kernel, optimize=True) + bias


def max_pool_2x2(x: np.ndarray) -> np.ndarray:
    """2x2 max pooling with stride 2 and floor semantics."""
    h2, w2 = x.shape[0] // 2, x.shape[1] // 2
    return x[: h2 * 2, : w2 * 2].reshape(h2, 2, w2, 2, -1).max(axis=(1, 3))


def _batch_norm(x, gamma, beta, mean, var, eps):
    return (x - mean) / np.sqrt(var + eps) * gamma + beta


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - np.max(logits))
    return shifted / shifted.sum()


def build_input(series: FrameSeries, t: int, input_lags: int = DEFAULT_INPUT_LAGS) -> np.ndarray:
    """Assemble the 5-frame normalized-ACF context grid for frame t.

    Neighbour indices outside the series clamp to the nearest frame.
    """
    if not 0 <= t < len(series):
        raise IndexError(f"frame index {t} out of range 0..{len(series) - 1}")
    rows = []
    for dt in range(-2, 3):
        k = min(max(t + dt, 0), len(series) - 1)
        nacf = normalize_acf(autocorr(series.frames[k]))
        rows.append(nacf.values[:input_lags])
    return np.stack(rows)


def predict(weights: ModelWeights, grid: np.ndarray) -> np.ndarray:
    """Posterior over the 9 classes for one context grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.shape != (weights.context, weights.input_lags):
        raise ValueError(
            f"input grid shape {grid.shape} does not match "
            f"(context={weights.context}, input_lags={weights.input_lags})"
        )
    x = grid[:, :, None]
    x = conv2d_same(x, weights.conv1_kernel, weights.conv1_bias)
    x = np.maximum(x, 0.0)
    x = _batch_norm(x, weights.bn1_gamma, weights.bn1_beta,
                    weights.bn1_mean, weights.bn1_var, weights.bn1_eps)
    x = max_pool_2x2(x)
    x = conv2d_same(x, weights.conv2_kernel, weights.conv2_bias)
    x = np.maximum(x, 0.0)
    x = _batch_norm(x, weights.bn2_gamma, weights.bn2_beta,
                    weights.bn2_mean, weights.bn2_var, weights.bn2_eps)
    logits = x.reshape(-1) @ weights.dense_weight + weights.dense_bias
    return softmax(logits)


def classify_track(weights: ModelWeights, buf: AudioBuffer) -> list[BandLabel]:
    """Per-frame band labels for a 16 kHz buffer (argmax of the posterior)."""
    series = frame_signal(buf)
    nacf = np.stack([
        normalize_acf(autocorr(frame)).values[: weights.input_lags]
        for frame in series.frames
    ])
    labels = []
    last = len(series) - 1
    for t in range(len(series)):
        rows = [nacf[min(max(t + dt, 0), last)] for dt in range(-2, 3)]
        posterior = predict(weights, np.stack(rows))
        labels.append(BandLabel(int(np.argmax(posterior))))
    return labels
