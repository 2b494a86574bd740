"""Command-line front end.

Exit codes: 0 success, 1 processing error, 2 usage error.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import audio_io, decoder, metrics, model
from .audio_io import PIPELINE_RATE
from .bands import BandLabel, band_of_frequency
from .dsp import frame_geometry, num_frames


class _Fail(click.ClickException):
    exit_code = 1


def _processing(fn):
    """Turn module errors into exit code 1 with a message."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (OSError, ValueError) as exc:
            raise _Fail(str(exc)) from exc

    return wrapper


@click.group()
@click.version_option()
def main():
    """Hybrid pitch extraction and evaluation."""


def _oracle_frame_labels(truth: audio_io.PitchTrack, n_samples: int) -> list[BandLabel]:
    """Band labels per analysis frame from a ground-truth track (nearest entry)."""
    _, hop = frame_geometry(PIPELINE_RATE)
    frames = num_frames(n_samples, hop)
    frame_times = np.arange(frames) * hop / PIPELINE_RATE
    idx = np.clip(
        np.round((frame_times - truth.times[0]) / truth.hop_seconds).astype(int),
        0, len(truth) - 1,
    )
    labels = []
    for i in idx:
        if truth.voiced[i]:
            labels.append(band_of_frequency(float(truth.f0_hz[i])))
        else:
            labels.append(BandLabel.V)
    return labels


@main.command()
@click.argument("wav", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              help="HF0W weight file for the band classifier.")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Output pitch-track CSV.")
@click.option("--oracle-truth", type=click.Path(exists=True, dir_okay=False),
              help="Ground-truth CSV; bypasses the classifier (decoder-only mode).")
@click.option("--diagnostics", is_flag=True,
              help="Also write <out>.diag.csv with per-frame decoder internals.")
@_processing
def extract(wav, model_path, out, oracle_truth, diagnostics):
    """Extract a pitch track from a WAV file."""
    if model_path is None and oracle_truth is None:
        raise click.UsageError("either --model or --oracle-truth is required")
    buf = audio_io.resample(audio_io.load_wav(wav), PIPELINE_RATE)
    if oracle_truth is not None:
        truth = audio_io.read_ground_truth(oracle_truth)
        labels = _oracle_frame_labels(truth, len(buf.samples))
    else:
        weights = model.load_weights(model_path)
        labels = model.classify_track(weights, buf)
    diags = [] if diagnostics else None
    track = decoder.decode_pitch(buf, labels, diagnostics=diags)
    audio_io.write_pitch_track(track, out)
    if diags is not None:
        decoder.write_diagnostics(diags, f"{out}.diag.csv")
    click.echo(f"wrote {out} ({len(track)} frames)")


def _evaluate_pair(est_path, ref_path) -> metrics.EvalReport:
    est = audio_io.read_pitch_track(est_path)
    ref = audio_io.read_ground_truth(ref_path)
    return metrics.evaluate(est, ref)


@main.command()
@click.argument("est", type=click.Path(exists=True))
@click.argument("ref", type=click.Path(exists=True))
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Write machine-readable CSV rows here.")
@_processing
def evaluate(est, ref, report_path):
    """Evaluate an estimated track (or directory of tracks) against ground truth."""
    est_p, ref_p = Path(est), Path(ref)
    rows: list[tuple[str, metrics.EvalReport]] = []
    if est_p.is_dir() != ref_p.is_dir():
        raise click.UsageError("est and ref must both be files or both be directories")
    if est_p.is_dir():
        names = sorted(p.name for p in est_p.glob("*.csv"))
        if not names:
            raise _Fail(f"no .csv files in {est_p}")
        for name in names:
            ref_file = ref_p / name
            if not ref_file.exists():
                raise _Fail(f"missing reference for {name}")
            rows.append((name, _evaluate_pair(est_p / name, ref_file)))
    else:
        rows.append((est_p.name, _evaluate_pair(est_p, ref_p)))

    for name, rep in rows:
        click.echo(f"# {name}")
        click.echo(rep.as_text())
    if len(rows) > 1:
        click.echo("# summary (mean, sample variance)")
        for key, (mean, var) in metrics.summarize([r for _, r in rows]).items():
            click.echo(f"{key}_mean={mean:.6g}\n{key}_var={var:.6g}")
    if report_path:
        lines = ["file," + metrics.EvalReport.csv_header()]
        lines += [f"{name},{rep.csv_row()}" for name, rep in rows]
        Path(report_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@main.command("mix-noise")
@click.argument("clean_wav", type=click.Path(exists=True, dir_okay=False))
@click.argument("noise_wav", type=click.Path(exists=True, dir_okay=False))
@click.argument("snr_db", type=float)
@click.argument("out_wav", type=click.Path(dir_okay=False))
@_processing
def mix_noise_cmd(clean_wav, noise_wav, snr_db, out_wav):
    """Mix noise into a clean signal at a given SNR (float32 output, no clipping)."""
    clean = audio_io.load_wav(clean_wav)
    noise = audio_io.load_wav(noise_wav)
    mixed = audio_io.mix_noise(clean, noise, snr_db)
    audio_io.save_wav(out_wav, mixed, fmt="float32")
    click.echo(f"wrote {out_wav} at {snr_db:g} dB SNR")


@main.command("inspect-weights")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@_processing
def inspect_weights(model_path):
    """Print tensor shapes and the parameter count of a weight file."""
    weights = model.load_weights(model_path)
    for name, tensor in weights._tensors().items():
        click.echo(f"{name}: {'x'.join(map(str, tensor.shape))}")
    click.echo(f"input_lags: {weights.input_lags}")
    click.echo(f"context: {weights.context}")
    click.echo(f"flatten_dim: {weights.flatten_dim}")
    click.echo(f"parameters: {weights.parameter_count}")


if __name__ == "__main__":
    sys.exit(main())
