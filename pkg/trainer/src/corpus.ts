/** Synthetic 9-class training corpus with uniform per-class sampling. */
import { Rng } from "./random";
import { UNVOICED_CLASS, bandEdges } from "./bands";
import { CONTEXT_FRAMES, FRAME_LEN, HOP, INPUT_LAGS, clipFeatures, contextGrid } from "./dsp";
import {
  addInPlace, harmonicStack, pulseTrain, sawtooth, silence, tone, vibrato, whiteNoise,
} from "./synth";

export interface TrainingExample {
  /** Flattened 5 x INPUT_LAGS context grid, row-major. */
  grid: Float32Array;
  /** Class index 0..8 (8 = unvoiced). */
  target: number;
}

export interface Dataset {
  train: TrainingExample[];
  validation: TrainingExample[];
  test: TrainingExample[];
}

const CLIP_SECONDS = 0.35;
const SAMPLE_RATE = 16000;

/** Number of frames whose 50 ms window lies fully inside the clip. */
function interiorFrames(nSamples: number): number {
  return Math.floor((nSamples - FRAME_LEN) / HOP) + 1;
}

function voicedClip(band: number, rng: Rng): Float64Array {
  const n = Math.round(CLIP_SECONDS * SAMPLE_RATE);
  const [lo, hi] = bandEdges(band);
  const amp = rng.uniform(0.2, 1.0);
  const kind = rng.int(5);
  let clip: Float64Array;
  if (kind === 0) {
    clip = tone(rng.uniform(lo, hi * 0.999), n, rng.uniform(0, 2 * Math.PI), amp);
  } else if (kind === 1) {
    clip = sawtooth(rng.uniform(lo, hi * 0.999), n, rng.next(), amp);
  } else if (kind === 2) {
    clip = harmonicStack(rng.uniform(lo, hi * 0.999), n, rng, amp);
  } else if (kind === 3) {
    // sparse unipolar excitation: voiced despite most samples being zero
    clip = pulseTrain(rng.uniform(lo, hi * 0.999), n, rng.next(), amp);
  } else {
    // keep the vibrato excursion inside the band
    const carrier = rng.uniform(lo * 1.03, hi / 1.03);
    clip = vibrato(carrier, n, rng, 0.02, rng.uniform(4, 6));
    for (let i = 0; i < n; i++) clip[i] *= amp;
  }
  if (rng.next() < 0.5) {
    // light additive noise keeps the classifier robust (SNR >= ~20 dB)
    addInPlace(clip, whiteNoise(n, rng, amp * rng.uniform(0.005, 0.05)));
  }
  return clip;
}

function unvoicedClip(rng: Rng): Float64Array {
  const n = Math.round(CLIP_SECONDS * SAMPLE_RATE);
  const kind = rng.int(3);
  if (kind === 0) return silence(n);
  if (kind === 1) return whiteNoise(n, rng, rng.uniform(0.01, 0.5));
  // near-silence with a DC-free low hum of negligible energy
  return whiteNoise(n, rng, 1e-4);
}

function examplesFromClip(clip: Float64Array, target: number): TrainingExample[] {
  const rows = clipFeatures(clip);
  const out: TrainingExample[] = [];
  for (let t = 0; t < interiorFrames(clip.length); t++) {
    out.push({ grid: contextGrid(rows, t), target });
  }
  return out;
}

/** Build >= `minExamples` examples, uniformly across the 9 classes. */
export function buildCorpus(minExamples: number, seed: number): TrainingExample[] {
  const rng = new Rng(seed);
  const perClass = Math.ceil(minExamples / 9);
  const all: TrainingExample[] = [];
  for (let cls = 0; cls < 9; cls++) {
    let have = 0;
    while (have < perClass) {
      const clip = cls === UNVOICED_CLASS ? unvoicedClip(rng) : voicedClip(cls, rng);
      const examples = examplesFromClip(clip, cls);
      for (const ex of examples) {
        if (have >= perClass) break;
        all.push(ex);
        have += 1;
      }
    }
  }
  // deterministic shuffle
  for (let i = all.length - 1; i > 0; i--) {
    const j = rng.int(i + 1);
    [all[i], all[j]] = [all[j], all[i]];
  }
  return all;
}

/** 5:3:2 train/validation/test split. */
export function splitDataset(examples: TrainingExample[]): Dataset {
  const nTrain = Math.floor(examples.length * 0.5);
  const nVal = Math.floor(examples.length * 0.3);
  return {
    train: examples.slice(0, nTrain),
    validation: examples.slice(nTrain, nTrain + nVal),
    test: examples.slice(nTrain + nVal),
  };
}

export function toTensors(examples: TrainingExample[]): {
  xs: Float32Array;
  ys: Float32Array;
  shape: [number, number, number, number];
} {
  const gridSize = CONTEXT_FRAMES * INPUT_LAGS;
  const xs = new Float32Array(examples.length * gridSize);
  const ys = new Float32Array(examples.length * 9);
  examples.forEach((ex, i) => {
    xs.set(ex.grid, i * gridSize);
    ys[i * 9 + ex.target] = 1;
  });
  return { xs, ys, shape: [examples.length, CONTEXT_FRAMES, INPUT_LAGS, 1] };
}
