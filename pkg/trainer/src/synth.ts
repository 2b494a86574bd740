/** Synthetic waveform generators for the training corpus. */
import { Rng } from "./random";
import { SAMPLE_RATE } from "./dsp";

export function tone(f0: number, n: number, phase = 0, amp = 1): Float64Array {
  const out = new Float64Array(n);
  const w = (2 * Math.PI * f0) / SAMPLE_RATE;
  for (let i = 0; i < n; i++) {
    out[i] = amp * Math.sin(w * i + phase);
  }
  return out;
}

export function sawtooth(f0: number, n: number, phase = 0, amp = 1): Float64Array {
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const t = (f0 * i) / SAMPLE_RATE + phase;
    out[i] = amp * (2 * (t - Math.floor(t)) - 1);
  }
  return out;
}

/** Band-limited harmonic stack with random per-harmonic amplitudes. */
export function harmonicStack(f0: number, n: number, rng: Rng, amp = 1): Float64Array {
  const out = new Float64Array(n);
  const maxHarmonic = Math.max(1, Math.floor(SAMPLE_RATE / 2 / f0));
  const count = Math.min(maxHarmonic, 8);
  for (let h = 1; h <= count; h++) {
    const a = (amp / h) * rng.uniform(0.5, 1.0);
    const phase = rng.uniform(0, 2 * Math.PI);
    const w = (2 * Math.PI * f0 * h) / SAMPLE_RATE;
    for (let i = 0; i < n; i++) {
      out[i] += a * Math.sin(w * i + phase);
    }
  }
  return out;
}

/** Sinusoidal vibrato around a carrier; depth is a relative excursion. */
export function vibrato(
  carrier: number,
  n: number,
  rng: Rng,
  depth = 0.02,
  rateHz = 5,
): Float64Array {
  const out = new Float64Array(n);
  const phase0 = rng.uniform(0, 2 * Math.PI);
  let phase = rng.uniform(0, 2 * Math.PI);
  for (let i = 0; i < n; i++) {
    const inst = carrier * (1 + depth * Math.sin((2 * Math.PI * rateHz * i) / SAMPLE_RATE + phase0));
    phase += (2 * Math.PI * inst) / SAMPLE_RATE;
    out[i] = Math.sin(phase);
  }
  return out;
}

/** Sparse glottal-style impulse train (one unipolar pulse per period). */
export function pulseTrain(f0: number, n: number, phase = 0, amp = 1): Float64Array {
  const out = new Float64Array(n);
  const period = SAMPLE_RATE / f0;
  for (let i = 0; i < n; i++) {
    const t = i / period + phase;
    if (Math.floor(t) !== Math.floor(t - 1 / period)) {
      out[i] = amp;
    }
  }
  return out;
}

export function whiteNoise(n: number, rng: Rng, amp = 1): Float64Array {
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = amp * rng.gaussian();
  }
  return out;
}

export function silence(n: number): Float64Array {
  return new Float64Array(n);
}

export function addInPlace(target: Float64Array, addend: Float64Array): Float64Array {
  for (let i = 0; i < target.length; i++) {
    target[i] += addend[i];
  }
  return target;
}
