/** Feature extraction byte-compatible with the inference pipeline:
 * 50 ms frames at a 10 ms hop, zero-extended autocorrelation scaled by 1/N,
 * lag-0 normalization, truncation to the first INPUT_LAGS lags, and 5-frame
 * context assembly with edge clamping.
 */

export const SAMPLE_RATE = 16000;
export const FRAME_LEN = 800; // 50 ms
export const HOP = 160; // 10 ms
export const INPUT_LAGS = 320;
export const CONTEXT_FRAMES = 5;
export const SILENCE_ENERGY_EPS = 1e-10;

export function numFrames(nSamples: number): number {
  return Math.ceil(nSamples / HOP);
}

/** Frame t covers samples [t*HOP, t*HOP + FRAME_LEN), zero-padded past the end. */
export function frameAt(samples: Float64Array, t: number): Float64Array {
  const frame = new Float64Array(FRAME_LEN);
  const start = t * HOP;
  const avail = Math.max(0, Math.min(FRAME_LEN, samples.length - start));
  for (let j = 0; j < avail; j++) {
    frame[j] = samples[start + j];
  }
  return frame;
}

/** Zero-extended ACF over the first `lags` lags:
 * r[tau] = (1/N) * sum_{j=0}^{N-1-tau} x[j] * x[j+tau].
 */
export function autocorr(frame: Float64Array, lags: number): Float64Array {
  const n = frame.length;
  const r = new Float64Array(lags);
  for (let tau = 0; tau < lags; tau++) {
    let acc = 0;
    for (let j = 0; j + tau < n; j++) {
      acc += frame[j] * frame[j + tau];
    }
    r[tau] = acc / n;
  }
  return r;
}

/** Divide by the lag-0 energy; silent frames (r[0] <= eps) map to all zeros. */
export function normalizeAcf(r: Float64Array): Float64Array {
  const out = new Float64Array(r.length);
  if (r[0] <= SILENCE_ENERGY_EPS) {
    return out;
  }
  for (let i = 0; i < r.length; i++) {
    out[i] = r[i] / r[0];
  }
  return out;
}

/** Normalized truncated ACF row for every frame of a clip. */
export function clipFeatures(samples: Float64Array): Float64Array[] {
  if (samples.length === 0) {
    throw new Error("cannot frame an empty signal");
  }
  const rows: Float64Array[] = [];
  const count = numFrames(samples.length);
  for (let t = 0; t < count; t++) {
    rows.push(normalizeAcf(autocorr(frameAt(samples, t), INPUT_LAGS)));
  }
  return rows;
}

/** 5-frame context grid for frame t; out-of-range neighbours clamp. */
export function contextGrid(rows: Float64Array[], t: number): Float32Array {
  if (t < 0 || t >= rows.length) {
    throw new RangeError(`frame index ${t} out of range 0..${rows.length - 1}`);
  }
  const grid = new Float32Array(CONTEXT_FRAMES * INPUT_LAGS);
  for (let dt = -2; dt <= 2; dt++) {
    const k = Math.min(Math.max(t + dt, 0), rows.length - 1);
    grid.set(Float32Array.from(rows[k]), (dt + 2) * INPUT_LAGS);
  }
  return grid;
}
