/** Pitch-band partition shared with the extraction pipeline. */

/** Half-open band edges in Hz: band i covers [edges[i], edges[i+1]). */
export const BAND_EDGES_HZ = [50, 75, 100, 150, 200, 300, 400, 600, 800] as const;

export const NUM_CLASSES = 9;

/** Class index of the unvoiced class. */
export const UNVOICED_CLASS = 8;

export const CLASS_NAMES = ["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "v"] as const;

/** Map a fundamental frequency in [50, 800) Hz to its band index 0..7. */
export function bandOfFrequency(f0: number): number {
  if (!(f0 >= BAND_EDGES_HZ[0] && f0 < BAND_EDGES_HZ[BAND_EDGES_HZ.length - 1])) {
    throw new RangeError(`frequency ${f0} Hz outside [50, 800)`);
  }
  let band = 0;
  while (f0 >= BAND_EDGES_HZ[band + 1]) {
    band += 1;
  }
  return band;
}

/** [lo, hi) edges of a band index. */
export function bandEdges(band: number): [number, number] {
  if (!Number.isInteger(band) || band < 0 || band > 7) {
    throw new RangeError(`band index ${band} outside 0..7`);
  }
  return [BAND_EDGES_HZ[band], BAND_EDGES_HZ[band + 1]];
}
