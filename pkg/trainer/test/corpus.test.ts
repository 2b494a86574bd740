import { describe, expect, it } from "vitest";

import { bandOfFrequency, bandEdges, UNVOICED_CLASS } from "../src/bands";
import { buildCorpus, splitDataset } from "../src/corpus";
import { FRAME_LEN, INPUT_LAGS, clipFeatures, contextGrid } from "../src/dsp";
import { tone } from "../src/synth";

describe("band partition", () => {
  it("maps edge and interior frequencies to the published bands", () => {
    expect(bandOfFrequency(50)).toBe(0);
    expect(bandOfFrequency(74.999)).toBe(0);
    expect(bandOfFrequency(75)).toBe(1); // half-open: edge joins the upper band
    expect(bandOfFrequency(250)).toBe(4);
    expect(bandOfFrequency(799.999)).toBe(7);
    expect(() => bandOfFrequency(800)).toThrow(RangeError);
    expect(() => bandOfFrequency(49.9)).toThrow(RangeError);
  });

  it("edges bracket every band", () => {
    for (let band = 0; band < 8; band++) {
      const [lo, hi] = bandEdges(band);
      expect(lo).toBeLessThan(hi);
      expect(bandOfFrequency(lo)).toBe(band);
    }
  });
});

describe("corpus construction", () => {
  it("targets the correct band for a pure tone clip", () => {
    const rows = clipFeatures(tone(250, 4 * FRAME_LEN));
    const grid = contextGrid(rows, 3);
    expect(grid.length).toBe(5 * INPUT_LAGS);
    expect(bandOfFrequency(250)).toBe(4); // the label such frames receive
  });

  it("is balanced, labeled 0..8, and deterministic", () => {
    const corpus = buildCorpus(900, 123);
    expect(corpus.length).toBeGreaterThanOrEqual(900);
    const counts = new Array(9).fill(0);
    for (const ex of corpus) {
      expect(ex.target).toBeGreaterThanOrEqual(0);
      expect(ex.target).toBeLessThanOrEqual(8);
      expect(ex.grid.length).toBe(5 * INPUT_LAGS);
      counts[ex.target] += 1;
    }
    expect(Math.min(...counts)).toBe(Math.max(...counts)); // uniform per class
    expect(counts[UNVOICED_CLASS]).toBe(100);

    const again = buildCorpus(900, 123);
    expect(again.length).toBe(corpus.length);
    for (let i = 0; i < 5; i++) {
      expect(again[i].target).toBe(corpus[i].target);
      expect(Array.from(again[i].grid.subarray(0, 8))).toEqual(
        Array.from(corpus[i].grid.subarray(0, 8)),
      );
    }
  });

  it("splits 5:3:2 without overlap", () => {
    const corpus = buildCorpus(900, 7);
    const { train, validation, test } = splitDataset(corpus);
    expect(train.length).toBe(Math.floor(corpus.length * 0.5));
    expect(validation.length).toBe(Math.floor(corpus.length * 0.3));
    expect(train.length + validation.length + test.length).toBe(corpus.length);
  });

  it("grid values are finite and bounded by the lag-0 normalization", () => {
    const corpus = buildCorpus(90, 42);
    for (const ex of corpus.slice(0, 30)) {
      for (const v of ex.grid) {
        expect(Number.isFinite(v)).toBe(true);
        expect(Math.abs(v)).toBeLessThanOrEqual(1 + 1e-6);
      }
    }
  });
});
