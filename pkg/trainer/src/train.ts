/** End-to-end training entry point.
 *
 * Builds the synthetic corpus, fits the band classifier, and writes:
 *   artifacts/model.hf0w          portable weight file
 *   artifacts/fixtures.bin        golden (grid, posterior) pairs
 *   artifacts/feature_parity.bin  raw frames + their feature rows
 *   artifacts/summary.json        corpus size, accuracy, runtime
 */
import * as fs from "fs";
import * as path from "path";

import { Rng } from "./random";
import { buildCorpus, splitDataset } from "./corpus";
import { FRAME_LEN, INPUT_LAGS, autocorr, normalizeAcf } from "./dsp";
import { encodeFixtures, encodeWeights } from "./hf0w";
import {
  DEFAULT_TRAIN_OPTIONS,
  accuracy,
  predictGrids,
  selectBackend,
  toWeightFile,
  train,
} from "./model";
import { sawtooth, whiteNoise } from "./synth";

const CORPUS_SIZE = 10350; // >= 10k, divisible by 9 classes
const CORPUS_SEED = 20250823;
const FIXTURE_COUNT = 24;

/** Raw 800-sample frames plus their 320-lag feature rows, for the
 * cross-component feature-parity check: u32 count, then per record the frame
 * as float64 LE and the features as float32 LE.
 */
function encodeFeatureParity(count: number, seed: number): Buffer {
  const rng = new Rng(seed);
  const out = Buffer.alloc(4 + count * (8 * FRAME_LEN + 4 * INPUT_LAGS));
  out.writeUInt32LE(count, 0);
  let pos = 4;
  for (let i = 0; i < count; i++) {
    let frame: Float64Array;
    if (i % 3 === 0) {
      frame = whiteNoise(FRAME_LEN, rng, rng.uniform(0.05, 1));
    } else if (i % 3 === 1) {
      frame = sawtooth(rng.uniform(55, 780), FRAME_LEN, rng.next(), rng.uniform(0.2, 1));
    } else {
      frame = new Float64Array(FRAME_LEN); // silence row must map to zeros
    }
    const features = normalizeAcf(autocorr(frame, INPUT_LAGS));
    for (const v of frame) {
      out.writeDoubleLE(v, pos);
      pos += 8;
    }
    for (const v of features) {
      out.writeFloatLE(v, pos);
      pos += 4;
    }
  }
  return out;
}

async function main(): Promise<void> {
  const outDir = path.join(__dirname, "..", "artifacts");
  fs.mkdirSync(outDir, { recursive: true });
  const started = Date.now();

  const backend = await selectBackend();
  console.log(`backend: ${backend}`);

  console.log(`building corpus of ${CORPUS_SIZE} examples ...`);
  const corpus = buildCorpus(CORPUS_SIZE, CORPUS_SEED);
  const dataset = splitDataset(corpus);
  console.log(
    `train ${dataset.train.length} / validation ${dataset.validation.length} ` +
      `/ test ${dataset.test.length}`,
  );

  const result = await train(dataset, { ...DEFAULT_TRAIN_OPTIONS, verbose: true });
  const heldOut = accuracy(result.params, dataset.test);
  console.log(
    `stopped after ${result.epochs} epochs; best val acc ${result.bestValAccuracy.toFixed(4)}, ` +
      `held-out acc ${heldOut.toFixed(4)}`,
  );

  fs.writeFileSync(path.join(outDir, "model.hf0w"), encodeWeights(toWeightFile(result.params)));

  const fixtureGrids = dataset.test.slice(0, FIXTURE_COUNT).map((e) => e.grid);
  const posteriors = predictGrids(result.params, fixtureGrids);
  // determinism check: replaying the same grids must reproduce the posteriors
  const replay = predictGrids(result.params, fixtureGrids);
  for (let i = 0; i < posteriors.length; i++) {
    for (let j = 0; j < 9; j++) {
      if (posteriors[i][j] !== replay[i][j]) {
        throw new Error(`fixture replay mismatch at fixture ${i} class ${j}`);
      }
    }
  }
  fs.writeFileSync(
    path.join(outDir, "fixtures.bin"),
    encodeFixtures(fixtureGrids, posteriors, fixtureGrids[0].length),
  );

  fs.writeFileSync(path.join(outDir, "feature_parity.bin"), encodeFeatureParity(30, 777));

  const summary = {
    backend,
    examples: corpus.length,
    trainExamples: dataset.train.length,
    validationExamples: dataset.validation.length,
    testExamples: dataset.test.length,
    epochs: result.epochs,
    bestValAccuracy: result.bestValAccuracy,
    heldOutAccuracy: heldOut,
    fixtures: FIXTURE_COUNT,
    trainSeconds: (Date.now() - started) / 1000,
  };
  fs.writeFileSync(path.join(outDir, "summary.json"), JSON.stringify(summary, null, 2) + "\n");
  console.log(JSON.stringify(summary, null, 2));
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
