/** Band-classifier model built from primitive tensor ops.
 *
 * The fixed architecture is: conv 3x3x64 -> ReLU -> batch-norm -> max-pool
 * 2x2 -> conv 3x3x64 -> ReLU -> batch-norm -> flatten -> dense(9) -> softmax,
 * trained with SGD (momentum 0.9, lr 0.001, batch 64), dropout 0.2 on both
 * conv blocks, cross-entropy loss, and early stopping on validation accuracy.
 *
 * Convolutions are composed from pad/slice/matMul so that the whole training
 * graph (forward and gradients) runs on the wasm backend, which lacks the
 * dedicated conv-backprop kernels.
 */
import * as tf from "@tensorflow/tfjs";
import * as path from "path";

import { CONTEXT_FRAMES, INPUT_LAGS } from "./dsp";
import { NamedTensor, WeightFile } from "./hf0w";
import { Dataset, TrainingExample, toTensors } from "./corpus";
import { Rng } from "./random";

export const BN_EPSILON = 1e-3;
export const FLATTEN_DIM =
  Math.floor(CONTEXT_FRAMES / 2) * Math.floor(INPUT_LAGS / 2) * 64;
const GRID_SIZE = CONTEXT_FRAMES * INPUT_LAGS;
const BN_UPDATE = 0.1; // running-stat EMA step per batch
const DROPOUT_RATE = 0.2;

export interface TrainOptions {
  maxEpochs: number;
  patience: number;
  batchSize: number;
  learningRate: number;
  momentum: number;
  seed: number;
  /** Stop starting new epochs once this much wall time has elapsed. */
  timeBudgetSeconds: number;
  verbose?: boolean;
}

export const DEFAULT_TRAIN_OPTIONS: TrainOptions = {
  maxEpochs: 40,
  patience: 10,
  batchSize: 64,
  learningRate: 0.001,
  momentum: 0.9,
  seed: 4242,
  timeBudgetSeconds: 7 * 60,
};

/** Prefer the wasm backend when its package is installed; fall back to cpu. */
export async function selectBackend(): Promise<string> {
  try {
    // eslint-disable-next-line @typescript-eslint/no-var-requires
    const wasm = require("@tensorflow/tfjs-backend-wasm");
    const wasmDir = path.dirname(require.resolve("@tensorflow/tfjs-backend-wasm")) + "/";
    wasm.setWasmPaths(wasmDir);
    await tf.setBackend("wasm");
  } catch {
    await tf.setBackend("cpu");
  }
  await tf.ready();
  return tf.getBackend();
}

export interface ModelParams {
  conv1Kernel: tf.Variable;
  conv1Bias: tf.Variable;
  bn1Gamma: tf.Variable;
  bn1Beta: tf.Variable;
  bn1Mean: Float32Array;
  bn1Var: Float32Array;
  conv2Kernel: tf.Variable;
  conv2Bias: tf.Variable;
  bn2Gamma: tf.Variable;
  bn2Beta: tf.Variable;
  bn2Mean: Float32Array;
  bn2Var: Float32Array;
  denseWeight: tf.Variable;
  denseBias: tf.Variable;
}

function trainables(params: ModelParams): tf.Variable[] {
  return [
    params.conv1Kernel, params.conv1Bias, params.bn1Gamma, params.bn1Beta,
    params.conv2Kernel, params.conv2Bias, params.bn2Gamma, params.bn2Beta,
    params.denseWeight, params.denseBias,
  ];
}

function glorot(rng: Rng, shape: number[], fanIn: number, fanOut: number): tf.Tensor {
  const limit = Math.sqrt(6 / (fanIn + fanOut));
  const size = shape.reduce((a, b) => a * b, 1);
  const data = new Float32Array(size);
  for (let i = 0; i < size; i++) {
    data[i] = rng.uniform(-limit, limit);
  }
  return tf.tensor(data, shape);
}

let paramSetCounter = 0;

export function initParams(seed: number): ModelParams {
  const rng = new Rng(seed);
  // the engine requires globally unique variable names, so tag each set
  const id = paramSetCounter++;
  const v = (t: tf.Tensor, name: string) => tf.variable(t, true, `${name}/${id}`);
  return {
    conv1Kernel: v(glorot(rng, [3, 3, 1, 64], 9, 9 * 64), "conv1Kernel"),
    conv1Bias: v(tf.zeros([64]), "conv1Bias"),
    bn1Gamma: v(tf.ones([64]), "bn1Gamma"),
    bn1Beta: v(tf.zeros([64]), "bn1Beta"),
    bn1Mean: new Float32Array(64),
    bn1Var: new Float32Array(64).fill(1),
    conv2Kernel: v(glorot(rng, [3, 3, 64, 64], 9 * 64, 9 * 64), "conv2Kernel"),
    conv2Bias: v(tf.zeros([64]), "conv2Bias"),
    bn2Gamma: v(tf.ones([64]), "bn2Gamma"),
    bn2Beta: v(tf.zeros([64]), "bn2Beta"),
    bn2Mean: new Float32Array(64),
    bn2Var: new Float32Array(64).fill(1),
    denseWeight: v(glorot(rng, [FLATTEN_DIM, 9], FLATTEN_DIM, 9), "denseWeight"),
    denseBias: v(tf.zeros([9]), "denseBias"),
  };
}

export function disposeParams(params: ModelParams): void {
  trainables(params).forEach((v) => v.dispose());
}

/** 'same' 3x3 convolution as nine shifted channel matmuls (autograd-safe). */
function conv3x3(x: tf.Tensor4D, kernel: tf.Tensor, bias: tf.Tensor): tf.Tensor4D {
  const [b, h, w, cin] = x.shape;
  const cout = kernel.shape[3] as number;
  const padded = tf.pad(x, [[0, 0], [1, 1], [1, 1], [0, 0]]);
  let acc: tf.Tensor | null = null;
  for (let di = 0; di < 3; di++) {
    for (let dj = 0; dj < 3; dj++) {
      const patch = tf
        .slice(padded, [0, di, dj, 0], [b, h, w, cin])
        .reshape([b * h * w, cin]);
      const wSlice = tf
        .slice(kernel, [di, dj, 0, 0], [1, 1, cin, cout])
        .reshape([cin, cout]);
      const term = tf.matMul(patch, wSlice);
      acc = acc === null ? term : tf.add(acc, term);
    }
  }
  return (acc as tf.Tensor).reshape([b, h, w, cout]).add(bias) as tf.Tensor4D;
}

/** 2x2/stride-2 max pooling with floor semantics (odd edges dropped). */
function maxPool2x2(x: tf.Tensor4D): tf.Tensor4D {
  const [b, h, w, c] = x.shape;
  const h2 = Math.floor(h / 2);
  const w2 = Math.floor(w / 2);
  const cropped = tf.slice(x, [0, 0, 0, 0], [b, h2 * 2, w2 * 2, c]);
  return tf.max(cropped.reshape([b, h2, 2, w2, 2, c]), [2, 4]) as tf.Tensor4D;
}

interface BatchMoments {
  bn1Mean: Float32Array;
  bn1Var: Float32Array;
  bn2Mean: Float32Array;
  bn2Var: Float32Array;
}

interface ForwardOptions {
  training: boolean;
  dropoutRng?: Rng;
  /** Filled with the batch moments when training. */
  moments?: BatchMoments;
}

function dropoutMask(rng: Rng, shape: number[]): tf.Tensor {
  const size = shape.reduce((a, b) => a * b, 1);
  const data = new Float32Array(size);
  const keepScale = 1 / (1 - DROPOUT_RATE);
  for (let i = 0; i < size; i++) {
    data[i] = rng.next() >= DROPOUT_RATE ? keepScale : 0;
  }
  return tf.tensor(data, shape);
}

/** Logits (pre-softmax) for a batch. Training mode uses batch-norm batch
 * statistics and applies dropout; inference mode uses the running statistics.
 */
export function forwardLogits(
  x: tf.Tensor4D,
  params: ModelParams,
  opts: ForwardOptions,
): tf.Tensor2D {
  const batchNorm = (
    h: tf.Tensor4D,
    gamma: tf.Variable,
    beta: tf.Variable,
    runningMean: Float32Array,
    runningVar: Float32Array,
    slot: "bn1" | "bn2",
  ): tf.Tensor4D => {
    if (opts.training) {
      const m = tf.moments(h, [0, 1, 2]);
      if (opts.moments) {
        opts.moments[`${slot}Mean`] = m.mean.dataSync() as Float32Array;
        opts.moments[`${slot}Var`] = m.variance.dataSync() as Float32Array;
      }
      return h
        .sub(m.mean)
        .div(tf.sqrt(m.variance.add(BN_EPSILON)))
        .mul(gamma)
        .add(beta) as tf.Tensor4D;
    }
    const mean = tf.tensor1d(runningMean);
    const variance = tf.tensor1d(runningVar);
    return h.sub(mean).div(tf.sqrt(variance.add(BN_EPSILON))).mul(gamma).add(beta) as tf.Tensor4D;
  };

  let h = tf.maximum(conv3x3(x, params.conv1Kernel, params.conv1Bias), 0) as tf.Tensor4D;
  h = batchNorm(h, params.bn1Gamma, params.bn1Beta, params.bn1Mean, params.bn1Var, "bn1");
  h = maxPool2x2(h);
  if (opts.training && opts.dropoutRng) {
    h = h.mul(dropoutMask(opts.dropoutRng, h.shape)) as tf.Tensor4D;
  }
  h = tf.maximum(conv3x3(h, params.conv2Kernel, params.conv2Bias), 0) as tf.Tensor4D;
  h = batchNorm(h, params.bn2Gamma, params.bn2Beta, params.bn2Mean, params.bn2Var, "bn2");
  if (opts.training && opts.dropoutRng) {
    h = h.mul(dropoutMask(opts.dropoutRng, h.shape)) as tf.Tensor4D;
  }
  const flat = h.reshape([x.shape[0], FLATTEN_DIM]);
  return tf.matMul(flat, params.denseWeight).add(params.denseBias) as tf.Tensor2D;
}

export interface TrainResult {
  params: ModelParams;
  epochs: number;
  bestValAccuracy: number;
}

interface Snapshot {
  tensors: Float32Array[];
  bn1Mean: Float32Array;
  bn1Var: Float32Array;
  bn2Mean: Float32Array;
  bn2Var: Float32Array;
}

function snapshot(params: ModelParams): Snapshot {
  return {
    tensors: trainables(params).map((v) => v.dataSync().slice() as Float32Array),
    bn1Mean: params.bn1Mean.slice(),
    bn1Var: params.bn1Var.slice(),
    bn2Mean: params.bn2Mean.slice(),
    bn2Var: params.bn2Var.slice(),
  };
}

function restore(params: ModelParams, snap: Snapshot): void {
  trainables(params).forEach((v, i) => {
    const t = tf.tensor(snap.tensors[i], v.shape);
    v.assign(t);
    t.dispose();
  });
  params.bn1Mean.set(snap.bn1Mean);
  params.bn1Var.set(snap.bn1Var);
  params.bn2Mean.set(snap.bn2Mean);
  params.bn2Var.set(snap.bn2Var);
}

function emaUpdate(running: Float32Array, batch: Float32Array): void {
  for (let i = 0; i < running.length; i++) {
    running[i] = (1 - BN_UPDATE) * running[i] + BN_UPDATE * batch[i];
  }
}

/** SGD with momentum, cross-entropy loss, dropout, early stopping on
 * validation accuracy with best-weight restore, and a wall-time budget.
 */
export async function train(
  dataset: Dataset,
  options: TrainOptions = DEFAULT_TRAIN_OPTIONS,
): Promise<TrainResult> {
  if (dataset.train.length === 0 || dataset.validation.length === 0) {
    throw new Error("training and validation sets must be non-empty");
  }
  const params = initParams(options.seed);
  const optimizer = tf.train.momentum(options.learningRate, options.momentum);
  const rng = new Rng(options.seed ^ 0x5eed);
  const started = Date.now();

  const trainT = toTensors(dataset.train);
  const n = dataset.train.length;
  const order = Array.from({ length: n }, (_, i) => i);

  let best = -Infinity;
  let bestSnap: Snapshot | null = null;
  let sinceBest = 0;
  let epochs = 0;

  for (let epoch = 0; epoch < options.maxEpochs; epoch++) {
    // deterministic shuffle
    for (let i = n - 1; i > 0; i--) {
      const j = rng.int(i + 1);
      [order[i], order[j]] = [order[j], order[i]];
    }
    let lossSum = 0;
    let batches = 0;
    for (let start = 0; start < n; start += options.batchSize) {
      const idx = order.slice(start, start + options.batchSize);
      const xsData = new Float32Array(idx.length * GRID_SIZE);
      const ysData = new Float32Array(idx.length * 9);
      idx.forEach((src, row) => {
        xsData.set(trainT.xs.subarray(src * GRID_SIZE, (src + 1) * GRID_SIZE), row * GRID_SIZE);
        ysData.set(trainT.ys.subarray(src * 9, (src + 1) * 9), row * 9);
      });
      const xs = tf.tensor4d(xsData, [idx.length, CONTEXT_FRAMES, INPUT_LAGS, 1]);
      const ys = tf.tensor2d(ysData, [idx.length, 9]);
      const moments: BatchMoments = {
        bn1Mean: params.bn1Mean,
        bn1Var: params.bn1Var,
        bn2Mean: params.bn2Mean,
        bn2Var: params.bn2Var,
      };

      const { value, grads } = tf.variableGrads(() => {
        const logits = forwardLogits(xs, params, {
          training: true,
          dropoutRng: rng,
          moments,
        });
        const logProb = logits.sub(tf.logSumExp(logits, 1, true));
        return tf.neg(tf.sum(ys.mul(logProb))).div(idx.length) as tf.Scalar;
      }, trainables(params));
      const loss = value.dataSync()[0];
      if (!Number.isFinite(loss)) {
        throw new Error(`training diverged: loss = ${loss} in epoch ${epoch + 1}`);
      }
      // variableGrads keys the map by variable name, which is what the
      // optimizer expects; the declared types just disagree on the value type.
      optimizer.applyGradients(grads as unknown as Parameters<typeof optimizer.applyGradients>[0]);
      value.dispose();
      Object.values(grads).forEach((g) => g.dispose());
      xs.dispose();
      ys.dispose();
      emaUpdate(params.bn1Mean, moments.bn1Mean);
      emaUpdate(params.bn1Var, moments.bn1Var);
      emaUpdate(params.bn2Mean, moments.bn2Mean);
      emaUpdate(params.bn2Var, moments.bn2Var);
      lossSum += loss;
      batches += 1;
    }

    epochs = epoch + 1;
    const valAcc = accuracy(params, dataset.validation);
    if (options.verbose) {
      console.log(
        `epoch ${epochs}: loss=${(lossSum / batches).toFixed(4)} val_acc=${valAcc.toFixed(4)} ` +
          `(${((Date.now() - started) / 1000).toFixed(0)} s)`,
      );
    }
    if (valAcc > best) {
      best = valAcc;
      bestSnap = snapshot(params);
      sinceBest = 0;
    } else {
      sinceBest += 1;
      if (sinceBest >= options.patience) break;
    }
    if ((Date.now() - started) / 1000 > options.timeBudgetSeconds) {
      if (options.verbose) console.log("time budget reached; stopping");
      break;
    }
  }

  if (bestSnap) restore(params, bestSnap);
  optimizer.dispose();
  return { params, epochs, bestValAccuracy: best };
}

/** Fraction of examples whose argmax posterior matches the target. */
export function accuracy(params: ModelParams, examples: TrainingExample[]): number {
  if (examples.length === 0) return 0;
  let hits = 0;
  const batch = 256;
  for (let start = 0; start < examples.length; start += batch) {
    const slice = examples.slice(start, start + batch);
    const posteriors = predictGrids(params, slice.map((e) => e.grid));
    posteriors.forEach((p, i) => {
      let arg = 0;
      for (let c = 1; c < 9; c++) if (p[c] > p[arg]) arg = c;
      if (arg === slice[i].target) hits += 1;
    });
  }
  return hits / examples.length;
}

/** Posterior rows (inference mode) for a batch of flattened grids. */
export function predictGrids(params: ModelParams, grids: Float32Array[]): Float32Array[] {
  const xsData = new Float32Array(grids.length * GRID_SIZE);
  grids.forEach((g, i) => xsData.set(g, i * GRID_SIZE));
  const flat = tf.tidy(() => {
    const xs = tf.tensor4d(xsData, [grids.length, CONTEXT_FRAMES, INPUT_LAGS, 1]);
    const logits = forwardLogits(xs, params, { training: false });
    return tf.softmax(logits);
  });
  const data = flat.dataSync() as Float32Array;
  flat.dispose();
  return grids.map((_, i) => Float32Array.from(data.subarray(i * 9, (i + 1) * 9)));
}

/** Map the fitted parameters onto the portable tensor list (inference form). */
export function toWeightFile(params: ModelParams): WeightFile {
  const grab = (v: tf.Variable): Float32Array => v.dataSync().slice() as Float32Array;
  const tensors: NamedTensor[] = [
    { name: "conv1.kernel", dims: [3, 3, 1, 64], data: grab(params.conv1Kernel) },
    { name: "conv1.bias", dims: [64], data: grab(params.conv1Bias) },
    { name: "bn1.gamma", dims: [64], data: grab(params.bn1Gamma) },
    { name: "bn1.beta", dims: [64], data: grab(params.bn1Beta) },
    { name: "bn1.mean", dims: [64], data: params.bn1Mean.slice() },
    { name: "bn1.var", dims: [64], data: params.bn1Var.slice() },
    { name: "bn1.eps", dims: [1], data: Float32Array.of(BN_EPSILON) },
    { name: "conv2.kernel", dims: [3, 3, 64, 64], data: grab(params.conv2Kernel) },
    { name: "conv2.bias", dims: [64], data: grab(params.conv2Bias) },
    { name: "bn2.gamma", dims: [64], data: grab(params.bn2Gamma) },
    { name: "bn2.beta", dims: [64], data: grab(params.bn2Beta) },
    { name: "bn2.mean", dims: [64], data: params.bn2Mean.slice() },
    { name: "bn2.var", dims: [64], data: params.bn2Var.slice() },
    { name: "bn2.eps", dims: [1], data: Float32Array.of(BN_EPSILON) },
    { name: "dense.weight", dims: [FLATTEN_DIM, 9], data: grab(params.denseWeight) },
    { name: "dense.bias", dims: [9], data: grab(params.denseBias) },
  ];
  return { inputLags: INPUT_LAGS, context: CONTEXT_FRAMES, tensors };
}
