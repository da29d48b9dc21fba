/**
 * Minibatch MSE training on the exported train split. Deterministic per
 * seed: subsampling is evenly spaced, shuffling and init are seeded, Adam
 * runs on mean gradients.
 */

import { SplitTensors, sample } from './loader';
import { ArchName, Model, buildModel } from './models';
import { mulberry32, shuffle } from './rng';

export interface TrainConfig {
  arch: ArchName;
  seed: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  /** cap on training samples; evenly spaced subsample when exceeded */
  trainCap: number;
}

export const TRAIN_DEFAULTS: Omit<TrainConfig, 'arch' | 'seed'> = {
  epochs: 6,
  batchSize: 32,
  learningRate: 1e-3,
  trainCap: 1200,
};

export interface TrainResult {
  model: Model;
  epochLosses: number[];
  nTrain: number;
}

export class DivergenceError extends Error {}

export function evenIndices(total: number, cap: number): Int32Array {
  const n = Math.min(total, cap);
  const out = new Int32Array(n);
  if (n === total) {
    for (let i = 0; i < n; i++) out[i] = i;
  } else {
    for (let i = 0; i < n; i++) out[i] = Math.floor((i * total) / n);
  }
  return out;
}

export function trainModel(train: SplitTensors, cfg: TrainConfig): TrainResult {
  const model = buildModel(cfg.arch, train.window, train.features, cfg.seed);
  const indices = evenIndices(train.n, cfg.trainCap);
  const order = Int32Array.from(indices);
  const rng = mulberry32(cfg.seed ^ 0x5eed);
  const epochLosses: number[] = [];
  let adamT = 0;
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    shuffle(order, rng);
    let lossSum = 0;
    for (let lo = 0; lo < order.length; lo += cfg.batchSize) {
      const hi = Math.min(lo + cfg.batchSize, order.length);
      model.zeroGrad();
      for (let i = lo; i < hi; i++) {
        const idx = order[i];
        const target = train.y[idx];
        const out = model.accumulate(sample(train, idx), target);
        const residual = out - target;
        lossSum += residual * residual;
      }
      adamT += 1;
      model.adamStep(cfg.learningRate, adamT, hi - lo);
    }
    const epochLoss = lossSum / order.length;
    if (!Number.isFinite(epochLoss)) {
      throw new DivergenceError(`non-finite training loss at epoch ${epoch}`);
    }
    epochLosses.push(epochLoss);
  }
  return { model, epochLosses, nTrain: order.length };
}
