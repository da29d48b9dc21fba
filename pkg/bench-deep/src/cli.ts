#!/usr/bin/env node
/**
 * bench-deep --dataset <dir> --arch conv_recurrent --seeds 3 --report <path>
 *
 * Trains the requested toy architecture on the exported train split for each
 * seed, reports per-split RMSE (mean +- std over seeds) in the shared report
 * schema, and emits before/after-shock metrics per shock type.
 */

import {
  EVAL_SPLITS,
  aggregateReport,
  predictSplit,
  regimeMetrics,
  rmse,
  writeRegimeCsv,
  writeReport,
} from './evaluate';
import { SplitName, loadAll } from './loader';
import { ArchName } from './models';
import { TRAIN_DEFAULTS, trainModel } from './train';

interface CliArgs {
  dataset: string;
  arch: ArchName;
  seeds: number;
  report: string | null;
  figureCsv: string | null;
  epochs: number;
  trainCap: number;
  learningRate: number;
  batchSize: number;
}

export function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = {
    dataset: '',
    arch: 'conv_recurrent',
    seeds: 3,
    report: null,
    figureCsv: null,
    epochs: TRAIN_DEFAULTS.epochs,
    trainCap: TRAIN_DEFAULTS.trainCap,
    learningRate: TRAIN_DEFAULTS.learningRate,
    batchSize: TRAIN_DEFAULTS.batchSize,
  };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`missing value for ${flag}`);
      return argv[i];
    };
    switch (flag) {
      case '--dataset':
        args.dataset = next();
        break;
      case '--arch': {
        const arch = next();
        if (arch !== 'conv_recurrent' && arch !== 'attention') {
          throw new Error(`unknown arch ${arch} (conv_recurrent | attention)`);
        }
        args.arch = arch;
        break;
      }
      case '--seeds':
        args.seeds = parseInt(next(), 10);
        break;
      case '--report':
        args.report = next();
        break;
      case '--figure-csv':
        args.figureCsv = next();
        break;
      case '--epochs':
        args.epochs = parseInt(next(), 10);
        break;
      case '--train-cap':
        args.trainCap = parseInt(next(), 10);
        break;
      case '--lr':
        args.learningRate = parseFloat(next());
        break;
      case '--batch':
        args.batchSize = parseInt(next(), 10);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.dataset) throw new Error('--dataset is required');
  if (!Number.isInteger(args.seeds) || args.seeds < 1) throw new Error('--seeds must be >= 1');
  return args;
}

export function run(args: CliArgs): number {
  const { descriptor, splits } = loadAll(args.dataset);
  const trainCfgBase = {
    epochs: args.epochs,
    batchSize: args.batchSize,
    learningRate: args.learningRate,
    trainCap: args.trainCap,
  };
  const perSeed = new Map<number, { rmse: Record<string, number>; losses: number[] }>();
  let lastPreds: Partial<Record<SplitName, Float64Array>> = {};
  for (let seed = 0; seed < args.seeds; seed++) {
    const t0 = Date.now();
    const { model, epochLosses, nTrain } = trainModel(splits.train, {
      arch: args.arch,
      seed,
      ...trainCfgBase,
    });
    const splitRmse: Record<string, number> = {};
    lastPreds = {};
    for (const name of EVAL_SPLITS) {
      const preds = predictSplit(model, splits[name]);
      lastPreds[name] = preds;
      splitRmse[name] = rmse(preds, splits[name].y);
    }
    perSeed.set(seed, { rmse: splitRmse, losses: epochLosses });
    const secs = ((Date.now() - t0) / 1000).toFixed(1);
    console.log(
      `seed ${seed}: trained ${args.arch} on ${nTrain} windows in ${secs}s, ` +
        `loss ${epochLosses[0].toFixed(4)} -> ${epochLosses[epochLosses.length - 1].toFixed(4)}, ` +
        `rmse iid ${splitRmse.test_iid.toFixed(4)} / small ${splitRmse.test_small.toFixed(4)} ` +
        `/ large ${splitRmse.test_large.toFixed(4)}`,
    );
  }
  const regime = regimeMetrics(splits, lastPreds);
  const report = aggregateReport(args.arch, descriptor, splits, perSeed, regime, trainCfgBase);
  console.log(
    `mean over ${args.seeds} seed(s): iid ${report.rmse.test_iid.toFixed(4)} ` +
      `/ small ${report.rmse.test_small.toFixed(4)} / large ${report.rmse.test_large.toFixed(4)}`,
  );
  for (const m of regime) {
    console.log(`  ${m.scenario} ${m.regime}: rmse ${m.rmse.toFixed(4)} over ${m.n} windows`);
  }
  if (args.report) {
    writeReport(report, args.report);
    console.log(`report written to ${args.report}`);
  }
  if (args.figureCsv) {
    writeRegimeCsv(regime, args.figureCsv);
    console.log(`regime metrics written to ${args.figureCsv}`);
  }
  return 0;
}

export function main(argv: string[]): number {
  try {
    return run(parseArgs(argv));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
