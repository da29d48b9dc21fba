import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import { EVAL_SPLITS, predictSplit, regimeMetrics, rmse } from '../src/evaluate';
import { loadAll } from '../src/loader';
import { main } from '../src/cli';
import { DivergenceError, trainModel } from '../src/train';
import { standardFixture } from './fixture';

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'bench-deep-e2e-'));
  standardFixture(dir);
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

const QUICK = { epochs: 5, batchSize: 32, learningRate: 3e-3, trainCap: 260 };

describe('training on the fixture', () => {
  it('training loss decreases from the first epoch to the last', () => {
    const { splits } = loadAll(dir);
    const { epochLosses } = trainModel(splits.train, {
      arch: 'conv_recurrent',
      seed: 0,
      ...QUICK,
    });
    expect(epochLosses.at(-1)!).toBeLessThan(epochLosses[0]);
  });

  it('same seed reproduces identical losses and predictions', () => {
    const { splits } = loadAll(dir);
    const runA = trainModel(splits.train, { arch: 'attention', seed: 3, ...QUICK });
    const runB = trainModel(splits.train, { arch: 'attention', seed: 3, ...QUICK });
    expect(runA.epochLosses).toEqual(runB.epochLosses);
    const predsA = predictSplit(runA.model, splits.test_iid);
    const predsB = predictSplit(runB.model, splits.test_iid);
    expect(Array.from(predsA)).toEqual(Array.from(predsB));
  });

  it('trained model beats its untrained self on IID data', () => {
    const { splits } = loadAll(dir);
    const { model } = trainModel(splits.train, { arch: 'conv_recurrent', seed: 1, ...QUICK });
    const untrained = trainModel(splits.train, {
      arch: 'conv_recurrent',
      seed: 1,
      ...QUICK,
      epochs: 0,
    });
    const got = rmse(predictSplit(model, splits.test_iid), splits.test_iid.y);
    const base = rmse(predictSplit(untrained.model, splits.test_iid), splits.test_iid.y);
    expect(got).toBeLessThan(base);
  });

  it('degrades monotonically with the distribution shift (iid < small < large)', () => {
    const { splits } = loadAll(dir);
    const { model } = trainModel(splits.train, { arch: 'conv_recurrent', seed: 2, ...QUICK });
    const scores: Record<string, number> = {};
    for (const name of EVAL_SPLITS) {
      scores[name] = rmse(predictSplit(model, splits[name]), splits[name].y);
    }
    expect(scores.test_small).toBeGreaterThan(scores.test_iid);
    expect(scores.test_large).toBeGreaterThan(scores.test_small);
  });
});

describe('cli', () => {
  it('writes a report in the shared schema plus regime metrics', () => {
    const report = path.join(dir, 'report.json');
    const figure = path.join(dir, 'figure.csv');
    const rc = main([
      '--dataset', dir,
      '--arch', 'conv_recurrent',
      '--seeds', '2',
      '--epochs', '4',
      '--report', report,
      '--figure-csv', figure,
    ]);
    expect(rc).toBe(0);
    const payload = JSON.parse(fs.readFileSync(report, 'utf-8'));
    for (const key of ['model', 'label_domain', 'rmse', 'counts', 'config_fingerprint']) {
      expect(payload).toHaveProperty(key);
    }
    expect(Object.keys(payload.rmse).sort()).toEqual(
      ['test_iid', 'test_large', 'test_small'],
    );
    expect(payload.seeds).toEqual([0, 1]);
    expect(payload.rmse_std.test_iid).toBeGreaterThanOrEqual(0);
    const csv = fs.readFileSync(figure, 'utf-8').trim().split('\n');
    expect(csv[0]).toBe('scenario,regime,n_windows,rmse');
    expect(csv.some((l) => l.startsWith('small,post_shock'))).toBe(true);
    expect(csv.some((l) => l.startsWith('large,post_shock'))).toBe(true);
  });

  it('identical invocations write byte-identical reports', () => {
    const r1 = path.join(dir, 'r1.json');
    const r2 = path.join(dir, 'r2.json');
    for (const r of [r1, r2]) {
      expect(main(['--dataset', dir, '--arch', 'attention', '--seeds', '1',
                   '--epochs', '3', '--report', r])).toBe(0);
    }
    expect(fs.readFileSync(r1)).toEqual(fs.readFileSync(r2));
  });

  it('fails cleanly on bad flags and missing dataset', () => {
    expect(main(['--arch', 'conv_recurrent'])).toBe(1); // no dataset
    expect(main(['--dataset', dir, '--arch', 'resnet'])).toBe(1);
    expect(main(['--dataset', path.join(dir, 'nope')])).toBe(1);
  });
});

describe('divergence reporting', () => {
  it('raises instead of swallowing non-finite losses', () => {
    const { splits } = loadAll(dir);
    splits.train.y[0] = Number.NaN; // poisoned label must surface, not vanish
    expect(() =>
      trainModel(splits.train, { arch: 'conv_recurrent', seed: 0, ...QUICK, trainCap: 16 }),
    ).toThrow(DivergenceError);
  });
});
