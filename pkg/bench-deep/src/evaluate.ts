/**
 * Per-split RMSE evaluation plus before/after-shock breakdowns, aggregated
 * over seeds into the same report shape the classical benchmark emits
 * (model, label_domain, rmse per split, counts, config_fingerprint).
 */

import { createHash } from 'node:crypto';
import * as fs from 'node:fs';

import { Descriptor, SplitName, SplitTensors, sample } from './loader';
import { Model } from './models';

export const EVAL_SPLITS: SplitName[] = ['test_iid', 'test_small', 'test_large'];

export function predictSplit(model: Model, split: SplitTensors): Float64Array {
  const preds = new Float64Array(split.n);
  for (let i = 0; i < split.n; i++) {
    preds[i] = model.predict(sample(split, i));
  }
  return preds;
}

export function rmse(preds: ArrayLike<number>, truths: ArrayLike<number>): number {
  if (preds.length !== truths.length || preds.length === 0) {
    throw new Error('rmse needs equal-length, non-empty inputs');
  }
  let acc = 0;
  for (let i = 0; i < preds.length; i++) {
    const d = preds[i] - truths[i];
    acc += d * d;
  }
  return Math.sqrt(acc / preds.length);
}

export interface RegimeMetric {
  scenario: string;
  regime: string;
  n: number;
  rmse: number;
}

/** Figure-style breakdown: RMSE before vs after the shock per shock type. */
export function regimeMetrics(
  splits: Record<SplitName, SplitTensors>,
  predsBySplit: Partial<Record<SplitName, Float64Array>>,
): RegimeMetric[] {
  const buckets = new Map<string, { scenario: string; regime: string; sse: number; n: number }>();
  for (const name of EVAL_SPLITS) {
    const split = splits[name];
    const preds = predsBySplit[name];
    if (!preds) continue;
    for (let i = 0; i < split.n; i++) {
      const scenario = split.meta.scenario[i];
      if (scenario === 'ordinary') continue;
      const regime = split.meta.regime[i];
      const key = `${scenario}/${regime}`;
      let bucket = buckets.get(key);
      if (!bucket) {
        bucket = { scenario, regime, sse: 0, n: 0 };
        buckets.set(key, bucket);
      }
      const d = preds[i] - split.y[i];
      bucket.sse += d * d;
      bucket.n += 1;
    }
  }
  return [...buckets.values()]
    .map((b) => ({ scenario: b.scenario, regime: b.regime, n: b.n, rmse: Math.sqrt(b.sse / b.n) }))
    .sort((a, b) => a.scenario.localeCompare(b.scenario) || a.regime.localeCompare(b.regime));
}

export interface DeepReport {
  model: string;
  label_domain: string;
  rmse: Record<string, number>; // per-split mean over seeds
  rmse_std: Record<string, number>;
  counts: Record<string, number>;
  config_fingerprint: string;
  source_root_seed?: number;
  seeds: number[];
  per_seed: Record<string, Record<string, number>>;
  epochs_losses: Record<string, number[]>;
  regime_metrics: RegimeMetric[];
}

export function aggregateReport(
  arch: string,
  descriptor: Descriptor,
  splits: Record<SplitName, SplitTensors>,
  perSeed: Map<number, { rmse: Record<string, number>; losses: number[] }>,
  regime: RegimeMetric[],
  trainConfig: object,
): DeepReport {
  const seeds = [...perSeed.keys()].sort((a, b) => a - b);
  const mean: Record<string, number> = {};
  const std: Record<string, number> = {};
  for (const split of EVAL_SPLITS) {
    const values = seeds.map((s) => perSeed.get(s)!.rmse[split]);
    const m = values.reduce((a, b) => a + b, 0) / values.length;
    mean[split] = m;
    std[split] = Math.sqrt(values.reduce((a, b) => a + (b - m) * (b - m), 0) / values.length);
  }
  const counts: Record<string, number> = {};
  for (const split of EVAL_SPLITS) counts[split] = splits[split].n;
  const fingerprint = createHash('sha256')
    .update(JSON.stringify({ descriptor, arch, seeds, trainConfig }))
    .digest('hex')
    .slice(0, 16);
  const perSeedOut: Record<string, Record<string, number>> = {};
  const lossesOut: Record<string, number[]> = {};
  for (const s of seeds) {
    perSeedOut[String(s)] = perSeed.get(s)!.rmse;
    lossesOut[String(s)] = perSeed.get(s)!.losses;
  }
  const report: DeepReport = {
    model: arch,
    label_domain: descriptor.label_domain,
    rmse: mean,
    rmse_std: std,
    counts,
    config_fingerprint: fingerprint,
    seeds,
    per_seed: perSeedOut,
    epochs_losses: lossesOut,
    regime_metrics: regime,
  };
  if (descriptor.source_root_seed !== undefined) {
    report.source_root_seed = descriptor.source_root_seed;
  }
  return report;
}

export function writeReport(report: DeepReport, path: string): void {
  fs.writeFileSync(path, stableStringify(report) + '\n');
}

export function writeRegimeCsv(metrics: RegimeMetric[], path: string): void {
  const lines = ['scenario,regime,n_windows,rmse'];
  for (const m of metrics) {
    lines.push(`${m.scenario},${m.regime},${m.n},${m.rmse.toFixed(6)}`);
  }
  fs.writeFileSync(path, lines.join('\n') + '\n');
}

/** JSON with recursively sorted keys so identical runs emit identical bytes. */
export function stableStringify(value: unknown, indent = 2): string {
  return JSON.stringify(sortKeys(value), null, indent);
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value !== null && typeof value === 'object') {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as object).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}
