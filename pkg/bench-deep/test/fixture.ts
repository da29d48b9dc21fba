/**
 * Synthetic dataset fixture writing the same on-disk layout the primary
 * pipeline exports: tensors.json + <split>.{X,y,m}.f32 + <split>.meta.json.
 *
 * The generator plants a learnable linear signal in the windows and shifts
 * the shock splits' level so a model trained on `train` degrades more the
 * larger the shift, mirroring the real data's structure.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { crc32 } from 'node:zlib';

import { mulberry32, gaussian } from '../src/rng';

export interface FixtureSplitSpec {
  n: number;
  shift: number; // additive level shift applied to mid-like features and label
  scenario: string;
  regime: string;
}

export interface FixtureSpec {
  dir: string;
  window?: number;
  features?: number;
  seed?: number;
  splits: Record<string, FixtureSplitSpec>;
}

function writeArray(dir: string, file: string, data: Float32Array) {
  const buf = Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  fs.writeFileSync(path.join(dir, file), buf);
  return { bytes: buf.length, crc: crc32(buf) };
}

export function writeFixture(spec: FixtureSpec): void {
  const window = spec.window ?? 20;
  const features = spec.features ?? 6;
  const rng = mulberry32(spec.seed ?? 1234);
  fs.mkdirSync(spec.dir, { recursive: true });
  const descriptor: any = {
    format: 'lob-windows-v1',
    dtype: '<f4',
    layout: 'sample-major',
    window,
    features,
    horizon: 5,
    stride: 1,
    normalized: true,
    label_domain: 'zscore-of-train-mid',
    splits: {},
  };
  for (const [name, s] of Object.entries(spec.splits)) {
    const X = new Float32Array(s.n * window * features);
    const y = new Float32Array(s.n);
    const m = new Float32Array(s.n);
    for (let i = 0; i < s.n; i++) {
      const level = s.shift + gaussian(rng) * 0.5;
      const slope = gaussian(rng) * 0.05;
      for (let t = 0; t < window; t++) {
        const base = (i * window + t) * features;
        const mid = level + slope * t;
        X[base] = mid + 0.05; // ask-price-like
        X[base + 1] = Math.abs(gaussian(rng));
        X[base + 2] = mid - 0.05; // bid-price-like
        X[base + 3] = Math.abs(gaussian(rng));
        for (let f = 4; f < features; f++) X[base + f] = gaussian(rng) * 0.1;
      }
      const lastMid = level + slope * (window - 1);
      m[i] = lastMid;
      y[i] = lastMid + slope * 5; // label continues the in-window trend
    }
    const xw = writeArray(spec.dir, `${name}.X.f32`, X);
    const yw = writeArray(spec.dir, `${name}.y.f32`, y);
    const mw = writeArray(spec.dir, `${name}.m.f32`, m);
    const meta = {
      day_index: Array.from({ length: s.n }, (_, i) => i % 4),
      scenario: Array(s.n).fill(s.scenario),
      regime: Array(s.n).fill(s.regime),
      end_time: Array.from({ length: s.n }, (_, i) => i * 1_000_000_000),
    };
    fs.writeFileSync(path.join(spec.dir, `${name}.meta.json`), JSON.stringify(meta));
    descriptor.splits[name] = {
      n: s.n,
      x_file: `${name}.X.f32`,
      y_file: `${name}.y.f32`,
      m_file: `${name}.m.f32`,
      meta_file: `${name}.meta.json`,
      x_bytes: xw.bytes,
      y_bytes: yw.bytes,
      m_bytes: mw.bytes,
      x_crc32: xw.crc,
      y_crc32: yw.crc,
      m_crc32: mw.crc,
      index_digest: 'fixture',
    };
  }
  fs.writeFileSync(path.join(spec.dir, 'tensors.json'), JSON.stringify(descriptor, null, 2));
}

export function standardFixture(dir: string, seed = 7): void {
  writeFixture({
    dir,
    seed,
    splits: {
      train: { n: 260, shift: 0, scenario: 'ordinary', regime: 'no_shock' },
      test_iid: { n: 90, shift: 0, scenario: 'ordinary', regime: 'no_shock' },
      test_small: { n: 80, shift: 3.0, scenario: 'small', regime: 'post_shock' },
      test_large: { n: 80, shift: 8.0, scenario: 'large', regime: 'post_shock' },
    },
  });
}
