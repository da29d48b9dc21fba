/**
 * Reader for the windowed tensor export: a tensors.json descriptor next to
 * little-endian float32 binaries (<split>.X.f32 sample-major windows,
 * <split>.y.f32 labels, <split>.m.f32 last-record mids) and per-sample
 * metadata JSON. Byte sizes and crc32 checksums are verified on load.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { crc32 } from 'node:zlib';

export interface SplitEntry {
  n: number;
  x_file: string;
  y_file: string;
  m_file: string;
  meta_file: string;
  x_bytes: number;
  y_bytes: number;
  m_bytes: number;
  x_crc32: number;
  y_crc32: number;
  m_crc32: number;
  index_digest: string;
}

export interface Descriptor {
  format: string;
  dtype: string;
  layout: string;
  window: number;
  features: number;
  horizon: number;
  stride: number;
  normalized: boolean;
  label_domain: string;
  source_root_seed?: number;
  splits: Record<string, SplitEntry>;
}

export interface SplitMeta {
  day_index: number[];
  scenario: string[];
  regime: string[];
  end_time: number[];
  trend?: number[];
}

export interface SplitTensors {
  /** Flattened sample-major windows: n * window * features values. */
  X: Float32Array;
  y: Float32Array;
  lastMid: Float32Array;
  n: number;
  window: number;
  features: number;
  meta: SplitMeta;
}

export const SPLIT_NAMES = ['train', 'test_iid', 'test_small', 'test_large'] as const;
export type SplitName = (typeof SPLIT_NAMES)[number];

export class LoadError extends Error {}

export function readDescriptor(datasetDir: string): Descriptor {
  const descPath = path.join(datasetDir, 'tensors.json');
  if (!fs.existsSync(descPath)) {
    throw new LoadError(`descriptor not found: ${descPath}`);
  }
  const descriptor = JSON.parse(fs.readFileSync(descPath, 'utf-8')) as Descriptor;
  if (descriptor.format !== 'lob-windows-v1') {
    throw new LoadError(`unsupported export format: ${descriptor.format}`);
  }
  if (descriptor.dtype !== '<f4') {
    throw new LoadError(`unsupported dtype: ${descriptor.dtype}`);
  }
  return descriptor;
}

function readChecked(dir: string, file: string, wantBytes: number, wantCrc: number): Float32Array {
  const raw = fs.readFileSync(path.join(dir, file));
  if (raw.length !== wantBytes) {
    throw new LoadError(`${file}: expected ${wantBytes} bytes, got ${raw.length}`);
  }
  if (crc32(raw) !== wantCrc) {
    throw new LoadError(`${file}: crc32 mismatch`);
  }
  // copy into an aligned buffer; Buffer slices may be unaligned for Float32Array views
  const aligned = new ArrayBuffer(raw.length);
  new Uint8Array(aligned).set(raw);
  return new Float32Array(aligned);
}

export function loadSplit(datasetDir: string, name: SplitName, descriptor?: Descriptor): SplitTensors {
  const desc = descriptor ?? readDescriptor(datasetDir);
  const entry = desc.splits[name];
  if (!entry) {
    throw new LoadError(`split ${name} missing from descriptor`);
  }
  const X = readChecked(datasetDir, entry.x_file, entry.x_bytes, entry.x_crc32);
  const y = readChecked(datasetDir, entry.y_file, entry.y_bytes, entry.y_crc32);
  const lastMid = readChecked(datasetDir, entry.m_file, entry.m_bytes, entry.m_crc32);
  const expected = entry.n * desc.window * desc.features;
  if (X.length !== expected) {
    throw new LoadError(`${entry.x_file}: ${X.length} values, expected ${expected}`);
  }
  if (y.length !== entry.n || lastMid.length !== entry.n) {
    throw new LoadError(`${name}: label arrays disagree with n=${entry.n}`);
  }
  const meta = JSON.parse(
    fs.readFileSync(path.join(datasetDir, entry.meta_file), 'utf-8'),
  ) as SplitMeta;
  if (meta.regime.length !== entry.n) {
    throw new LoadError(`${entry.meta_file}: metadata length mismatch`);
  }
  return { X, y, lastMid, n: entry.n, window: desc.window, features: desc.features, meta };
}

export function loadAll(datasetDir: string): { descriptor: Descriptor; splits: Record<SplitName, SplitTensors> } {
  const descriptor = readDescriptor(datasetDir);
  const splits = {} as Record<SplitName, SplitTensors>;
  for (const name of SPLIT_NAMES) {
    splits[name] = loadSplit(datasetDir, name, descriptor);
  }
  return { descriptor, splits };
}

/** View of sample i as a (window * features) slice, no copy. */
export function sample(split: SplitTensors, i: number): Float32Array {
  const size = split.window * split.features;
  return split.X.subarray(i * size, (i + 1) * size);
}
