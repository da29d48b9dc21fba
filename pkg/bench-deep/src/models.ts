/**
 * Hand-rolled toy forecasters over (window x features) inputs:
 *
 *  - conv_recurrent: Conv1D over time -> ReLU -> average pooling -> GRU ->
 *    linear head. The convolution extracts local book patterns, the GRU the
 *    temporal behavior.
 *  - attention: per-step tanh embedding with a learned-query softmax
 *    attention pool -> linear head.
 *
 * Everything runs on Float32Arrays with explicit backprop so training is
 * dependency-free and bit-reproducible from a seed. Gradients are verified
 * against finite differences in the test suite.
 */

import { mulberry32, xavierInit, Rng } from './rng';

export type ArchName = 'conv_recurrent' | 'attention';

export interface Param {
  value: Float32Array;
  grad: Float32Array;
  m: Float32Array; // Adam first moment
  v: Float32Array; // Adam second moment
}

function makeParam(size: number): Param {
  return {
    value: new Float32Array(size),
    grad: new Float32Array(size),
    m: new Float32Array(size),
    v: new Float32Array(size),
  };
}

export abstract class Model {
  abstract readonly name: ArchName;
  abstract readonly params: Param[];

  /** Predict one sample; x is a flattened (window * features) view. */
  abstract predict(x: Float32Array): number;

  /**
   * Forward + backward for one sample under squared-error loss against
   * `target`, accumulating dLoss/dParam. Returns the prediction.
   */
  abstract accumulate(x: Float32Array, target: number): number;

  zeroGrad(): void {
    for (const p of this.params) p.grad.fill(0);
  }

  /** One Adam update over the accumulated (mean) gradients. */
  adamStep(lr: number, t: number, batchSize: number): void {
    const b1 = 0.9;
    const b2 = 0.999;
    const eps = 1e-8;
    const c1 = 1 - Math.pow(b1, t);
    const c2 = 1 - Math.pow(b2, t);
    for (const p of this.params) {
      const { value, grad, m, v } = p;
      for (let i = 0; i < value.length; i++) {
        const g = grad[i] / batchSize;
        m[i] = b1 * m[i] + (1 - b1) * g;
        v[i] = b2 * v[i] + (1 - b2) * g * g;
        value[i] -= (lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + eps);
      }
    }
  }

  parameterCount(): number {
    return this.params.reduce((acc, p) => acc + p.value.length, 0);
  }
}

// ============================================================================
// conv_recurrent
// ============================================================================

export interface ConvRecurrentConfig {
  window: number;
  features: number;
  filters: number;
  kernel: number;
  poolWidth: number;
  hidden: number;
}

export const CONV_RECURRENT_DEFAULTS = {
  filters: 8,
  kernel: 5,
  poolWidth: 4,
  hidden: 12,
};

export class ConvRecurrent extends Model {
  readonly name = 'conv_recurrent' as const;
  readonly params: Param[];
  private readonly cfg: ConvRecurrentConfig;

  // parameters
  private wConv: Param; // [filters, kernel * features]
  private bConv: Param; // [filters]
  private wz: Param; // GRU input weights [3, hidden, filters] packed z,r,h
  private uz: Param; // GRU recurrent weights [3, hidden, hidden]
  private bz: Param; // GRU biases [3, hidden]
  private wOut: Param; // [hidden]
  private bOut: Param; // [1]

  // forward scratch, reused across calls
  private conv: Float32Array; // [tConv, filters] post-ReLU
  private pooled: Float32Array; // [tPool, filters]
  private hs: Float32Array; // [tPool + 1, hidden] hidden states, hs[0] = 0
  private gateZ: Float32Array; // [tPool, hidden]
  private gateR: Float32Array;
  private gateH: Float32Array; // candidate (tanh)
  private readonly tConv: number;
  private readonly tPool: number;

  constructor(cfg: ConvRecurrentConfig, seed: number) {
    super();
    this.cfg = cfg;
    const { window, features, filters, kernel, poolWidth, hidden } = cfg;
    this.tConv = window - kernel + 1;
    this.tPool = Math.floor(this.tConv / poolWidth);
    if (this.tPool < 2) {
      throw new Error('window too short for the conv/pool configuration');
    }
    const rng = mulberry32(seed);
    this.wConv = makeParam(filters * kernel * features);
    this.bConv = makeParam(filters);
    this.wz = makeParam(3 * hidden * filters);
    this.uz = makeParam(3 * hidden * hidden);
    this.bz = makeParam(3 * hidden);
    this.wOut = makeParam(hidden);
    this.bOut = makeParam(1);
    xavierInit(this.wConv.value, kernel * features, filters, rng);
    xavierInit(this.wz.value, filters, hidden, rng);
    xavierInit(this.uz.value, hidden, hidden, rng);
    xavierInit(this.wOut.value, hidden, 1, rng);
    this.params = [this.wConv, this.bConv, this.wz, this.uz, this.bz, this.wOut, this.bOut];

    this.conv = new Float32Array(this.tConv * filters);
    this.pooled = new Float32Array(this.tPool * filters);
    this.hs = new Float32Array((this.tPool + 1) * hidden);
    this.gateZ = new Float32Array(this.tPool * hidden);
    this.gateR = new Float32Array(this.tPool * hidden);
    this.gateH = new Float32Array(this.tPool * hidden);
  }

  private forward(x: Float32Array): number {
    const { features, filters, kernel, poolWidth, hidden } = this.cfg;
    const wc = this.wConv.value;
    const bc = this.bConv.value;
    // conv + ReLU over time
    for (let t = 0; t < this.tConv; t++) {
      for (let f = 0; f < filters; f++) {
        let acc = bc[f];
        const wBase = f * kernel * features;
        const xBase = t * features;
        for (let k = 0; k < kernel * features; k++) {
          acc += wc[wBase + k] * x[xBase + k];
        }
        this.conv[t * filters + f] = acc > 0 ? acc : 0;
      }
    }
    // average pool
    this.pooled.fill(0);
    for (let tp = 0; tp < this.tPool; tp++) {
      for (let w = 0; w < poolWidth; w++) {
        const src = (tp * poolWidth + w) * filters;
        for (let f = 0; f < filters; f++) {
          this.pooled[tp * filters + f] += this.conv[src + f];
        }
      }
      for (let f = 0; f < filters; f++) {
        this.pooled[tp * filters + f] /= poolWidth;
      }
    }
    // GRU
    const W = this.wz.value;
    const U = this.uz.value;
    const B = this.bz.value;
    this.hs.fill(0, 0, hidden);
    for (let t = 0; t < this.tPool; t++) {
      const ximBase = t * filters;
      const hPrev = t * hidden;
      const hCur = (t + 1) * hidden;
      for (let j = 0; j < hidden; j++) {
        // packed gate order: z (0), r (1)
        let z = B[j];
        let r = B[hidden + j];
        const wzBase = j * filters;
        const wrBase = (hidden + j) * filters;
        for (let i = 0; i < filters; i++) {
          const xv = this.pooled[ximBase + i];
          z += W[wzBase + i] * xv;
          r += W[wrBase + i] * xv;
        }
        const uzBase = j * hidden;
        const urBase = (hidden + j) * hidden;
        for (let i = 0; i < hidden; i++) {
          const hv = this.hs[hPrev + i];
          z += U[uzBase + i] * hv;
          r += U[urBase + i] * hv;
        }
        this.gateZ[t * hidden + j] = 1 / (1 + Math.exp(-z));
        this.gateR[t * hidden + j] = 1 / (1 + Math.exp(-r));
      }
      for (let j = 0; j < hidden; j++) {
        let cand = B[2 * hidden + j];
        const whBase = (2 * hidden + j) * filters;
        for (let i = 0; i < filters; i++) {
          cand += W[whBase + i] * this.pooled[ximBase + i];
        }
        const uhBase = (2 * hidden + j) * hidden;
        for (let i = 0; i < hidden; i++) {
          cand += U[uhBase + i] * this.gateR[t * hidden + i] * this.hs[hPrev + i];
        }
        const c = Math.tanh(cand);
        this.gateH[t * hidden + j] = c;
        const zj = this.gateZ[t * hidden + j];
        this.hs[hCur + j] = (1 - zj) * this.hs[hPrev + j] + zj * c;
      }
    }
    // head
    let out = this.bOut.value[0];
    const hLast = this.tPool * hidden;
    for (let j = 0; j < hidden; j++) {
      out += this.wOut.value[j] * this.hs[hLast + j];
    }
    return out;
  }

  predict(x: Float32Array): number {
    return this.forward(x);
  }

  accumulate(x: Float32Array, target: number): number {
    const out = this.forward(x);
    const dLdOut = 2 * (out - target);
    const { features, filters, kernel, poolWidth, hidden } = this.cfg;
    const W = this.wz.value;
    const U = this.uz.value;

    // head grads
    const hLast = this.tPool * hidden;
    const dh = new Float32Array(hidden);
    for (let j = 0; j < hidden; j++) {
      this.wOut.grad[j] += dLdOut * this.hs[hLast + j];
      dh[j] = dLdOut * this.wOut.value[j];
    }
    this.bOut.grad[0] += dLdOut;

    // BPTT
    const dPooled = new Float32Array(this.tPool * filters);
    const dzPre = new Float32Array(hidden);
    const drPre = new Float32Array(hidden);
    const dcPre = new Float32Array(hidden);
    for (let t = this.tPool - 1; t >= 0; t--) {
      const hPrev = t * hidden;
      const base = t * hidden;
      const dhPrev = new Float32Array(hidden);
      for (let j = 0; j < hidden; j++) {
        const z = this.gateZ[base + j];
        const c = this.gateH[base + j];
        const dz = dh[j] * (c - this.hs[hPrev + j]);
        const dc = dh[j] * z;
        dzPre[j] = dz * z * (1 - z);
        dcPre[j] = dc * (1 - c * c);
        dhPrev[j] = dh[j] * (1 - z);
      }
      // candidate path: cand_pre = Wh x + Uh (r .* hPrev) + bh
      const dRH = new Float32Array(hidden); // grad wrt (r .* hPrev)
      for (let j = 0; j < hidden; j++) {
        const uhBase = (2 * hidden + j) * hidden;
        for (let i = 0; i < hidden; i++) {
          dRH[i] += U[uhBase + i] * dcPre[j];
        }
      }
      for (let i = 0; i < hidden; i++) {
        const r = this.gateR[base + i];
        const dr = dRH[i] * this.hs[hPrev + i];
        drPre[i] = dr * r * (1 - r);
        dhPrev[i] += dRH[i] * r;
      }
      // parameter grads + input grads
      const xim = t * filters;
      for (let j = 0; j < hidden; j++) {
        const gz = dzPre[j];
        const gr = drPre[j];
        const gc = dcPre[j];
        const wzBase = j * filters;
        const wrBase = (hidden + j) * filters;
        const whBase = (2 * hidden + j) * filters;
        for (let i = 0; i < filters; i++) {
          const xv = this.pooled[xim + i];
          this.wz.grad[wzBase + i] += gz * xv;
          this.wz.grad[wrBase + i] += gr * xv;
          this.wz.grad[whBase + i] += gc * xv;
          dPooled[xim + i] += W[wzBase + i] * gz + W[wrBase + i] * gr + W[whBase + i] * gc;
        }
        const uzBase = j * hidden;
        const urBase = (hidden + j) * hidden;
        const uhBase = (2 * hidden + j) * hidden;
        for (let i = 0; i < hidden; i++) {
          const hv = this.hs[hPrev + i];
          this.uz.grad[uzBase + i] += gz * hv;
          this.uz.grad[urBase + i] += gr * hv;
          this.uz.grad[uhBase + i] += gc * this.gateR[base + i] * hv;
          dhPrev[i] += U[uzBase + i] * gz + U[urBase + i] * gr;
        }
        this.bz.grad[j] += gz;
        this.bz.grad[hidden + j] += gr;
        this.bz.grad[2 * hidden + j] += gc;
      }
      dh.set(dhPrev);
    }

    // pool backward -> conv backward
    const dConv = new Float32Array(this.tConv * filters);
    for (let tp = 0; tp < this.tPool; tp++) {
      for (let w = 0; w < poolWidth; w++) {
        const dst = (tp * poolWidth + w) * filters;
        for (let f = 0; f < filters; f++) {
          dConv[dst + f] = dPooled[tp * filters + f] / poolWidth;
        }
      }
    }
    for (let t = 0; t < this.tConv; t++) {
      const xBase = t * features;
      for (let f = 0; f < filters; f++) {
        if (this.conv[t * filters + f] <= 0) continue; // ReLU gate
        const g = dConv[t * filters + f];
        if (g === 0) continue;
        const wBase = f * kernel * features;
        for (let k = 0; k < kernel * features; k++) {
          this.wConv.grad[wBase + k] += g * x[xBase + k];
        }
        this.bConv.grad[f] += g;
      }
    }
    return out;
  }
}

// ============================================================================
// attention
// ============================================================================

export interface AttentionConfig {
  window: number;
  features: number;
  embed: number;
}

export const ATTENTION_DEFAULTS = { embed: 16 };

export class AttentionPool extends Model {
  readonly name = 'attention' as const;
  readonly params: Param[];
  private readonly cfg: AttentionConfig;

  private wEmbed: Param; // [embed, features]
  private bEmbed: Param; // [embed]
  private query: Param; // [embed]
  private wOut: Param; // [embed]
  private bOut: Param; // [1]

  private h: Float32Array; // [window, embed] tanh embeddings
  private alpha: Float32Array; // [window]
  private context: Float32Array; // [embed]

  constructor(cfg: AttentionConfig, seed: number) {
    super();
    this.cfg = cfg;
    const rng = mulberry32(seed);
    this.wEmbed = makeParam(cfg.embed * cfg.features);
    this.bEmbed = makeParam(cfg.embed);
    this.query = makeParam(cfg.embed);
    this.wOut = makeParam(cfg.embed);
    this.bOut = makeParam(1);
    xavierInit(this.wEmbed.value, cfg.features, cfg.embed, rng);
    xavierInit(this.query.value, cfg.embed, 1, rng);
    xavierInit(this.wOut.value, cfg.embed, 1, rng);
    this.params = [this.wEmbed, this.bEmbed, this.query, this.wOut, this.bOut];
    this.h = new Float32Array(cfg.window * cfg.embed);
    this.alpha = new Float32Array(cfg.window);
    this.context = new Float32Array(cfg.embed);
  }

  private forward(x: Float32Array): number {
    const { window, features, embed } = this.cfg;
    const W = this.wEmbed.value;
    const b = this.bEmbed.value;
    const q = this.query.value;
    let maxScore = -Infinity;
    for (let t = 0; t < window; t++) {
      let score = 0;
      for (let j = 0; j < embed; j++) {
        let acc = b[j];
        const wBase = j * features;
        const xBase = t * features;
        for (let i = 0; i < features; i++) {
          acc += W[wBase + i] * x[xBase + i];
        }
        const hv = Math.tanh(acc);
        this.h[t * embed + j] = hv;
        score += q[j] * hv;
      }
      this.alpha[t] = score;
      if (score > maxScore) maxScore = score;
    }
    let norm = 0;
    for (let t = 0; t < window; t++) {
      const e = Math.exp(this.alpha[t] - maxScore);
      this.alpha[t] = e;
      norm += e;
    }
    this.context.fill(0);
    for (let t = 0; t < window; t++) {
      const a = (this.alpha[t] /= norm);
      for (let j = 0; j < embed; j++) {
        this.context[j] += a * this.h[t * embed + j];
      }
    }
    let out = this.bOut.value[0];
    for (let j = 0; j < embed; j++) {
      out += this.wOut.value[j] * this.context[j];
    }
    return out;
  }

  predict(x: Float32Array): number {
    return this.forward(x);
  }

  accumulate(x: Float32Array, target: number): number {
    const out = this.forward(x);
    const dLdOut = 2 * (out - target);
    const { window, features, embed } = this.cfg;
    const q = this.query.value;
    const dContext = new Float32Array(embed);
    for (let j = 0; j < embed; j++) {
      this.wOut.grad[j] += dLdOut * this.context[j];
      dContext[j] = dLdOut * this.wOut.value[j];
    }
    this.bOut.grad[0] += dLdOut;

    // softmax-attention backward: a_t = dContext . h_t
    let mix = 0;
    const aDot = new Float32Array(window);
    for (let t = 0; t < window; t++) {
      let acc = 0;
      for (let j = 0; j < embed; j++) {
        acc += dContext[j] * this.h[t * embed + j];
      }
      aDot[t] = acc;
      mix += this.alpha[t] * acc;
    }
    for (let t = 0; t < window; t++) {
      const a = this.alpha[t];
      const dScore = a * (aDot[t] - mix);
      const xBase = t * features;
      for (let j = 0; j < embed; j++) {
        const hv = this.h[t * embed + j];
        // dh_t = dScore * q + alpha_t * dContext
        const dhv = dScore * q[j] + a * dContext[j];
        this.query.grad[j] += dScore * hv;
        const dPre = dhv * (1 - hv * hv);
        if (dPre !== 0) {
          const wBase = j * features;
          for (let i = 0; i < features; i++) {
            this.wEmbed.grad[wBase + i] += dPre * x[xBase + i];
          }
          this.bEmbed.grad[j] += dPre;
        }
      }
    }
    return out;
  }
}

export function buildModel(arch: ArchName, window: number, features: number, seed: number): Model {
  if (arch === 'conv_recurrent') {
    return new ConvRecurrent({ window, features, ...CONV_RECURRENT_DEFAULTS }, seed);
  }
  if (arch === 'attention') {
    return new AttentionPool({ window, features, ...ATTENTION_DEFAULTS }, seed);
  }
  throw new Error(`unknown architecture: ${arch}`);
}
