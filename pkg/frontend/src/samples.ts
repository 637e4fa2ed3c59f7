/**
 * Client-side view over a decoded sample blob: marginal box statistics,
 * event probabilities, seeded draws and interval conditioning via
 * bootstrap.  Mirrors the server's conventions exactly (type-7
 * quantiles, Tukey 1.5*IQR whiskers) so the two sides can be compared
 * within floating-point tolerance.
 */

import { SampleMatrix, VariableSpec } from "./blob.js";
import { Rng, randInt } from "./rng.js";

export interface BoxStats {
  median: number;
  q1: number;
  q3: number;
  whiskerLow: number;
  whiskerHigh: number;
  outliers: number[];
}

export interface IntervalCondition {
  variable: string;
  lower: number;
  upper: number;
}

export class EmptySupportError extends Error {}

/** Linear-interpolation quantile of a sorted array (numpy default). */
export function quantileSorted(sorted: Float64Array | number[], q: number): number {
  const n = sorted.length;
  if (n === 0) throw new Error("empty sample");
  if (n === 1) return sorted[0];
  const pos = q * (n - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export class SampleStore {
  readonly matrix: SampleMatrix;
  readonly schema: VariableSpec[];
  private readonly indexByName = new Map<string, number>();

  constructor(matrix: SampleMatrix, schema: VariableSpec[]) {
    if (schema.length !== matrix.cols) {
      throw new Error(
        `schema has ${schema.length} variables, matrix has ${matrix.cols} columns`);
    }
    this.matrix = matrix;
    this.schema = schema;
    schema.forEach((v, i) => this.indexByName.set(v.name, i));
  }

  get rows(): number {
    return this.matrix.rows;
  }

  columnIndex(name: string): number {
    const idx = this.indexByName.get(name);
    if (idx === undefined) throw new Error(`unknown variable ${name}`);
    return idx;
  }

  column(name: string): Float64Array {
    const idx = this.columnIndex(name);
    const { rows, cols, values } = this.matrix;
    const out = new Float64Array(rows);
    for (let r = 0; r < rows; r++) out[r] = values[r * cols + idx];
    return out;
  }

  row(r: number): Float64Array {
    const { cols, values } = this.matrix;
    return values.subarray(r * cols, (r + 1) * cols);
  }

  boxStats(name: string): BoxStats {
    const col = this.column(name);
    const sorted = Float64Array.from(col).sort();
    const q1 = quantileSorted(sorted, 0.25);
    const median = quantileSorted(sorted, 0.5);
    const q3 = quantileSorted(sorted, 0.75);
    const iqr = q3 - q1;
    const loFence = q1 - 1.5 * iqr;
    const hiFence = q3 + 1.5 * iqr;
    let whiskerLow = Infinity;
    let whiskerHigh = -Infinity;
    for (const v of sorted) {
      if (v >= loFence && v <= hiFence) {
        if (v < whiskerLow) whiskerLow = v;
        if (v > whiskerHigh) whiskerHigh = v;
      }
    }
    const outliers: number[] = [];
    for (const v of sorted) {
      if (v < whiskerLow || v > whiskerHigh) outliers.push(v);
    }
    return { median, q1, q3, whiskerLow, whiskerHigh, outliers };
  }

  probEvent(name: string, threshold: number,
            direction: "ge" | "le" | "gt" | "lt" = "ge"): number {
    const col = this.column(name);
    let hits = 0;
    for (const v of col) {
      if (direction === "ge" ? v >= threshold
        : direction === "le" ? v <= threshold
        : direction === "gt" ? v > threshold : v < threshold) hits++;
    }
    return hits / col.length;
  }

  /** Row indices whose values satisfy every closed-interval condition. */
  supportIndices(conditions: IntervalCondition[]): number[] {
    const { rows, cols, values } = this.matrix;
    const specs = conditions.map(c => ({
      idx: this.columnIndex(c.variable), lower: c.lower, upper: c.upper,
    }));
    const out: number[] = [];
    for (let r = 0; r < rows; r++) {
      let ok = true;
      for (const s of specs) {
        const v = values[r * cols + s.idx];
        if (v < s.lower || v > s.upper) { ok = false; break; }
      }
      if (ok) out.push(r);
    }
    return out;
  }

  /** Probability mass of the conditions' joint support. */
  conditionProbability(conditions: IntervalCondition[]): number {
    return this.supportIndices(conditions).length / this.rows;
  }

  /**
   * Bootstrap conditioning: filter to the support, then resample rows
   * with replacement up to `resampleSize`.  Pure client-side; no server
   * round trip.
   */
  condition(conditions: IntervalCondition[], resampleSize: number,
            rng: Rng): SampleStore {
    const support = this.supportIndices(conditions);
    if (support.length === 0) {
      throw new EmptySupportError("no samples satisfy the conditions");
    }
    const { cols } = this.matrix;
    const values = new Float64Array(resampleSize * cols);
    for (let i = 0; i < resampleSize; i++) {
      const src = support[randInt(rng, support.length)];
      values.set(this.row(src), i * cols);
    }
    return new SampleStore({ values, rows: resampleSize, cols }, this.schema);
  }

  /** k joint rows drawn uniformly with replacement (HOP frames). */
  draw(k: number, rng: Rng): number[][] {
    const out: number[][] = [];
    for (let i = 0; i < k; i++) {
      out.push(Array.from(this.row(randInt(rng, this.rows))));
    }
    return out;
  }

  /** k drawn rows sorted ascending by one variable (BHOP sweeps). */
  orderedRows(name: string, k: number, rng: Rng): number[][] {
    const idx = this.columnIndex(name);
    const drawn = this.draw(k, rng);
    // stable by construction: Array.prototype.sort is stable in ES2019+
    return drawn.slice().sort((a, b) => a[idx] - b[idx]);
  }
}
