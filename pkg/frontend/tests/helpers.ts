import { VariableSpec } from "../src/blob.js";
import { SampleStore } from "../src/samples.js";
import { Rng } from "../src/rng.js";

export function columnStore(
  columns: Record<string, number[]>,
  observability: Record<string, "observable" | "latent"> = {}): SampleStore {
  const names = Object.keys(columns);
  const rows = columns[names[0]].length;
  const values = new Float64Array(rows * names.length);
  names.forEach((name, c) => {
    columns[name].forEach((v, r) => { values[r * names.length + c] = v; });
  });
  const schema: VariableSpec[] = names.map(name => ({
    name, observability: observability[name] ?? "observable", unit: "",
  }));
  return new SampleStore({ values, rows, cols: names.length }, schema);
}

/** Box-Muller standard normal from a uniform Rng. */
export function gauss(rng: Rng): number {
  const u = Math.max(rng(), 1e-12);
  const v = rng();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
}

/** rows x cols store of correlated normals (adjacent columns share a
 *  common factor), for latency and conditioning checks. */
export function gaussianStore(rows: number, cols: number, rng: Rng): SampleStore {
  const values = new Float64Array(rows * cols);
  for (let r = 0; r < rows; r++) {
    const shared = gauss(rng);
    for (let c = 0; c < cols; c++) {
      values[r * cols + c] = c + 0.7 * shared + 0.7 * gauss(rng);
    }
  }
  const schema: VariableSpec[] = [];
  for (let c = 0; c < cols; c++) {
    schema.push({ name: `v${c}`, observability: "observable", unit: "" });
  }
  return new SampleStore({ values, rows, cols }, schema);
}
