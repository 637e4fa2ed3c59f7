/**
 * View models for the four visualisation types.  These are pure
 * functions from a SampleStore to plain layout data; the DOM layer maps
 * them 1:1 onto SVG.  Keeping them DOM-free makes the replay and
 * agreement harnesses run headless.
 */

import { BoxStats, IntervalCondition, SampleStore, EmptySupportError } from "./samples.js";
import { mulberry32 } from "./rng.js";

export interface BoxView {
  variable: string;
  unit: string;
  stats: BoxStats;
}

export interface BoxplotView {
  boxes: BoxView[];
}

/** Static boxplots: one box per requested variable. */
export function renderBoxplot(store: SampleStore, variables: string[]): BoxplotView {
  return {
    boxes: variables.map(name => ({
      variable: name,
      unit: store.schema[store.columnIndex(name)].unit,
      stats: store.boxStats(name),
    })),
  };
}

export interface HopView {
  variables: string[];
  /** frames[i][j] = value of variables[j] in frame i */
  frames: number[][];
  frameIntervalMs: number;
}

export const DEFAULT_FRAME_INTERVAL_MS = 400;

/** Hypothetical outcome plot: a seeded sequence of single joint draws. */
export function renderHop(store: SampleStore, variables: string[],
                          nFrames: number, seed: number,
                          frameIntervalMs: number = DEFAULT_FRAME_INTERVAL_MS): HopView {
  const rng = mulberry32(seed);
  const idx = variables.map(v => store.columnIndex(v));
  const frames = store.draw(nFrames, rng).map(row => idx.map(i => row[i]));
  return { variables, frames, frameIntervalMs };
}

/** Fraction of the axis span used for click-conditioning windows. */
export const CONDITION_WINDOW_FRACTION = 0.05;

export interface ConditionSelection {
  variable: string;
  lower: number;
  upper: number;
  /** P(condition) under the unconditioned joint: drives interval width */
  probability: number;
}

export interface InteractiveBoxplotView {
  boxes: BoxView[];
  selection: ConditionSelection | null;
  /** set when the clicked window contains no samples */
  emptySupport: boolean;
}

export function conditionWindow(store: SampleStore, variable: string,
                                clickValue: number): IntervalCondition {
  const stats = store.boxStats(variable);
  const lo = Math.min(stats.whiskerLow, ...stats.outliers);
  const hi = Math.max(stats.whiskerHigh, ...stats.outliers);
  const span = hi - lo;
  const w = span > 0 ? span * CONDITION_WINDOW_FRACTION : 1e-9;
  return { variable, lower: clickValue - w / 2, upper: clickValue + w / 2 };
}

/**
 * Interactive boxplot after a click on `variable` at `clickValue`:
 * every other box is recomputed from the bootstrap conditional; the
 * clicked variable keeps its interval marker, drawn with width
 * proportional to the condition's probability (linear scaling).
 * Passing null for the click renders the unconditioned view.
 */
export function renderInteractiveBoxplot(
  store: SampleStore, variables: string[],
  clicked: { variable: string; value: number } | null,
  resampleSize: number = 1000, seed: number = 0): InteractiveBoxplotView {
  if (clicked === null) {
    return { ...renderBoxplot(store, variables), selection: null, emptySupport: false };
  }
  const window = conditionWindow(store, clicked.variable, clicked.value);
  const probability = store.conditionProbability([window]);
  const selection = { ...window, probability };
  let conditioned: SampleStore;
  try {
    conditioned = store.condition([window], resampleSize, mulberry32(seed));
  } catch (e) {
    if (e instanceof EmptySupportError) {
      // "no samples" cue: keep all boxes unchanged
      return { ...renderBoxplot(store, variables), selection, emptySupport: true };
    }
    throw e;
  }
  const boxes = variables.map(name => ({
    variable: name,
    unit: store.schema[store.columnIndex(name)].unit,
    stats: name === clicked.variable
      ? store.boxStats(name)
      : conditioned.boxStats(name),
  }));
  return { boxes, selection, emptySupport: false };
}

export const BHOP_FRAMES_PER_DIRECTION = 30;

export interface BhopSweep {
  variables: string[];
  sortKey: string;
  /** ascending pass then descending pass, eased timing offsets in ms */
  frames: { values: number[]; atMs: number }[];
}

function easeInOut(t: number): number {
  return t < 0.5 ? 2 * t * t : 1 - 2 * (1 - t) * (1 - t);
}

/**
 * BHOP: clicking a variable plays joint rows sorted along it, up and
 * back down, with ease-in-out pacing ("pseudo-physical" sweep).
 */
export function renderBhopSweep(store: SampleStore, variables: string[],
                                sortKey: string, seed: number,
                                durationMs: number = 2000): BhopSweep {
  const rng = mulberry32(seed);
  const idx = variables.map(v => store.columnIndex(v));
  const ordered = store.orderedRows(sortKey, BHOP_FRAMES_PER_DIRECTION, rng)
    .map(row => idx.map(i => row[i]));
  const up = ordered;
  const down = ordered.slice(0, -1).reverse();
  const path = up.concat(down);
  const frames = path.map((values, i) => ({
    values,
    atMs: easeInOut(i / (path.length - 1)) * durationMs,
  }));
  return { variables, sortKey, frames };
}

export interface FeedbackBar {
  label: string;
  entailed: number;
  optimal: number;
}

export interface FeedbackView {
  reward: string;
  cumulativeReward: string;
  bars: FeedbackBar[];
}

/** Feedback panel: the response's entailed distribution next to the
 *  optimal one, plus the reward exactly as the server reported it. */
export function renderFeedback(feedback: any, cumulativeReward: number): FeedbackView {
  const bars: FeedbackBar[] = [];
  const entailed = feedback.entailed;
  const optimal = feedback.optimal;
  if (entailed && optimal && Array.isArray(entailed.labels)) {
    for (let i = 0; i < entailed.labels.length; i++) {
      bars.push({
        label: String(entailed.labels[i]),
        entailed: entailed.probs[i],
        optimal: optimal.probs ? optimal.probs[i] : 0,
      });
    }
  }
  return {
    reward: Number(feedback.reward).toFixed(1),
    cumulativeReward: cumulativeReward.toFixed(1),
    bars,
  };
}
