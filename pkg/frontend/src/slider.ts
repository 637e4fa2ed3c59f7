/**
 * Slider input model: value snapping to the task's grid and response
 * validity.  Pure state; rendering binds to it.
 */

export interface SliderSpec {
  min: number;
  max: number;
  step: number;
}

export interface SliderState {
  spec: SliderSpec;
  /** null until the participant first moves the handle */
  value: number | null;
}

export function freshSlider(spec: SliderSpec): SliderState {
  if (spec.step <= 0 || spec.max <= spec.min) throw new Error("bad slider spec");
  return { spec, value: null };
}

export function snap(spec: SliderSpec, raw: number): number {
  const steps = Math.round((spec.max - spec.min) / spec.step);
  let k = Math.round((raw - spec.min) / spec.step);
  if (k < 0) k = 0;
  if (k > steps) k = steps;
  // round away float drift so 0.1 + 0.2 style artifacts never reach
  // the server
  return Number((spec.min + k * spec.step).toPrecision(12));
}

export function setValue(state: SliderState, raw: number): SliderState {
  return { spec: state.spec, value: snap(state.spec, raw) };
}

export function isComplete(state: SliderState): boolean {
  return state.value !== null;
}
