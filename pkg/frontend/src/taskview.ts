/**
 * Task screen state machine: wires the sample store, the answer widget,
 * the action log and the submission flow into one model the DOM layer
 * renders from.  The layout is two columns: visualisation on the left,
 * context / query / answer input / acknowledge button on the right.
 */

import { SampleStore } from "./samples.js";
import { ActionLogger } from "./logger.js";
import { MultiBetState, freshState, click, totalChips } from "./multibet.js";
import { SliderState, freshSlider, setValue, isComplete } from "./slider.js";
import { TaskDict } from "./api.js";
import {
  BoxplotView, HopView, InteractiveBoxplotView, BhopSweep,
  renderBoxplot, renderHop, renderInteractiveBoxplot, renderBhopSweep,
} from "./views.js";

export type Phase = "answering" | "feedback" | "interstitial";

export interface TaskModel {
  task: TaskDict;
  store: SampleStore;
  logger: ActionLogger;
  phase: Phase;
  slider: SliderState | null;
  multibet: MultiBetState | null;
  /** interactive boxplot selection, if any */
  clicked: { variable: string; value: number } | null;
  seed: number;
}

function latentVariables(store: SampleStore): string[] {
  return store.schema.filter(v => v.observability === "latent").map(v => v.name);
}

function observableVariables(store: SampleStore): string[] {
  return store.schema.filter(v => v.observability === "observable").map(v => v.name);
}

/** Variables the task's visualisation should show, by queried observability. */
export function displayVariables(model: TaskModel): string[] {
  const all = model.task.query_meta.observability === "latent"
    ? latentVariables(model.store) : observableVariables(model.store);
  return all.length > 0 ? all : model.store.schema.map(v => v.name);
}

export function loadTask(task: TaskDict, store: SampleStore,
                         logger: ActionLogger, seed: number): TaskModel {
  logger.startTask();
  const ai = task.answer_input;
  return {
    task, store, logger, seed,
    phase: "answering",
    slider: ai.type === "slider"
      ? freshSlider({ min: ai.min, max: ai.max, step: ai.step }) : null,
    multibet: ai.type === "multibet" ? freshState(ai.n, ai.m) : null,
    clicked: null,
  };
}

/** The acknowledge button stays disabled until the response is valid. */
export function canAcknowledge(model: TaskModel): boolean {
  if (model.phase !== "answering") return false;
  if (model.slider) return isComplete(model.slider);
  if (model.multibet) return totalChips(model.multibet) >= 1;
  return false;
}

export function moveSlider(model: TaskModel, raw: number): TaskModel {
  if (!model.slider) throw new Error("task has no slider");
  const slider = setValue(model.slider, raw);
  model.logger.log("slider", String(slider.value));
  return { ...model, slider };
}

export function clickChip(model: TaskModel, column: number, row: number): TaskModel {
  if (!model.multibet) throw new Error("task has no multibet widget");
  const multibet = click(model.multibet, column, row);
  model.logger.log("chip", `${column},${row}->${multibet.s.join(",")}`);
  return { ...model, multibet };
}

/** A click on the interactive boxplot; clicking the active selection's
 *  variable a second time clears the condition. */
export function clickPlot(model: TaskModel, variable: string,
                          value: number): TaskModel {
  if (model.task.visualisation !== "interactive_boxplot") return model;
  const clicked = model.clicked && model.clicked.variable === variable
    ? null
    : { variable, value };
  model.logger.log("condition",
                   clicked ? `${variable}@${value}` : "clear");
  return { ...model, clicked };
}

export type VisView =
  | { kind: "boxplot"; view: BoxplotView }
  | { kind: "hop"; view: HopView }
  | { kind: "interactive_boxplot"; view: InteractiveBoxplotView }
  | { kind: "bhop"; sweep: BhopSweep };

/** Current visualisation payload for the left column. */
export function renderVisualisation(model: TaskModel, nHopFrames = 30,
                                    bhopSortKey?: string): VisView {
  const variables = displayVariables(model);
  switch (model.task.visualisation) {
    case "boxplot":
      return { kind: "boxplot", view: renderBoxplot(model.store, variables) };
    case "hop":
      return {
        kind: "hop",
        view: renderHop(model.store, variables, nHopFrames, model.seed),
      };
    case "interactive_boxplot":
      return {
        kind: "interactive_boxplot",
        view: renderInteractiveBoxplot(model.store, variables, model.clicked,
                                       1000, model.seed),
      };
    case "bhop":
      return {
        kind: "bhop",
        sweep: renderBhopSweep(model.store, variables,
                               bhopSortKey ?? variables[0], model.seed),
      };
    default:
      throw new Error(`unknown visualisation ${model.task.visualisation}`);
  }
}

/** Response payload in the exact shape the scoring endpoint expects. */
export function responsePayload(model: TaskModel): object {
  if (model.slider) {
    if (model.slider.value === null) throw new Error("slider untouched");
    return { type: "slider", value: model.slider.value };
  }
  if (model.multibet) {
    return { type: "multibet", s: model.multibet.s };
  }
  throw new Error("task has no answer widget");
}

const INTERACTIVE_VIS = new Set(["interactive_boxplot", "bhop"]);

/** Participants get a short interstitial notice whenever the study
 *  crosses between the interactive and non-interactive halves. */
export function needsInterstitial(previous: TaskDict | null,
                                  next: TaskDict): boolean {
  if (previous === null) return true;
  return INTERACTIVE_VIS.has(previous.visualisation)
    !== INTERACTIVE_VIS.has(next.visualisation);
}

export function interstitialText(next: TaskDict): string {
  return INTERACTIVE_VIS.has(next.visualisation)
    ? "The following charts are interactive: click on them to explore."
    : "The following charts are static.";
}
