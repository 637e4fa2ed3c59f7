/**
 * Reconstruct final widget state from a flushed action log.  Used to
 * audit sessions: the replayed state must entail exactly the payload
 * that was submitted.
 */

import { ActionLogEntry } from "./logger.js";
import { MultiBetState, click, freshState } from "./multibet.js";
import { TaskDict } from "./api.js";

export interface ReplayedState {
  slider: number | null;
  multibet: MultiBetState | null;
  condition: string | null;
}

export function replayLog(task: TaskDict,
                          log: ActionLogEntry[]): ReplayedState {
  const ai = task.answer_input;
  let slider: number | null = null;
  let multibet: MultiBetState | null =
    ai.type === "multibet" ? freshState(ai.n, ai.m) : null;
  let condition: string | null = null;
  let lastT = -Infinity;
  for (const entry of log) {
    if (entry.t_ms < lastT) {
      throw new Error("action log timestamps decreased");
    }
    lastT = entry.t_ms;
    switch (entry.action) {
      case "load":
        break;
      case "slider":
        slider = Number(entry.digest);
        break;
      case "chip": {
        if (!multibet) throw new Error("chip event on a slider task");
        const [cell] = entry.digest.split("->");
        const [column, row] = cell.split(",").map(Number);
        multibet = click(multibet, column, row);
        break;
      }
      case "condition":
        condition = entry.digest === "clear" ? null : entry.digest;
        break;
      default:
        throw new Error(`unknown logged action ${entry.action}`);
    }
  }
  return { slider, multibet, condition };
}
