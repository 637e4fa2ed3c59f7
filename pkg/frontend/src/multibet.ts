/**
 * MultiBet chip-allocation widget state, kept identical to the server's
 * state machine so a replayed click trace reconstructs the exact state
 * the server will score.
 */

export type ButtonState = "selected" | "deselected" | "disabled";

export interface MultiBetState {
  /** chips per option */
  s: number[];
  /** total chip budget */
  m: number;
}

export function freshState(n: number, m: number): MultiBetState {
  if (n < 1 || m < 1) throw new Error("need at least one option and one chip");
  return { s: new Array(n).fill(0), m };
}

export function totalChips(state: MultiBetState): number {
  return state.s.reduce((a, b) => a + b, 0);
}

/**
 * Display rule for button `row` (1-based from the bottom) in `column`:
 * the bottom s_i buttons are selected, the next M - sum(s) deselected,
 * everything above disabled.
 */
export function buttonState(state: MultiBetState, column: number,
                            row: number): ButtonState {
  if (column < 0 || column >= state.s.length || row < 1 || row > state.m) {
    throw new Error("button outside the widget grid");
  }
  const si = state.s[column];
  if (row <= si) return "selected";
  if (row <= si + state.m - totalChips(state)) return "deselected";
  return "disabled";
}

/**
 * One click.  Deselected buttons raise s_i to the clicked row; selected
 * buttons drop s_i to row - 1 (removing that chip and all above it);
 * disabled buttons are inert.
 */
export function click(state: MultiBetState, column: number,
                      row: number): MultiBetState {
  const kind = buttonState(state, column, row);
  if (kind === "disabled") return state;
  const s = state.s.slice();
  s[column] = kind === "deselected" ? row : row - 1;
  return { s, m: state.m };
}

/**
 * Probability distribution entailed by a chip allocation:
 * p_i = (s_i + eps) / (sum(s) + N * eps).  Matches the server, so the
 * feedback panel can be cross-checked against the submitted state.
 */
export function entailedProbs(state: MultiBetState, epsilon = 0): number[] {
  const total = totalChips(state);
  if (total < 1) throw new Error("at least one chip must be placed");
  const denom = total + state.s.length * epsilon;
  return state.s.map(si => (si + epsilon) / denom);
}

/** Full circle grid for rendering: grid[column][row-1]. */
export function displayGrid(state: MultiBetState): ButtonState[][] {
  return state.s.map((_, col) => {
    const column: ButtonState[] = [];
    for (let row = 1; row <= state.m; row++) {
      column.push(buttonState(state, col, row));
    }
    return column;
  });
}
