/**
 * Per-task action log: every state-changing interaction is cached
 * locally with a millisecond timestamp relative to task load and
 * flushed with the response submission.
 */

export interface ActionLogEntry {
  action: string;
  digest: string;
  t_ms: number;
}

export type Clock = () => number;

export class ActionLogger {
  private entries: ActionLogEntry[] = [];
  private readonly clock: Clock;
  private taskStart: number;

  constructor(clock: Clock = () => Date.now()) {
    this.clock = clock;
    this.taskStart = clock();
  }

  /** Reset for a new task; records the load event at t = 0. */
  startTask(): void {
    this.taskStart = this.clock();
    this.entries = [{ action: "load", digest: "", t_ms: 0 }];
  }

  log(action: string, digest: string = ""): void {
    const t = Math.max(0, this.clock() - this.taskStart);
    const last = this.entries[this.entries.length - 1];
    // clamp against clock skew so the server-side monotonicity check
    // can never reject a legitimate log
    const t_ms = last && last.t_ms > t ? last.t_ms : t;
    this.entries.push({ action, digest, t_ms });
  }

  /** Entries to send with the response; the log is kept until cleared
   *  so a failed submission can retry with the same payload. */
  flush(): ActionLogEntry[] {
    return this.entries.slice();
  }

  clear(): void {
    this.entries = [];
  }

  get length(): number {
    return this.entries.length;
  }
}
