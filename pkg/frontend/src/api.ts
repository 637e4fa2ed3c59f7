/**
 * REST client for the study service.  Every JSON endpoint wraps its
 * payload in a {status, body} / {status, error_code, error_message}
 * envelope; this module unwraps it and turns error envelopes into
 * typed exceptions so calling code never inspects HTTP status codes.
 */

import { SampleMatrix, VariableSpec, decodeBlob, parseSchema } from "./blob.js";
import { ActionLogEntry } from "./logger.js";

export class ApiError extends Error {
  readonly errorCode: string;
  readonly httpStatus: number;

  constructor(errorCode: string, message: string, httpStatus: number) {
    super(message);
    this.errorCode = errorCode;
    this.httpStatus = httpStatus;
  }
}

export interface TaskDict {
  id: string;
  query_id: string;
  context: string;
  query: string;
  visualisation: string;
  answer_input: any;
  query_meta: { observability: string; quantity: string; conditioning: string };
  objective: any;
  model_ref: string;
  feedback_enabled: boolean;
}

export interface NextTask {
  complete: boolean;
  task?: TaskDict;
  blob_url?: string;
  schema_url?: string;
  cumulative_reward?: number;
  n_responses?: number;
}

export interface SubmitResult {
  reward: number;
  cumulative_reward: number;
  feedback?: any;
}

async function unwrap(response: Response): Promise<any> {
  const envelope = await response.json();
  if (envelope.status === "ok") return envelope.body;
  throw new ApiError(envelope.error_code ?? "unknown",
                     envelope.error_message ?? "request failed",
                     response.status);
}

export class StudyClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  async subscribe(studyId: string): Promise<{ user_id: string; n_tasks: number }> {
    const r = await fetch(`${this.baseUrl}/studies/${studyId}/participants`,
                          { method: "POST" });
    return unwrap(r);
  }

  async nextTask(studyId: string, userId: string): Promise<NextTask> {
    const r = await fetch(
      `${this.baseUrl}/studies/${studyId}/participants/${userId}/task`);
    return unwrap(r);
  }

  async submitResponse(studyId: string, userId: string, taskId: string,
                       payload: object,
                       actionLog: ActionLogEntry[]): Promise<SubmitResult> {
    const r = await fetch(
      `${this.baseUrl}/studies/${studyId}/participants/${userId}/task`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ task_id: taskId, payload, action_log: actionLog }),
      });
    return unwrap(r);
  }

  async fetchBlob(blobId: string): Promise<SampleMatrix> {
    const r = await fetch(`${this.baseUrl}/blobs/${blobId}`);
    if (!r.ok) throw new ApiError("not-found", `blob ${blobId} unavailable`, r.status);
    return decodeBlob(await r.arrayBuffer());
  }

  async fetchSchema(blobId: string): Promise<VariableSpec[]> {
    const r = await fetch(`${this.baseUrl}/blobs/${blobId}/schema`);
    if (!r.ok) throw new ApiError("not-found", `schema ${blobId} unavailable`, r.status);
    return parseSchema(await r.text());
  }

  /** Server-side box statistics, keyed by variable name. */
  async fetchStats(blobId: string): Promise<Record<string, any>> {
    const r = await fetch(`${this.baseUrl}/blobs/${blobId}/stats`);
    return unwrap(r);
  }
}
