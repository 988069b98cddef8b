/** Typed client for the qualbn HTTP API.
 *
 * Queries are single-flight: issuing a new query aborts the pending one, so
 * the display always reflects the latest selection (last write wins).
 */

import type { CheckDoc, Evidence, ModelDoc, QueryDoc } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public payload: { error?: string; detail?: string; evidence?: Evidence },
  ) {
    super(payload.detail ?? payload.error ?? `HTTP ${status}`);
  }

  get impossibleEvidence(): boolean {
    return this.status === 422;
  }
}

async function parseJson(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    return {};
  }
}

export class ApiClient {
  private pendingQuery: AbortController | null = null;

  constructor(
    private base: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(this.base + path, init);
    const payload = await parseJson(response);
    if (!response.ok) {
      throw new ApiError(response.status, payload as ApiError["payload"]);
    }
    return payload;
  }

  async model(): Promise<ModelDoc> {
    return (await this.request("/api/model")) as ModelDoc;
  }

  /** POST the evidence; a still-pending earlier query is aborted.
   *  Returns null when this call itself was superseded. */
  async query(evidence: Evidence): Promise<QueryDoc | null> {
    this.pendingQuery?.abort();
    const controller = new AbortController();
    this.pendingQuery = controller;
    try {
      const doc = await this.request("/api/query", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ evidence }),
        signal: controller.signal,
      });
      return doc as QueryDoc;
    } catch (error) {
      if (controller.signal.aborted) return null;
      throw error;
    } finally {
      if (this.pendingQuery === controller) this.pendingQuery = null;
    }
  }

  async check(): Promise<CheckDoc> {
    return (await this.request("/api/check", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    })) as CheckDoc;
  }
}
