/** Typed client for the analytics service.
 *
 * Every mutating control in the UI funnels through here; when a newer
 * request of the same kind is issued, the in-flight one is aborted so the
 * last write wins and stale surfaces never render.
 */

import type {
  GridPayload,
  GridRequest,
  MitigatePayload,
  MitigateRequest,
  ReportPayload,
  ServiceErrorPayload,
  SummaryPayload,
  UploadPayload,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    channel: string,
    path: string,
    init: RequestInit,
  ): Promise<T> {
    const previous = this.inflight.get(channel);
    if (previous) previous.abort();
    const controller = new AbortController();
    this.inflight.set(channel, controller);
    try {
      const response = await this.fetchFn(this.baseUrl + path, {
        ...init,
        signal: controller.signal,
      });
      const text = await response.text();
      if (!response.ok) {
        let payload: ServiceErrorPayload = { error: "Unknown", detail: text };
        try {
          payload = JSON.parse(text) as ServiceErrorPayload;
        } catch {
          // non-JSON error body; keep the raw text as detail
        }
        throw new ApiError(response.status, payload.error, payload.detail);
      }
      return JSON.parse(text) as T;
    } finally {
      if (this.inflight.get(channel) === controller) {
        this.inflight.delete(channel);
      }
    }
  }

  upload(csv: string, schema: unknown, keepRows = false): Promise<UploadPayload> {
    return this.request("upload", "/datasets", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ csv, schema, keep_rows: keepRows }),
    });
  }

  summary(session: string): Promise<SummaryPayload> {
    return this.request("summary", `/datasets/${session}/summary`, {
      method: "GET",
    });
  }

  report(session: string, tau: number): Promise<ReportPayload> {
    return this.request(
      "report",
      `/datasets/${session}/report?tau=${encodeURIComponent(tau)}`,
      { method: "GET" },
    );
  }

  grid(session: string, body: GridRequest): Promise<GridPayload> {
    return this.request("grid", `/datasets/${session}/grid`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  mitigate(session: string, body: MitigateRequest): Promise<MitigatePayload> {
    return this.request("mitigate", `/datasets/${session}/mitigate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
