// Thin typed client over the twin API. A custom fetch can be injected so
// tests can stand in a fake server speaking the same URLs.

import { OutcomeReportPayload, PlansResponse, StatePayload } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = `${response.status}`;
  try {
    const body = (await response.json()) as { error?: string };
    if (body.error) detail = body.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(detail, response.status);
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  state(t: number): Promise<StatePayload> {
    return this.get<StatePayload>(`/api/state?t=${encodeURIComponent(t)}`);
  }

  plans(): Promise<PlansResponse> {
    return this.get<PlansResponse>("/api/plans");
  }

  async decide(planId: string): Promise<OutcomeReportPayload> {
    const response = await this.fetchFn("/api/decision", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ plan_id: planId }),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as OutcomeReportPayload;
  }

  report(): Promise<OutcomeReportPayload> {
    return this.get<OutcomeReportPayload>("/api/report");
  }

  /** Follow the text event stream; onSnapshot fires per {"t": ...} event.
      Returns a stop function. Clients refetch state themselves. */
  subscribeEvents(onSnapshot: (t: number) => void): () => void {
    const controller = new AbortController();
    void (async () => {
      try {
        const response = await this.fetchFn(`${this.base}/api/events`, {
          signal: controller.signal,
        } as RequestInit);
        if (!response.ok || !response.body) return;
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let idx;
          while ((idx = buffer.indexOf("\n")) >= 0) {
            const line = buffer.slice(0, idx).trim();
            buffer = buffer.slice(idx + 1);
            if (line.startsWith("data:")) {
              try {
                const payload = JSON.parse(line.slice(5)) as { t: number };
                onSnapshot(payload.t);
              } catch {
                // malformed event payload; skip
              }
            }
          }
        }
      } catch {
        // stream closed or aborted; the UI stays pull-based regardless
      }
    })();
    return () => controller.abort();
  }
}
