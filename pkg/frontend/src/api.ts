/**
 * Thin client for the suggestion service.
 *
 * Suggest calls are cancellable: issuing a new request aborts the previous
 * in-flight one (latest prefix wins), and responses for superseded requests
 * are reported as stale rather than delivered out of order.
 */

import type {
  EventAck,
  HealthResponse,
  ReplayResponse,
  SessionEvent,
  SuggestRequest,
  SuggestResponse,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
    signal?: AbortSignal;
  },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

/** Thrown (as a rejection) when a newer suggest request superseded this one. */
export class SupersededError extends Error {
  constructor() {
    super("superseded by a newer request");
    this.name = "SupersededError";
  }
}

export class ApiClient {
  private inFlight: AbortController | null = null;
  private requestCounter = 0;

  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) =>
      fetch(url, init) as ReturnType<FetchLike>,
  ) {}

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    const parsed = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ServiceError(response.status, String(parsed["error"] ?? "request failed"));
    }
    return parsed as T;
  }

  /**
   * Request suggestions for the current prefix, cancelling any pending
   * suggest call. Rejects with SupersededError when a newer call started
   * before this one resolved.
   */
  async suggest(request: SuggestRequest): Promise<SuggestResponse> {
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    const ticket = ++this.requestCounter;
    try {
      const result = await this.post<SuggestResponse>("/v1/suggest", request, controller.signal);
      if (ticket !== this.requestCounter) {
        throw new SupersededError();
      }
      return result;
    } catch (error) {
      if (controller.signal.aborted) {
        throw new SupersededError();
      }
      throw error;
    } finally {
      if (this.inFlight === controller) {
        this.inFlight = null;
      }
    }
  }

  logEvent(event: SessionEvent): Promise<EventAck> {
    return this.post<EventAck>("/v1/session/events", event);
  }

  async replay(sessionId: string): Promise<ReplayResponse> {
    const response = await this.fetchFn(
      `${this.baseUrl}/v1/session/${encodeURIComponent(sessionId)}/replay`,
    );
    const parsed = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ServiceError(response.status, String(parsed["error"] ?? "request failed"));
    }
    return parsed as unknown as ReplayResponse;
  }

  async health(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/health`);
    return (await response.json()) as HealthResponse;
  }
}
