/**
 * DOM-free editor session for human-in-the-loop sentence simplification.
 *
 * The session owns the typed prefix and the suggestion list for it. Every
 * committed token is logged as `accepted` (with the 1-based rank of the
 * suggestion it came from) or `overridden` (free typing), then a new
 * suggestion request is issued for the grown prefix; a newer keystroke
 * cancels the pending request. The typed prefix only ever changes through
 * an explicit commit, so replaying the event log reconstructs it exactly.
 *
 * Events are queued and flushed in order with a per-session client
 * sequence number; the service acks duplicates idempotently, so retrying
 * after an offline stretch is safe.
 */

import { ApiClient, SupersededError } from "./api.js";
import type { SessionEventKind, Suggestion } from "./types.js";

export interface EditorOptions {
  difficult: string;
  sessionId: string;
  strategy?: string;
  suggestionCount?: number;
}

export interface EditorState {
  difficult: string;
  typed: readonly string[];
  suggestions: readonly Suggestion[];
  /** True when the shown suggestions no longer match the prefix (offline). */
  stale: boolean;
  pending: boolean;
  finished: boolean;
  strategy: string;
  sessionId: string;
}

export interface CommitRecord {
  prefix: string[];
  suggestionsShown: Suggestion[];
  token: string;
  rank: number | null;
}

type Listener = (state: EditorState) => void;

const MIN_SUGGESTIONS = 1;
const MAX_SUGGESTIONS = 10;

export class EditorSession {
  private typed: string[] = [];
  private suggestions: Suggestion[] = [];
  private stale = false;
  private pending = false;
  private finished = false;
  private strategy: string;
  private readonly suggestionCount: number;
  private clientSeq = 0;
  private outbox: Array<{ event: SessionEventKind; payload: Record<string, unknown> }> = [];
  private flushing = false;
  private listeners: Listener[] = [];
  /** One record per committed token; used for replay verification. */
  readonly commits: CommitRecord[] = [];

  constructor(
    private readonly client: ApiClient,
    private readonly options: EditorOptions,
  ) {
    this.strategy = options.strategy ?? "single:reference";
    const count = options.suggestionCount ?? 5;
    if (count < MIN_SUGGESTIONS || count > MAX_SUGGESTIONS) {
      throw new Error(`suggestionCount must be in ${MIN_SUGGESTIONS}..${MAX_SUGGESTIONS}`);
    }
    this.suggestionCount = count;
  }

  getState(): EditorState {
    return {
      difficult: this.options.difficult,
      typed: [...this.typed],
      suggestions: [...this.suggestions],
      stale: this.stale,
      pending: this.pending,
      finished: this.finished,
      strategy: this.strategy,
      sessionId: this.options.sessionId,
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((entry) => entry !== listener);
    };
  }

  private notify(): void {
    const state = this.getState();
    for (const listener of this.listeners) {
      listener(state);
    }
  }

  /** Commit a free-typed token; rank is inferred from the shown list. */
  async commitToken(token: string): Promise<void> {
    const shown = this.suggestions;
    const index = shown.findIndex((entry) => entry.word === token);
    await this.commit(token, index >= 0 ? index + 1 : null);
  }

  /** Accept the suggestion at a 1-based rank in the shown list. */
  async acceptSuggestion(rank: number): Promise<void> {
    const suggestion = this.suggestions[rank - 1];
    if (!suggestion) {
      throw new Error(`no suggestion at rank ${rank}`);
    }
    await this.commit(suggestion.word, rank);
  }

  private async commit(token: string, rank: number | null): Promise<void> {
    if (this.finished) {
      throw new Error("session already finished");
    }
    const trimmed = token.trim();
    if (!trimmed) {
      throw new Error("cannot commit an empty token");
    }
    if (/\s/.test(trimmed)) {
      throw new Error("commit one token at a time");
    }
    this.commits.push({
      prefix: [...this.typed],
      suggestionsShown: [...this.suggestions],
      token: trimmed,
      rank,
    });
    this.typed.push(trimmed);
    this.enqueue(rank === null ? "overridden" : "accepted", { word: trimmed, rank });
    this.notify();
    await Promise.all([this.flush(), this.refreshSuggestions()]);
  }

  /** End the session; no further commits are possible. */
  async finish(): Promise<void> {
    if (this.finished) {
      return;
    }
    this.finished = true;
    this.suggestions = [];
    this.enqueue("finished", {});
    this.notify();
    await this.flush();
  }

  /** Switch combination strategy and re-request for the same prefix. */
  async setStrategy(strategy: string): Promise<void> {
    this.strategy = strategy;
    this.notify();
    if (this.typed.length > 0 && !this.finished) {
      await this.refreshSuggestions();
    }
  }

  /** Re-request suggestions for the current prefix (retry after offline). */
  async refreshSuggestions(): Promise<void> {
    if (this.typed.length === 0 || this.finished) {
      return;
    }
    this.pending = true;
    this.notify();
    try {
      const response = await this.client.suggest({
        difficult: this.options.difficult,
        typed: [...this.typed],
        n: this.suggestionCount,
        strategy: this.strategy,
      });
      this.suggestions = response.suggestions;
      this.stale = false;
      this.pending = false;
      this.enqueue("suggest_shown", { count: response.suggestions.length });
      this.notify();
      await this.flush();
    } catch (error) {
      if (error instanceof SupersededError) {
        return; // a newer prefix owns the dropdown now
      }
      // Service unreachable: keep the editor typable, mark what is shown
      // as stale so the view can badge it.
      this.stale = true;
      this.pending = false;
      this.notify();
    }
  }

  private enqueue(event: SessionEventKind, payload: Record<string, unknown>): void {
    this.clientSeq += 1;
    this.outbox.push({
      event,
      payload: { ...payload, client_seq: this.clientSeq, timestamp: Date.now() },
    });
  }

  /** Drain the event outbox in order; leaves unsent events queued. */
  async flush(): Promise<void> {
    if (this.flushing) {
      return;
    }
    this.flushing = true;
    try {
      while (this.outbox.length > 0) {
        const next = this.outbox[0]!;
        try {
          await this.client.logEvent({
            session_id: this.options.sessionId,
            event: next.event,
            payload: next.payload as never,
          });
          this.outbox.shift();
        } catch {
          this.stale = true;
          this.notify();
          return;
        }
      }
    } finally {
      this.flushing = false;
    }
  }

  pendingEvents(): number {
    return this.outbox.length;
  }
}
