/** Wire types mirroring the suggestion service's JSON bodies. */

export interface Suggestion {
  word: string;
  score: number;
  source_model: string;
}

export interface SuggestRequest {
  difficult: string;
  typed: string[];
  n: number;
  strategy: string;
}

export interface SuggestResponse {
  strategy: string;
  suggestions: Suggestion[];
  warnings?: string[];
}

export type SessionEventKind =
  | "suggest_shown"
  | "accepted"
  | "overridden"
  | "finished";

export interface SessionEventPayload {
  word?: string;
  rank?: number | null;
  count?: number;
  timestamp?: number;
  client_seq: number;
}

export interface SessionEvent {
  session_id: string;
  event: SessionEventKind;
  payload: SessionEventPayload;
}

export interface EventAck {
  session_id: string;
  seq: number;
  duplicate: boolean;
}

export interface ReplayResponse {
  session_id: string;
  tokens: string[];
  sentence: string;
}

export interface HealthResponse {
  status: string;
  backends: Record<string, boolean>;
}
