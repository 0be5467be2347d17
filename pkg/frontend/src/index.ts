export { ApiClient, ServiceError, SupersededError } from "./api.js";
export type { FetchLike } from "./api.js";
export { EditorSession } from "./editor.js";
export type { CommitRecord, EditorOptions, EditorState } from "./editor.js";
export { mountEditor } from "./dom.js";
export type { MountOptions } from "./dom.js";
export type {
  EventAck,
  HealthResponse,
  ReplayResponse,
  SessionEvent,
  SessionEventKind,
  SessionEventPayload,
  SuggestRequest,
  SuggestResponse,
  Suggestion,
} from "./types.js";
