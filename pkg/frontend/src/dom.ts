/**
 * Browser binding for the editor session.
 *
 * Layout: the difficult sentence on top, the growing simplification under
 * it, a text input, and a dropdown of the top suggestions with source-model
 * attribution. Tab accepts the highlighted top suggestion, digit keys 2-5
 * accept lower ranks, Enter (or space) commits the free-typed word, and the
 * "finish" button closes the session. A badge appears when shown
 * suggestions are stale because the service was unreachable.
 */

import { ApiClient } from "./api.js";
import { EditorSession } from "./editor.js";
import type { EditorState } from "./editor.js";

export interface MountOptions {
  serviceUrl: string;
  difficult: string;
  sessionId?: string;
  strategy?: string;
  suggestionCount?: number;
  strategies?: string[];
}

const DEFAULT_STRATEGIES = ["single:reference", "majority", "4cc", "autometsl"];

export function mountEditor(root: HTMLElement, options: MountOptions): EditorSession {
  const client = new ApiClient(options.serviceUrl);
  const session = new EditorSession(client, {
    difficult: options.difficult,
    sessionId: options.sessionId ?? `session-${Date.now().toString(36)}`,
    strategy: options.strategy,
    suggestionCount: options.suggestionCount,
  });

  root.innerHTML = `
    <div class="lk-editor">
      <p class="lk-difficult"></p>
      <p class="lk-typed"></p>
      <div class="lk-controls">
        <input class="lk-input" type="text" autocomplete="off"
               placeholder="type the next word" />
        <select class="lk-strategy"></select>
        <button class="lk-finish" type="button">finish</button>
        <span class="lk-stale" hidden>suggestions stale - service unreachable</span>
      </div>
      <ol class="lk-suggestions"></ol>
      <p class="lk-hint">Tab accepts the top suggestion; keys 2-5 accept lower ranks.</p>
    </div>`;

  const difficultEl = root.querySelector<HTMLElement>(".lk-difficult")!;
  const typedEl = root.querySelector<HTMLElement>(".lk-typed")!;
  const inputEl = root.querySelector<HTMLInputElement>(".lk-input")!;
  const strategyEl = root.querySelector<HTMLSelectElement>(".lk-strategy")!;
  const finishEl = root.querySelector<HTMLButtonElement>(".lk-finish")!;
  const staleEl = root.querySelector<HTMLElement>(".lk-stale")!;
  const listEl = root.querySelector<HTMLOListElement>(".lk-suggestions")!;

  difficultEl.textContent = options.difficult;
  for (const name of options.strategies ?? DEFAULT_STRATEGIES) {
    const entry = document.createElement("option");
    entry.value = name;
    entry.textContent = name;
    strategyEl.appendChild(entry);
  }
  strategyEl.value = options.strategy ?? DEFAULT_STRATEGIES[0]!;

  function render(state: EditorState): void {
    typedEl.textContent = state.typed.join(" ");
    staleEl.hidden = !state.stale;
    inputEl.disabled = state.finished;
    finishEl.disabled = state.finished;
    listEl.innerHTML = "";
    state.suggestions.forEach((suggestion, index) => {
      const item = document.createElement("li");
      item.className = index === 0 ? "lk-suggestion lk-top" : "lk-suggestion";
      const button = document.createElement("button");
      button.type = "button";
      button.textContent = `${index + 1}. ${suggestion.word}`;
      button.addEventListener("click", () => {
        void session.acceptSuggestion(index + 1);
      });
      const source = document.createElement("span");
      source.className = "lk-source";
      source.textContent = suggestion.source_model;
      item.appendChild(button);
      item.appendChild(source);
      listEl.appendChild(item);
    });
  }

  function commitTyped(): void {
    const word = inputEl.value.trim();
    if (!word) {
      return;
    }
    inputEl.value = "";
    void session.commitToken(word);
  }

  inputEl.addEventListener("keydown", (event: KeyboardEvent) => {
    const state = session.getState();
    if (event.key === "Tab" && state.suggestions.length > 0 && !inputEl.value) {
      event.preventDefault();
      void session.acceptSuggestion(1);
      return;
    }
    if (
      !inputEl.value &&
      event.key >= "2" &&
      event.key <= "5" &&
      state.suggestions.length >= Number(event.key)
    ) {
      event.preventDefault();
      void session.acceptSuggestion(Number(event.key));
      return;
    }
    if (event.key === "Enter" || event.key === " ") {
      event.preventDefault();
      commitTyped();
    }
  });

  strategyEl.addEventListener("change", () => {
    void session.setStrategy(strategyEl.value);
  });
  finishEl.addEventListener("click", () => {
    void session.finish();
  });

  session.subscribe(render);
  render(session.getState());
  return session;
}
