import { describe, expect, it } from "vitest";

import { ApiClient, SupersededError } from "../src/api.js";
import { EditorSession } from "../src/editor.js";
import { FakeService } from "./fake_service.js";

function makeSession(service: FakeService, overrides: Partial<{ strategy: string }> = {}) {
  const client = new ApiClient("http://fake", service.fetch);
  return new EditorSession(client, {
    difficult: "a difficult sentence to simplify",
    sessionId: "s1",
    strategy: overrides.strategy ?? "single:reference",
  });
}

describe("EditorSession commits", () => {
  it("logs the first typed token as overridden with no rank", async () => {
    const service = new FakeService();
    const session = makeSession(service);
    await session.commitToken("This");
    const first = service.events[0];
    expect(first?.event).toBe("overridden");
    expect(first?.payload.word).toBe("This");
    expect(first?.payload.rank).toBeNull();
  });

  it("logs accepted with the rank of the suggestion picked", async () => {
    const service = new FakeService(() => [
      { word: "take", score: 0.6, source_model: "reference" },
      { word: "use", score: 0.3, source_model: "reference" },
    ]);
    const session = makeSession(service);
    await session.commitToken("This");
    await session.acceptSuggestion(2);
    const accepted = service.events.find((event) => event.event === "accepted");
    expect(accepted?.payload.word).toBe("use");
    expect(accepted?.payload.rank).toBe(2);
    expect(session.getState().typed).toEqual(["This", "use"]);
  });

  it("infers the rank when a typed word matches a shown suggestion", async () => {
    const service = new FakeService(() => [
      { word: "tells", score: 0.6, source_model: "reference" },
    ]);
    const session = makeSession(service);
    await session.commitToken("This");
    await session.commitToken("tells");
    const accepted = service.events.find((event) => event.event === "accepted");
    expect(accepted?.payload.word).toBe("tells");
    expect(accepted?.payload.rank).toBe(1);
  });

  it("requests new suggestions after every committed token", async () => {
    const service = new FakeService();
    const session = makeSession(service);
    await session.commitToken("This");
    await session.commitToken("insulin");
    expect(service.suggestCalls.map((call) => call.typed)).toEqual([
      ["This"],
      ["This", "insulin"],
    ]);
    expect(session.getState().suggestions.length).toBeGreaterThan(0);
  });

  it("rejects empty and multi-word tokens", async () => {
    const session = makeSession(new FakeService());
    await expect(session.commitToken("  ")).rejects.toThrow("empty token");
    await expect(session.commitToken("two words")).rejects.toThrow("one token");
  });

  it("refuses commits after finish", async () => {
    const service = new FakeService();
    const session = makeSession(service);
    await session.commitToken("This");
    await session.finish();
    await expect(session.commitToken("more")).rejects.toThrow("finished");
    expect(service.events.at(-1)?.event).toBe("finished");
  });
});

describe("suggestion flow", () => {
  it("latest prefix wins when responses arrive out of order", async () => {
    const service = new FakeService((typed) => [
      { word: `for-${typed.join("_")}`, score: 0.5, source_model: "reference" },
    ]);
    service.suggestDelays = [50, 0];
    const session = makeSession(service);
    const first = session.commitToken("This");
    const second = session.commitToken("insulin");
    await Promise.all([first, second]);
    await new Promise((resolve) => setTimeout(resolve, 80));
    expect(session.getState().suggestions[0]?.word).toBe("for-This_insulin");
  });

  it("strategy switch re-requests for the same prefix", async () => {
    const service = new FakeService();
    const session = makeSession(service);
    await session.commitToken("This");
    await session.setStrategy("majority");
    const calls = service.suggestCalls;
    expect(calls.at(-1)?.strategy).toBe("majority");
    expect(calls.at(-1)?.typed).toEqual(["This"]);
    expect(calls.at(-2)?.typed).toEqual(["This"]);
  });

  it("marks suggestions stale when the service is unreachable, editor stays typable", async () => {
    const service = new FakeService();
    const session = makeSession(service);
    await session.commitToken("This");
    service.offline = true;
    await session.commitToken("insulin");
    const state = session.getState();
    expect(state.stale).toBe(true);
    expect(state.typed).toEqual(["This", "insulin"]);
    // Recovery: the queued events flush and the badge clears.
    service.offline = false;
    await session.refreshSuggestions();
    await session.flush();
    expect(session.getState().stale).toBe(false);
    expect(session.pendingEvents()).toBe(0);
  });

  it("an aborted request surfaces as superseded, not an error", async () => {
    const service = new FakeService();
    service.suggestDelays = [100];
    const client = new ApiClient("http://fake", service.fetch);
    const slow = client.suggest({ difficult: "d", typed: ["a"], n: 5, strategy: "s" });
    const fast = client.suggest({ difficult: "d", typed: ["a", "b"], n: 5, strategy: "s" });
    await expect(slow).rejects.toBeInstanceOf(SupersededError);
    await expect(fast).resolves.toBeTruthy();
  });
});

describe("session replay invariant", () => {
  it("the event log reconstructs exactly the typed prefix", async () => {
    const service = new FakeService(() => [
      { word: "tells", score: 0.5, source_model: "reference" },
      { word: "helps", score: 0.3, source_model: "reference" },
    ]);
    const session = makeSession(service);
    await session.commitToken("This");
    await session.acceptSuggestion(1);
    await session.commitToken("everyone");
    await session.acceptSuggestion(2);
    await session.finish();
    const typed = session.getState().typed.join(" ");
    expect(service.sentence("s1")).toBe(typed);
    expect(typed).toBe("This tells everyone helps");
  });

  it("typed prefix only changes through explicit commits", async () => {
    const service = new FakeService();
    const session = makeSession(service);
    await session.commitToken("only");
    const before = session.getState().typed;
    await session.refreshSuggestions();
    await session.setStrategy("majority");
    service.offline = true;
    await session.refreshSuggestions();
    expect(session.getState().typed).toEqual(before);
  });
});
