import { describe, expect, it } from "vitest";

import { ApiError, ServiceClient, TraceJson } from "../src/api.js";
import { PromptRequest, SessionController } from "../src/controller.js";

/**
 * In-memory double of the session service for the scene-cut scenario:
 * frame 0 pick -> re-selection pending at frame 5 -> done. Implements the
 * same contract the real service tests pin down: idempotent repeats, 409
 * off phase or on conflicting replays, 422 for bad indices.
 */
class FakeService {
  phase = "awaiting_initial_selection";
  pending: number | null = 0;
  selections = new Map<number, number>();
  selectCalls = 0;
  sessionCalls = 0;
  failNextSessions = 0;
  candidatesPerFrame = 3;

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private info(): Response {
    return this.json(200, { phase: this.phase, frame_count: 8, pending: this.pending });
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    if (url.endsWith("/api/session")) {
      this.sessionCalls += 1;
      if (this.failNextSessions > 0) {
        this.failNextSessions -= 1;
        throw new TypeError("fetch failed");
      }
      return this.info();
    }
    const grid = url.match(/\/api\/frames\/(\d+)\/candidates$/);
    if (grid) {
      const frame = Number(grid[1]);
      const candidates = Array.from({ length: this.candidatesPerFrame }, (_, i) => ({
        index: i,
        preview: `/api/previews/${frame}/${i}.png`,
        label: null,
        area: 100 + i,
        predicted_iou: null,
        stability_score: null,
      }));
      return this.json(200, { frame, count: candidates.length, candidates });
    }
    if (url.endsWith("/api/trace")) {
      return this.json(200, {
        version: 1,
        frames: [{ frame: 0, chosen_index: 0, iou: 1.0, reference_frame: 0 }],
        events: [{ frame: 5, kind: "reselected" }],
      });
    }
    if (url.endsWith("/api/selection") && init?.method === "POST") {
      this.selectCalls += 1;
      const { frame, candidate } = JSON.parse(String(init.body)) as {
        frame: number;
        candidate: number;
      };
      const accepted = this.selections.get(frame);
      if (accepted !== undefined) {
        if (accepted === candidate) return this.json(200, this.okBody());
        return this.json(409, { error: `frame ${frame} already resolved` });
      }
      if (this.pending !== frame) {
        return this.json(409, { error: `not waiting on frame ${frame}` });
      }
      if (candidate < 0 || candidate >= this.candidatesPerFrame) {
        return this.json(422, { error: `candidate ${candidate} out of range` });
      }
      this.selections.set(frame, candidate);
      if (frame === 0) {
        this.phase = "awaiting_reselection";
        this.pending = 5;
      } else {
        this.phase = "done";
        this.pending = null;
      }
      return this.json(200, this.okBody());
    }
    return this.json(404, { error: `no such endpoint: ${url}` });
  };

  private okBody() {
    return { ok: true, phase: this.phase, pending: this.pending };
  }
}

function harness() {
  const service = new FakeService();
  const prompts: PromptRequest[] = [];
  const errors: unknown[] = [];
  let done: TraceJson | null = null;
  const client = new ServiceClient("http://fake", service.fetch);
  const controller = new SessionController(client, {
    onPrompt: (p) => prompts.push(p),
    onDone: (t) => {
      done = t;
    },
    onError: (e) => errors.push(e),
  });
  return { service, prompts, errors, controller, doneTrace: () => done };
}

describe("SessionController", () => {
  it("prompts exactly once per pending frame across repeated polls", async () => {
    const { prompts, controller } = harness();
    await controller.tick();
    await controller.tick();
    await controller.tick();
    expect(prompts.map((p) => p.frame)).toEqual([0]);
    expect(prompts[0]!.grid.candidates.map((c) => c.index)).toEqual([0, 1, 2]);
  });

  it("walks initial pick -> re-selection -> done and surfaces the trace", async () => {
    const { service, prompts, controller, doneTrace } = harness();
    await controller.tick();
    await controller.submit(0, 0);
    await controller.tick();
    await controller.tick();
    expect(prompts.map((p) => p.frame)).toEqual([0, 5]);
    await controller.submit(5, 1);
    const keepGoing = await controller.tick();
    expect(keepGoing).toBe(false);
    expect(doneTrace()!.events).toEqual([{ frame: 5, kind: "reselected" }]);
    expect(service.selections.get(5)).toBe(1);
  });

  it("collapses rapid double clicks into one request", async () => {
    const { service, controller } = harness();
    await controller.tick();
    const [first, second] = await Promise.all([
      controller.submit(0, 0),
      controller.submit(0, 0),
    ]);
    const results = [first, second];
    expect(results.filter((r) => r === "busy")).toHaveLength(1);
    expect(service.selectCalls).toBe(1);
    // a later repeat is answered idempotently by the service
    const replay = await controller.submit(0, 0);
    expect(replay).not.toBe("busy");
    expect((replay as { ok: boolean }).ok).toBe(true);
    expect(service.phase).toBe("awaiting_reselection");
  });

  it("rethrows 422 and keeps the prompt open", async () => {
    const { service, prompts, controller } = harness();
    await controller.tick();
    await expect(controller.submit(0, 99)).rejects.toMatchObject({ status: 422 });
    expect(service.selections.size).toBe(0);
    await controller.tick();
    expect(prompts.map((p) => p.frame)).toEqual([0]); // no duplicate prompt
  });

  it("rejects conflicting replays with 409", async () => {
    const { controller } = harness();
    await controller.tick();
    await controller.submit(0, 0);
    let caught: unknown;
    try {
      await controller.submit(0, 2);
    } catch (error) {
      caught = error;
    }
    expect(caught).toBeInstanceOf(ApiError);
    expect((caught as ApiError).status).toBe(409);
  });

  it("reports connection loss with growing backoff, then recovers", async () => {
    const { service, errors, controller, prompts } = harness();
    service.failNextSessions = 2;
    await controller.tick();
    await controller.tick();
    expect(errors).toHaveLength(2);
    await controller.tick(); // service is back
    expect(prompts.map((p) => p.frame)).toEqual([0]);
  });
});
