/**
 * Session poll loop and prompt lifecycle, kept free of DOM concerns so it
 * can run headless in tests.
 *
 * Polls GET /api/session; when the session waits on a frame (the initial
 * pick or a re-selection after a scene cut) it fetches that frame's
 * candidate grid and raises exactly one prompt for it. Selections funnel
 * through submit(), which keeps at most one mutation in flight; repeats
 * are no-ops locally and idempotent at the service.
 */

import {
  CandidateGrid,
  SelectionResult,
  ServiceClient,
  SessionInfo,
  TraceJson,
} from "./api.js";

export interface PromptRequest {
  frame: number;
  grid: CandidateGrid;
}

export interface ControllerHooks {
  onStatus?(info: SessionInfo): void;
  onPrompt?(prompt: PromptRequest): void;
  onDone?(trace: TraceJson): void;
  onError?(error: unknown, retryInMs: number): void;
}

const WAITING_PHASES = new Set(["awaiting_initial_selection", "awaiting_reselection"]);
const BASE_INTERVAL_MS = 1000;
const MAX_BACKOFF_MS = 10_000;

export class SessionController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  private inFlight = false;
  private promptedFrame: number | null = null;
  private backoffMs = BASE_INTERVAL_MS;

  constructor(
    private readonly client: ServiceClient,
    private readonly hooks: ControllerHooks = {},
    private readonly intervalMs: number = BASE_INTERVAL_MS,
  ) {}

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  /** One poll step; returns false once the session is finished. */
  async tick(): Promise<boolean> {
    let info: SessionInfo;
    try {
      info = await this.client.session();
    } catch (error) {
      this.backoffMs = Math.min(this.backoffMs * 2, MAX_BACKOFF_MS);
      this.hooks.onError?.(error, this.backoffMs);
      return true;
    }
    this.backoffMs = BASE_INTERVAL_MS;
    this.hooks.onStatus?.(info);

    if (info.phase === "done") {
      const trace = await this.client.trace();
      this.hooks.onDone?.(trace);
      return false;
    }
    if (WAITING_PHASES.has(info.phase) && info.pending !== null) {
      if (this.promptedFrame !== info.pending) {
        const grid = await this.client.candidates(info.pending);
        this.promptedFrame = info.pending;
        this.hooks.onPrompt?.({ frame: info.pending, grid });
      }
    }
    return true;
  }

  /**
   * Relay one click. Returns the service answer, or "busy" when another
   * submission is already in flight (the second of two rapid clicks).
   * A 422 (invalid candidate) is rethrown so the caller can flag the
   * tile; the prompt stays open and the poll loop is not disturbed.
   */
  async submit(frame: number, candidate: number): Promise<SelectionResult | "busy"> {
    if (this.inFlight) return "busy";
    this.inFlight = true;
    try {
      const result = await this.client.select(frame, candidate);
      if (this.promptedFrame === frame) this.promptedFrame = null;
      return result;
    } finally {
      this.inFlight = false;
    }
  }

  private async loop(): Promise<void> {
    if (this.stopped) return;
    const keepGoing = await this.tick();
    if (!keepGoing || this.stopped) return;
    const delay = this.backoffMs > BASE_INTERVAL_MS ? this.backoffMs : this.intervalMs;
    this.timer = setTimeout(() => void this.loop(), delay);
  }
}
