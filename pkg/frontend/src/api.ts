/**
 * Typed client for the session service HTTP API.
 *
 * The UI performs no mask math of its own: every preview image and every
 * decision goes through these endpoints, so the service stays the single
 * source of truth.
 */

export interface SessionInfo {
  phase: string;
  frame_count: number;
  pending: number | null;
}

export interface CandidateInfo {
  index: number;
  preview: string;
  label: string | null;
  area: number | null;
  predicted_iou: number | null;
  stability_score: number | null;
}

export interface CandidateGrid {
  frame: number;
  count: number;
  candidates: CandidateInfo[];
}

export interface SelectionResult {
  ok: boolean;
  phase: string;
  pending: number | null;
}

export interface TraceFrame {
  frame: number;
  chosen_index: number | null;
  iou: number;
  reference_frame: number;
}

export interface TraceEvent {
  frame: number;
  kind: string;
}

export interface TraceJson {
  version: number;
  frames: TraceFrame[];
  events: TraceEvent[];
}

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(response.status, message);
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  session(): Promise<SessionInfo> {
    return this.getJson<SessionInfo>("/api/session");
  }

  candidates(frame: number): Promise<CandidateGrid> {
    return this.getJson<CandidateGrid>(`/api/frames/${frame}/candidates`);
  }

  trace(): Promise<TraceJson> {
    return this.getJson<TraceJson>("/api/trace");
  }

  async select(frame: number, candidate: number): Promise<SelectionResult> {
    const response = await this.fetchFn(`${this.baseUrl}/api/selection`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ frame, candidate }),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as SelectionResult;
  }

  async shutdown(): Promise<void> {
    await this.fetchFn(`${this.baseUrl}/api/shutdown`, { method: "POST" });
  }

  frameImageUrl(frame: number): string {
    return `${this.baseUrl}/api/frames/${frame}/image`;
  }

  previewUrl(frame: number, candidate: number, raw = false): string {
    const suffix = raw ? "?style=raw" : "";
    return `${this.baseUrl}/api/previews/${frame}/${candidate}.png${suffix}`;
  }
}
