// Typed client for the session service. The UI talks to the documented
// endpoints only; every state change round-trips the server.

import type {
  CreateSessionRequest,
  FinalizeResult,
  FixPayload,
  SessionState,
  StepResult,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

async function parseJson(response: Response): Promise<any> {
  const text = await response.text();
  let body: any = null;
  try {
    body = text ? JSON.parse(text) : null;
  } catch {
    body = { detail: text };
  }
  if (!response.ok) {
    const detail =
      body && typeof body.detail === "string" ? body.detail : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private async post(path: string, payload?: unknown): Promise<any> {
    return parseJson(
      await fetch(this.url(path), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: payload === undefined ? "{}" : JSON.stringify(payload),
      }),
    );
  }

  async createSession(request: CreateSessionRequest): Promise<string> {
    const body = await this.post("/sessions", request);
    return body.id as string;
  }

  async getSession(id: string): Promise<SessionState> {
    return parseJson(await fetch(this.url(`/sessions/${id}`)));
  }

  async step(id: string): Promise<StepResult> {
    return this.post(`/sessions/${id}/step`);
  }

  async feedback(id: string, fix: FixPayload): Promise<SessionState> {
    return this.post(`/sessions/${id}/feedback`, fix);
  }

  async finalize(id: string): Promise<FinalizeResult> {
    return this.post(`/sessions/${id}/finalize`);
  }

  async airport(icao: string): Promise<any> {
    return parseJson(await fetch(this.url(`/navdata/${icao}`)));
  }
}
