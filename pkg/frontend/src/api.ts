/** Typed client for the cutout service API (/api/v1). */

import type { MetricsInfo, SessionInfo, StatusInfo } from "./types.js";

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class CutoutClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(method: string, path: string, body?: BodyInit,
                        contentType?: string): Promise<Response> {
    const headers: Record<string, string> = {};
    if (contentType) headers["Content-Type"] = contentType;
    const resp = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers,
      body,
    });
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const data = await resp.json();
        if (data && data.error) detail = data.error;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return resp;
  }

  private async json<T>(method: string, path: string, payload?: unknown): Promise<T> {
    const body = payload === undefined ? undefined : JSON.stringify(payload);
    const resp = await this.request(method, path, body,
      payload === undefined ? undefined : "application/json");
    return (await resp.json()) as T;
  }

  createSession(sequence: string, k: number): Promise<SessionInfo> {
    return this.json("POST", "/sessions", { sequence, k });
  }

  getSession(id: string): Promise<SessionInfo> {
    return this.json("GET", `/sessions/${id}`);
  }

  async recommendations(id: string): Promise<number[]> {
    const data = await this.json<{ frames: number[] }>("GET", `/sessions/${id}/recommendations`);
    return data.frames;
  }

  frameUrl(id: string, frame: number): string {
    return `${this.baseUrl}/api/v1/sessions/${id}/frames/${frame}`;
  }

  resultMaskUrl(id: string, frame: number): string {
    return `${this.baseUrl}/api/v1/sessions/${id}/results/${frame}/mask`;
  }

  async uploadAnnotation(id: string, frame: number, png: Blob | ArrayBuffer | Uint8Array,
  ): Promise<void> {
    await this.request("PUT", `/sessions/${id}/annotations/${frame}`,
      png as BodyInit, "image/png");
  }

  async fetchAnnotation(id: string, frame: number): Promise<ArrayBuffer> {
    const resp = await this.request("GET", `/sessions/${id}/annotations/${frame}`);
    return resp.arrayBuffer();
  }

  async fetchResultMask(id: string, frame: number): Promise<ArrayBuffer> {
    const resp = await this.request("GET", `/sessions/${id}/results/${frame}/mask`);
    return resp.arrayBuffer();
  }

  async startPropagation(id: string, forwardOnly = false): Promise<string> {
    const data = await this.json<{ job: string }>("POST", `/sessions/${id}/propagate`,
      { forward_only: forwardOnly });
    return data.job;
  }

  status(id: string): Promise<StatusInfo> {
    return this.json("GET", `/sessions/${id}/status`);
  }

  metrics(id: string): Promise<MetricsInfo> {
    return this.json("GET", `/sessions/${id}/metrics`);
  }

  /** Poll the session status until propagation finishes or fails. */
  async waitForPropagation(
    id: string,
    onProgress?: (status: StatusInfo) => void,
    intervalMs = 500,
    timeoutMs = 600_000,
  ): Promise<StatusInfo> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.status(id);
      if (onProgress) onProgress(status);
      if (status.state === "done") return status;
      if (status.state === "error") {
        throw new ApiError(500, status.error ?? "propagation failed");
      }
      if (Date.now() > deadline) throw new ApiError(408, "propagation timed out");
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }
}
