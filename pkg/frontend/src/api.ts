/** Thin typed client for the analytics API; the base URL is the only setting. */

import type {
  ApiError,
  FrameDescriptor,
  GamPayload,
  MapPayload,
  MetaPayload,
  ModelSpecDraft,
  SummaryPayload,
  TimelinePayload,
} from "./types.js";

export class ApiRequestError extends Error {
  readonly status: number;
  readonly body: ApiError | null;

  constructor(status: number, body: ApiError | null) {
    super(body ? `${body.code}: ${body.message}` : `HTTP ${status}`);
    this.status = status;
    this.body = body;
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let body: ApiError | null = null;
      try {
        body = (await response.json()) as ApiError;
      } catch {
        body = null;
      }
      throw new ApiRequestError(response.status, body);
    }
    return (await response.json()) as T;
  }

  frames(): Promise<FrameDescriptor[]> {
    return this.request("/api/frames");
  }

  meta(): Promise<MetaPayload> {
    return this.request("/api/meta");
  }

  summary(sort: string | null, dir: "asc" | "desc"): Promise<SummaryPayload> {
    const params = new URLSearchParams();
    if (sort) {
      params.set("sort", sort);
      params.set("dir", dir);
    }
    const query = params.toString();
    return this.request(`/api/summary${query ? "?" + query : ""}`);
  }

  timeline(frame: string | null, color: string): Promise<TimelinePayload> {
    const params = new URLSearchParams({ color });
    if (frame) params.set("frame", frame);
    return this.request(`/api/timeline?${params.toString()}`);
  }

  map(frame: string | null, color: string): Promise<MapPayload> {
    const params = new URLSearchParams({ color });
    if (frame) params.set("frame", frame);
    return this.request(`/api/map?${params.toString()}`);
  }

  fitModel(spec: ModelSpecDraft): Promise<GamPayload> {
    return this.request("/api/gam", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(spec),
    });
  }
}

/** Resolve the API base URL: `?api=` query parameter, else same origin. */
export function resolveBaseUrl(location: Location): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  return "";
}
