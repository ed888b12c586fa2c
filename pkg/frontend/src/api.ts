import { ApiError, Progress, SampleView, SessionInfo, SubmitResult } from "./types.js";

type FetchLike = typeof fetch;

async function request<T>(fetchFn: FetchLike, url: string, init?: RequestInit): Promise<T> {
  const response = await fetchFn(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(
      response.status,
      (body as { error?: string }).error ?? `HTTP${response.status}`,
      (body as { detail?: string }).detail ?? response.statusText,
    );
  }
  return body as T;
}

/** Client for the annotation session API. */
export class SessionApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  createSession(annotatorId: string): Promise<SessionInfo> {
    return request<SessionInfo>(this.fetchFn, `${this.baseUrl}/api/session`, {
      method: "POST",
      body: JSON.stringify({ annotator_id: annotatorId }),
    });
  }

  current(sessionId: string): Promise<SampleView> {
    return request<SampleView>(this.fetchFn, `${this.baseUrl}/api/session/${sessionId}/current`);
  }

  select(sessionId: string, statementIndex: number, rationale?: string): Promise<SubmitResult> {
    return request<SubmitResult>(this.fetchFn, `${this.baseUrl}/api/session/${sessionId}/select`, {
      method: "POST",
      body: JSON.stringify({ statement_index: statementIndex, rationale: rationale ?? null }),
    });
  }

  noneRelevant(sessionId: string, confirmed: boolean): Promise<SubmitResult> {
    return request<SubmitResult>(this.fetchFn, `${this.baseUrl}/api/session/${sessionId}/none`, {
      method: "POST",
      body: JSON.stringify({ confirmed }),
    });
  }

  progress(sessionId: string): Promise<Progress> {
    return request<Progress>(this.fetchFn, `${this.baseUrl}/api/session/${sessionId}/progress`);
  }
}
