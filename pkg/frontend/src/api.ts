import type {
  CreateSessionRequest,
  EpisodeResultDoc,
  SessionDoc,
} from "./types"

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorCode: string,
    message: string,
  ) {
    super(message)
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  })
  const body = await response.json().catch(() => null)
  if (!response.ok) {
    const errorCode = body?.error_code ?? "http_error"
    const message = body?.message ?? `request failed with status ${response.status}`
    throw new ApiError(response.status, errorCode, message)
  }
  return body as T
}

export class SessionApi {
  constructor(public readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`
  }

  async createSession(body: CreateSessionRequest): Promise<string> {
    const doc = await request<{ session_id: string }>(this.url("/api/sessions"), {
      method: "POST",
      body: JSON.stringify(body),
    })
    return doc.session_id
  }

  fetchSession(sessionId: string): Promise<SessionDoc> {
    return request<SessionDoc>(this.url(`/api/sessions/${sessionId}`))
  }

  async submitAnswer(
    sessionId: string,
    objectName: string,
    answer: string,
  ): Promise<{ status: string }> {
    return request(this.url(`/api/sessions/${sessionId}/answer`), {
      method: "POST",
      body: JSON.stringify({ object_name: objectName, answer }),
    })
  }

  fetchResult(sessionId: string): Promise<EpisodeResultDoc> {
    return request<EpisodeResultDoc>(this.url(`/api/sessions/${sessionId}/result`))
  }

  async health(): Promise<boolean> {
    try {
      await request<{ status: string }>(this.url("/api/health"))
      return true
    } catch {
      return false
    }
  }
}
