import { afterEach, describe, expect, it, vi } from "vitest"

import { ApiError, SessionApi } from "../src/api"

function mockFetch(status: number, body: unknown) {
  const impl = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  }))
  vi.stubGlobal("fetch", impl)
  return impl
}

afterEach(() => {
  vi.unstubAllGlobals()
})

describe("SessionApi", () => {
  it("creates sessions against the sessions endpoint", async () => {
    const impl = mockFetch(200, { session_id: "abc" })
    const api = new SessionApi("http://example.test/")
    const id = await api.createSession({ task_id: "T1", scene_id: "scene-000" })
    expect(id).toBe("abc")
    const [url, init] = impl.mock.calls[0] as unknown as [string, RequestInit]
    expect(url).toBe("http://example.test/api/sessions")
    expect(init.method).toBe("POST")
    expect(JSON.parse(String(init.body))).toEqual({ task_id: "T1", scene_id: "scene-000" })
  })

  it("submits answers with the object name", async () => {
    const impl = mockFetch(200, { status: "complete" })
    const api = new SessionApi("http://example.test")
    await api.submitAnswer("s1", "bowl with soup", "discard")
    const [url, init] = impl.mock.calls[0] as unknown as [string, RequestInit]
    expect(url).toBe("http://example.test/api/sessions/s1/answer")
    expect(JSON.parse(String(init.body))).toEqual({
      object_name: "bowl with soup",
      answer: "discard",
    })
  })

  it("raises ApiError with the service error code", async () => {
    mockFetch(409, { error_code: "not_awaiting", message: "session status is 'complete'" })
    const api = new SessionApi("http://example.test")
    const failure = await api.submitAnswer("s1", "x", "keep").catch((error) => error)
    expect(failure).toBeInstanceOf(ApiError)
    expect(failure.status).toBe(409)
    expect(failure.errorCode).toBe("not_awaiting")
  })

  it("maps 404 to ApiError", async () => {
    mockFetch(404, { error_code: "unknown_session", message: "no session 'ghost'" })
    const api = new SessionApi("http://example.test")
    const failure = await api.fetchSession("ghost").catch((error) => error)
    expect(failure).toBeInstanceOf(ApiError)
    expect(failure.status).toBe(404)
  })

  it("health returns false on network failure", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => {
      throw new Error("refused")
    }))
    const api = new SessionApi("http://example.test")
    expect(await api.health()).toBe(false)
  })
})
