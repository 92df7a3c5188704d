// 1s polling loop with retry banner; at most one in-flight mutation.

import { ApiError, SessionApi } from "./api"
import { deriveView, sessionNotFoundView, type SessionView } from "./state"
import type { EpisodeResultDoc, SessionDoc } from "./types"

export const POLL_INTERVAL_MS = 1000

export class SessionPoller {
  private timer: ReturnType<typeof setInterval> | null = null
  private fetching = false
  private mutating = false
  private lastDoc: SessionDoc | null = null
  private lastResult: EpisodeResultDoc | null = null
  private connectionError: string | null = null

  constructor(
    private readonly api: SessionApi,
    private readonly sessionId: string,
    private readonly onView: (view: SessionView) => void,
  ) {}

  start(): void {
    this.stop()
    void this.refresh()
    this.timer = setInterval(() => void this.refresh(), POLL_INTERVAL_MS)
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer)
      this.timer = null
    }
  }

  /** Fetch the session document (and the result once complete); re-render. */
  async refresh(): Promise<void> {
    if (this.fetching) return
    this.fetching = true
    try {
      const doc = await this.api.fetchSession(this.sessionId)
      this.lastDoc = doc
      this.connectionError = null
      if (doc.status === "complete" && this.lastResult === null) {
        this.lastResult = await this.api.fetchResult(this.sessionId)
      }
      if (doc.status === "complete" || doc.status === "error") {
        this.stop()
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.stop()
        this.onView(sessionNotFoundView(this.sessionId))
        this.fetching = false
        return
      }
      // network failure: keep polling, surface the banner
      this.connectionError = "connection lost — retrying"
    } finally {
      this.fetching = false
    }
    this.onView(deriveView(this.lastDoc, this.lastResult, this.connectionError))
  }

  /** Submit keep/discard; a stale 409 just forces a refresh. */
  async answer(objectName: string, answer: string): Promise<void> {
    if (this.mutating) return
    this.mutating = true
    try {
      await this.api.submitAnswer(this.sessionId, objectName, answer)
    } catch (error) {
      if (!(error instanceof ApiError && error.status === 409)) {
        throw error
      }
    } finally {
      this.mutating = false
    }
    await this.refresh()
  }
}
