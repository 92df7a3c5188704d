// Pure derivation of the render model: everything the page shows is a
// function of the last fetched documents plus the connection flag, so
// no hidden client state can steer a decision.

import type { EpisodeResultDoc, PlanRow, SessionDoc } from "./types"

export interface SessionView {
  sessionId: string
  status: string
  statusLabel: string
  planRows: PlanRow[]
  question: string | null
  answerObject: string | null
  allowedAnswers: string[]
  showAnswerControls: boolean
  commands: EpisodeResultDoc["commands"]
  transcript: EpisodeResultDoc["clarifications"]
  quarantined: EpisodeResultDoc["quarantined"]
  errorMessage: string | null
  retryBanner: string | null
}

const STATUS_LABELS: Record<string, string> = {
  pending: "Planning…",
  awaiting_answer: "Waiting for your answer",
  complete: "Complete — commands dispatched",
  error: "Episode failed",
}

export function emptyView(): SessionView {
  return {
    sessionId: "",
    status: "none",
    statusLabel: "No session",
    planRows: [],
    question: null,
    answerObject: null,
    allowedAnswers: [],
    showAnswerControls: false,
    commands: [],
    transcript: [],
    quarantined: [],
    errorMessage: null,
    retryBanner: null,
  }
}

export function deriveView(
  doc: SessionDoc | null,
  result: EpisodeResultDoc | null,
  connectionError: string | null,
): SessionView {
  const view = emptyView()
  view.retryBanner = connectionError
  if (doc === null) {
    return view
  }
  view.sessionId = doc.session_id
  view.status = doc.status
  view.statusLabel = STATUS_LABELS[doc.status] ?? doc.status
  view.planRows = doc.plans
  if (doc.status === "awaiting_answer" && doc.pending_clarification) {
    view.question = doc.pending_clarification.question
    view.answerObject = doc.pending_clarification.object_name
    view.allowedAnswers = doc.pending_clarification.allowed_answers
    view.showAnswerControls = true
  }
  if (doc.status === "error") {
    view.errorMessage = doc.error ?? "episode failed"
  }
  if (doc.status === "complete" && result) {
    view.commands = result.commands
    view.transcript = result.clarifications
    view.quarantined = result.quarantined
    view.planRows = result.plans_final
  }
  return view
}

export function sessionNotFoundView(sessionId: string): SessionView {
  const view = emptyView()
  view.sessionId = sessionId
  view.status = "not_found"
  view.statusLabel = "Session not found"
  view.errorMessage = `session '${sessionId}' does not exist`
  return view
}
