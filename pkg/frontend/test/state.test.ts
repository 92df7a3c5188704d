import { describe, expect, it } from "vitest"

import { deriveView, emptyView, sessionNotFoundView } from "../src/state"
import type { EpisodeResultDoc, SessionDoc } from "../src/types"

const AWAITING: SessionDoc = {
  session_id: "s1",
  status: "awaiting_answer",
  plans: [
    {
      name: "bowl with soup",
      state: "containing leftover food",
      destination: "uncertain",
      grasping_type: "edge grasp",
      placing_type: "place",
    },
  ],
  pending_clarification: {
    object_name: "bowl with soup",
    question: "Keep it or discard it?",
    allowed_answers: ["keep", "discard"],
  },
}

const COMPLETE: SessionDoc = {
  session_id: "s1",
  status: "complete",
  plans: AWAITING.plans,
}

const RESULT: EpisodeResultDoc = {
  task_id: "T1",
  plans_final: [
    {
      name: "bowl with soup",
      state: "containing leftover food",
      destination: "dishwasher",
      grasping_type: "edge grasp",
      placing_type: "pour",
    },
  ],
  clarifications: [
    { object_name: "bowl with soup", question: "Keep it or discard it?", answer: "discard" },
  ],
  commands: [
    {
      name: "bowl with soup",
      grasping_type: "edge grasp",
      destination: "dishwasher",
      placing_type: "pour",
    },
  ],
  quarantined: [],
  warnings: [],
}

describe("deriveView", () => {
  it("shows answer controls exactly when awaiting an answer", () => {
    const awaiting = deriveView(AWAITING, null, null)
    expect(awaiting.showAnswerControls).toBe(true)
    expect(awaiting.question).toContain("Keep it or discard it")
    expect(awaiting.allowedAnswers).toEqual(["keep", "discard"])

    const pending = deriveView({ ...AWAITING, status: "pending", pending_clarification: undefined }, null, null)
    expect(pending.showAnswerControls).toBe(false)

    const complete = deriveView(COMPLETE, RESULT, null)
    expect(complete.showAnswerControls).toBe(false)
  })

  it("shows the command table once complete", () => {
    const view = deriveView(COMPLETE, RESULT, null)
    expect(view.commands).toHaveLength(1)
    expect(view.commands[0].destination).toBe("dishwasher")
    expect(view.commands[0].placing_type).toBe("pour")
    expect(view.planRows[0].destination).toBe("dishwasher")
    expect(view.transcript[0].answer).toBe("discard")
  })

  it("is a pure function of its inputs", () => {
    const first = deriveView(AWAITING, null, null)
    const second = deriveView(AWAITING, null, null)
    expect(second).toEqual(first)
  })

  it("carries the retry banner through any state", () => {
    const view = deriveView(AWAITING, null, "connection lost — retrying")
    expect(view.retryBanner).toContain("retrying")
    expect(view.showAnswerControls).toBe(true)
    expect(deriveView(null, null, "connection lost — retrying").retryBanner).not.toBeNull()
  })

  it("surfaces session errors", () => {
    const view = deriveView({ session_id: "s1", status: "error", plans: [], error: "boom" }, null, null)
    expect(view.errorMessage).toBe("boom")
    expect(view.showAnswerControls).toBe(false)
  })

  it("renders a not-found view for 404s", () => {
    const view = sessionNotFoundView("ghost")
    expect(view.statusLabel).toBe("Session not found")
    expect(view.errorMessage).toContain("ghost")
  })

  it("starts empty", () => {
    expect(emptyView().planRows).toEqual([])
    expect(emptyView().showAnswerControls).toBe(false)
  })
})
