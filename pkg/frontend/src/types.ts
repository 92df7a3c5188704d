// Wire types for the session API (see the service's /api endpoints).

export type SessionStatus = "pending" | "awaiting_answer" | "complete" | "error"

export interface PlanRow {
  name: string
  state: string | null
  destination: string | null
  grasping_type: string | null
  placing_type: string | null
}

export interface PendingClarification {
  object_name: string
  question: string
  allowed_answers: string[]
}

export interface SessionDoc {
  session_id: string
  status: SessionStatus
  plans: PlanRow[]
  pending_clarification?: PendingClarification
  error?: string
}

export interface CommandRow {
  name: string
  grasping_type: string
  destination: string
  placing_type: string
}

export interface ClarificationRecord {
  object_name: string
  question: string
  answer: string
}

export interface EpisodeResultDoc {
  task_id: string
  plans_final: PlanRow[]
  clarifications: ClarificationRecord[]
  commands: CommandRow[]
  quarantined: { name: string; reasons: string[] }[]
  warnings: string[]
}

export interface CreateSessionRequest {
  scene_id?: string
  scene?: unknown
  task_id: string
  backend_id?: string
  mode?: string
}
