// DOM rendering: the page is rebuilt from the SessionView on every update.

import type { SessionView } from "./state"

function cell(text: string | null): string {
  return text === null || text === "" ? "—" : text
}

function planTable(view: SessionView): string {
  if (view.planRows.length === 0) return "<p class=\"muted\">No plans yet.</p>"
  const rows = view.planRows
    .map(
      (row) => `<tr>
        <td>${row.name}</td>
        <td>${cell(row.state)}</td>
        <td class="${row.destination === "uncertain" ? "uncertain" : ""}">${cell(row.destination)}</td>
        <td>${cell(row.grasping_type)}</td>
        <td>${cell(row.placing_type)}</td>
      </tr>`,
    )
    .join("")
  return `<table>
    <thead><tr><th>Object</th><th>State</th><th>Destination</th><th>Grasp</th><th>Placing</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`
}

function questionCard(view: SessionView): string {
  if (!view.showAnswerControls) return ""
  const buttons = view.allowedAnswers
    .map(
      (answer) =>
        `<button class="answer" data-object="${view.answerObject}" data-answer="${answer}">${answer}</button>`,
    )
    .join(" ")
  return `<div class="question-card">
    <p>${view.question}</p>
    ${buttons}
  </div>`
}

function commandTable(view: SessionView): string {
  if (view.status !== "complete") return ""
  const rows = view.commands
    .map(
      (command) => `<tr>
        <td>${command.name}</td>
        <td>${command.grasping_type}</td>
        <td>${command.destination}</td>
        <td>${command.placing_type}</td>
      </tr>`,
    )
    .join("")
  const transcript = view.transcript
    .map((record) => `<li>${record.object_name}: ${record.answer}</li>`)
    .join("")
  const quarantined = view.quarantined.length
    ? `<p class="muted">Quarantined: ${view.quarantined
        .map((q) => `${q.name} (${q.reasons.join(", ")})`)
        .join("; ")}</p>`
    : ""
  return `<h2>Dispatched commands</h2>
  <table>
    <thead><tr><th>Object</th><th>Grasp</th><th>Destination</th><th>Placing</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
  ${view.transcript.length ? `<h3>Your answers</h3><ul>${transcript}</ul>` : ""}
  ${quarantined}`
}

export function render(root: HTMLElement, view: SessionView): void {
  const banner = view.retryBanner
    ? `<div class="banner">${view.retryBanner}</div>`
    : ""
  const error = view.errorMessage
    ? `<div class="error">${view.errorMessage}</div>`
    : ""
  root.innerHTML = `
    ${banner}
    <p class="status">Status: <strong>${view.statusLabel}</strong></p>
    ${error}
    ${questionCard(view)}
    <h2>Detected objects and plans</h2>
    ${planTable(view)}
    ${commandTable(view)}
  `
}
