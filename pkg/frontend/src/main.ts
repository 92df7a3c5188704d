import { SessionApi } from "./api"
import { SessionPoller } from "./poll"
import { render } from "./view"

const DEMO_SCENE = {
  scene_id: "demo",
  objects: {
    "bowl with soup": {
      color: "white", size: "medium", shape: "round", container: true,
      state: "containing leftover food", destination: "fridge",
      grasping_type: "edge grasp", placing_type: "pour", edible: false,
    },
    "half apple": {
      color: "red", size: "small", shape: "round", container: false,
      state: "leftover food", destination: "fridge",
      grasping_type: "top grasp", placing_type: "place", edible: true,
    },
    napkin: {
      color: "white", size: "small", shape: "rectangle", container: false,
      state: "dirty", destination: "dishwasher",
      grasping_type: "top grasp", placing_type: "place", edible: false,
    },
  },
}

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id)
  if (!found) throw new Error(`missing element #${id}`)
  return found as T
}

let poller: SessionPoller | null = null

async function startSession(): Promise<void> {
  const base = element<HTMLInputElement>("base-url").value
  const task = element<HTMLSelectElement>("task").value
  const sceneId = element<HTMLInputElement>("scene-id").value.trim()
  const api = new SessionApi(base)
  const root = element<HTMLDivElement>("session")
  poller?.stop()
  try {
    const sessionId = await api.createSession({
      task_id: task,
      ...(sceneId ? { scene_id: sceneId } : { scene: DEMO_SCENE }),
    })
    poller = new SessionPoller(api, sessionId, (view) => {
      render(root, view)
      for (const button of root.querySelectorAll<HTMLButtonElement>("button.answer")) {
        button.addEventListener("click", () => {
          void poller?.answer(button.dataset.object ?? "", button.dataset.answer ?? "")
        })
      }
    })
    poller.start()
  } catch (error) {
    root.innerHTML = `<div class="error">Could not create session: ${String(error)}</div>`
  }
}

document.addEventListener("DOMContentLoaded", () => {
  element<HTMLButtonElement>("start").addEventListener("click", () => void startSession())
})
