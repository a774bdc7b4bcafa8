/**
 * Browser entry point: renders the candidate grid, relays clicks, and
 * shows run progress. All state is reconstructible from GET endpoints,
 * so a page refresh lands back in the right place.
 */

import { ApiError, CandidateInfo, ServiceClient, TraceJson } from "./api.js";
import { PromptRequest, SessionController } from "./controller.js";

const client = new ServiceClient("");
let showRaw = false;
let currentPrompt: PromptRequest | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function statusBar(): HTMLElement {
  return document.getElementById("status") as HTMLElement;
}

function gridHost(): HTMLElement {
  return document.getElementById("grid") as HTMLElement;
}

function setStatus(text: string, kind: "info" | "error" | "done" = "info"): void {
  const bar = statusBar();
  bar.textContent = text;
  bar.dataset.kind = kind;
}

function metaBadges(candidate: CandidateInfo): HTMLElement {
  const badges = el("div", "badges");
  if (candidate.label !== null) {
    badges.appendChild(el("span", "badge label", candidate.label));
  } else {
    if (candidate.predicted_iou !== null) {
      badges.appendChild(el("span", "badge", `iou ${candidate.predicted_iou.toFixed(3)}`));
    }
    if (candidate.stability_score !== null) {
      badges.appendChild(el("span", "badge", `stab ${candidate.stability_score.toFixed(3)}`));
    }
  }
  if (candidate.area !== null) {
    badges.appendChild(el("span", "badge", `${candidate.area} px`));
  }
  return badges;
}

function renderPrompt(prompt: PromptRequest): void {
  currentPrompt = prompt;
  const host = gridHost();
  host.replaceChildren();
  const heading = el("h2", undefined, `Pick the mask for frame ${prompt.frame}`);
  host.appendChild(heading);
  const grid = el("div", "tiles");
  for (const candidate of prompt.grid.candidates) {
    const tile = el("figure", "tile");
    tile.dataset.index = String(candidate.index);
    const img = el("img");
    img.src = showRaw
      ? client.previewUrl(prompt.frame, candidate.index, true)
      : candidate.preview;
    img.alt = `candidate ${candidate.index}`;
    const caption = el("figcaption", undefined, String(candidate.index));
    tile.append(img, caption, metaBadges(candidate));
    tile.addEventListener("click", () => void clickTile(prompt.frame, candidate.index, tile));
    grid.appendChild(tile);
  }
  host.appendChild(grid);
}

async function clickTile(frame: number, candidate: number, tile: HTMLElement): Promise<void> {
  try {
    const result = await controller.submit(frame, candidate);
    if (result === "busy") return; // a click is already on its way
    setStatus(`frame ${frame}: candidate ${candidate} accepted (${result.phase})`);
    gridHost().replaceChildren();
    currentPrompt = null;
  } catch (error) {
    if (error instanceof ApiError && error.status === 422) {
      tile.classList.add("invalid"); // flag the tile, keep the grid
      setStatus(error.message, "error");
      return;
    }
    setStatus(String(error), "error");
  }
}

function renderDone(trace: TraceJson): void {
  setStatus("Run complete", "done");
  const host = gridHost();
  host.replaceChildren();
  host.appendChild(el("h2", undefined, "Trace summary"));
  const chosen = trace.frames.filter((f) => f.chosen_index !== null).length;
  host.appendChild(el("p", undefined, `${chosen}/${trace.frames.length} frames carried the object.`));
  if (trace.events.length > 0) {
    const list = el("ul");
    for (const event of trace.events) {
      list.appendChild(el("li", undefined, `frame ${event.frame}: ${event.kind}`));
    }
    host.appendChild(list);
  } else {
    host.appendChild(el("p", undefined, "No re-selections were needed."));
  }
}

const controller = new SessionController(client, {
  onStatus: (info) => {
    if (info.phase !== "done") {
      const pending = info.pending !== null ? ` (frame ${info.pending})` : "";
      setStatus(`${info.phase}${pending}: ${info.frame_count} frames`);
    }
  },
  onPrompt: renderPrompt,
  onDone: renderDone,
  onError: (_error, retryInMs) =>
    setStatus(`Connection lost, retrying in ${Math.round(retryInMs / 1000)}s`, "error"),
});

document.addEventListener("DOMContentLoaded", () => {
  const toggle = document.getElementById("toggle-raw") as HTMLInputElement;
  toggle.addEventListener("change", () => {
    showRaw = toggle.checked;
    if (currentPrompt) renderPrompt(currentPrompt);
  });
  controller.start();
});
