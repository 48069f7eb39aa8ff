// Transcript panel: one block per agent message, thoughts preserved.

import type { TranscriptMessage } from "./types";

export function renderTranscript(container: HTMLElement, messages: TranscriptMessage[]): void {
  container.textContent = "";
  for (const message of messages) {
    const block = document.createElement("div");
    block.className = `msg msg-${message.role.toLowerCase()}`;
    const head = document.createElement("div");
    head.className = "msg-head";
    head.textContent = `${message.role} · round ${message.round}`;
    const body = document.createElement("pre");
    body.className = "msg-body";
    body.textContent = message.content;
    block.append(head, body);
    container.appendChild(block);
  }
  container.scrollTop = container.scrollHeight;
}
