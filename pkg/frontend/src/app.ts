// Session screen: map + transcript + step/feedback/finalize controls.
// The UI holds no design logic; every state change round-trips the
// service, and a round-counter mismatch between the view and the snapshot
// forces a refetch before Step is enabled again.

import { ApiClient, ApiError } from "./api";
import { buildFixForm } from "./fixForm";
import { renderMap } from "./map";
import { renderTranscript } from "./transcript";
import type { FinalizeResult, FixPayload, SessionState } from "./types";

export class SessionScreen {
  private state: SessionState | null = null;
  private busy = false;

  private readonly mapPane: HTMLElement;
  private readonly transcriptPane: HTMLElement;
  private readonly statusLine: HTMLElement;
  private readonly noticeBox: HTMLElement;
  private readonly stepButton: HTMLButtonElement;
  private readonly finalizeButton: HTMLButtonElement;
  private readonly fixContainer: HTMLElement;
  private readonly resultPane: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    root: HTMLElement,
  ) {
    root.innerHTML = `
      <section class="session-screen">
        <div class="toolbar">
          <span class="status-line" data-testid="status"></span>
          <button class="step-btn" data-testid="step">Step</button>
          <button class="finalize-btn" data-testid="finalize" hidden>Finalize</button>
          <span class="notice" role="status" data-testid="notice"></span>
        </div>
        <div class="panes">
          <div class="map-pane" data-testid="map"></div>
          <div class="side-pane">
            <div class="fix-pane" data-testid="fix" hidden></div>
            <div class="transcript-pane" data-testid="transcript"></div>
          </div>
        </div>
        <div class="result-pane" data-testid="result"></div>
      </section>
    `;
    this.mapPane = root.querySelector(".map-pane") as HTMLElement;
    this.transcriptPane = root.querySelector(".transcript-pane") as HTMLElement;
    this.statusLine = root.querySelector(".status-line") as HTMLElement;
    this.noticeBox = root.querySelector(".notice") as HTMLElement;
    this.stepButton = root.querySelector(".step-btn") as HTMLButtonElement;
    this.finalizeButton = root.querySelector(".finalize-btn") as HTMLButtonElement;
    this.fixContainer = root.querySelector(".fix-pane") as HTMLElement;
    this.resultPane = root.querySelector(".result-pane") as HTMLElement;

    this.stepButton.addEventListener("click", () => void this.step());
    this.finalizeButton.addEventListener("click", () => void this.finalize());
    this.fixContainer.appendChild(
      buildFixForm(
        (payload) => void this.sendFeedback(payload),
        () => this.state?.waypoints.length ?? 0,
      ),
    );
  }

  async start(): Promise<void> {
    await this.refresh();
  }

  get currentState(): SessionState | null {
    return this.state;
  }

  private notice(text: string): void {
    this.noticeBox.textContent = text;
  }

  private async refresh(): Promise<void> {
    this.state = await this.api.getSession(this.sessionId);
    this.render();
  }

  private async withBusy(work: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.render();
    try {
      await work();
      this.notice("");
    } catch (error) {
      if (error instanceof ApiError && error.isConflict) {
        this.notice("round in progress");
        await this.refresh();
      } else if (error instanceof ApiError) {
        this.notice(error.detail);
      } else {
        this.notice(String(error));
      }
    } finally {
      this.busy = false;
      this.render();
    }
  }

  async step(): Promise<void> {
    await this.withBusy(async () => {
      const result = await this.api.step(this.sessionId);
      this.state = result;
      if (result.error) {
        this.notice(result.error);
      }
      this.render();
    });
  }

  async sendFeedback(payload: FixPayload): Promise<void> {
    await this.withBusy(async () => {
      this.state = await this.api.feedback(this.sessionId, payload);
      this.render();
    });
  }

  async finalize(): Promise<void> {
    await this.withBusy(async () => {
      const result = await this.api.finalize(this.sessionId);
      this.renderFinalize(result);
    });
  }

  private viewConsistent(): boolean {
    if (!this.state) return false;
    return this.state.snapshot.metadata.round === this.state.round;
  }

  private render(): void {
    if (!this.state) return;
    const state = this.state;
    this.statusLine.textContent =
      `${state.procedure} · ${state.icao} RWY${state.runway} → ${state.destination}` +
      ` · round ${state.round}/${state.max_rounds} · ${state.status}`;

    if (!this.viewConsistent()) {
      // stale view: force a refetch before any further stepping
      this.stepButton.disabled = true;
      void this.refresh();
      return;
    }

    renderMap(this.mapPane, state.snapshot);
    renderTranscript(this.transcriptPane, state.transcript);

    this.stepButton.disabled = this.busy || state.status !== "Planning";
    this.fixContainer.hidden = state.status !== "AwaitingFeedback";
    const terminal = state.status === "Completed" || state.status === "Exhausted";
    this.finalizeButton.hidden = !(terminal && state.waypoints.length > 0);
    this.finalizeButton.disabled = this.busy;
  }

  private renderFinalize(result: FinalizeResult): void {
    const metrics = result.metrics;
    this.resultPane.innerHTML = `
      <h3>Design report · ${result.status}</h3>
      <table class="metrics-table" data-testid="metrics">
        <thead><tr><th>FPS(%)</th><th>SCC(%)</th><th>MCR(%)</th></tr></thead>
        <tbody><tr>
          <td data-testid="fps">${metrics.fps_percent ?? "n/a"}</td>
          <td data-testid="scc">${metrics.scc_percent ?? "n/a"}</td>
          <td data-testid="mcr">${metrics.mcr_percent ?? "n/a"}</td>
        </tr></tbody>
      </table>
      <a class="txt-download" data-testid="download" download="procedure.txt"
         href="data:text/plain;charset=utf-8,${encodeURIComponent(result.txt)}">
        Download TXT
      </a>
      <pre class="txt-preview" data-testid="txt">${result.txt}</pre>
    `;
  }
}

export interface StartOptions {
  icao: string;
  runway: string;
  destination: string;
  interactive: boolean;
  backend?: string;
}

export async function startSession(
  api: ApiClient,
  options: StartOptions,
  root: HTMLElement,
): Promise<SessionScreen> {
  const id = await api.createSession({
    icao: options.icao,
    runway: options.runway,
    destination: options.destination,
    interactive: options.interactive,
    backend: options.backend ?? "scripted",
  });
  const screen = new SessionScreen(api, id, root);
  await screen.start();
  return screen;
}
