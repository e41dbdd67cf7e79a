// Operator console wiring: timeline scrubbing, layer toggles, plan
// selection with success rates, outcome display. Every number shown comes
// verbatim from an API response; the console computes nothing itself.

import { ApiClient, ApiError } from "./api.js";
import { buildScene, hitTest, Scene } from "./scene.js";
import { paint } from "./render.js";
import {
  Layer,
  OutcomeReportPayload,
  PlanOfferPayload,
  StatePayload,
} from "./types.js";

export interface ViewState {
  currentT: number;
  layer: Layer;
  offeredPlans: PlanOfferPayload[];
  lastReport: OutcomeReportPayload | null;
}

interface Elements {
  canvas: HTMLCanvasElement;
  slider: HTMLInputElement;
  timeLabel: HTMLElement;
  layerSelect: HTMLSelectElement;
  planList: HTMLElement;
  planButton: HTMLButtonElement;
  reportPanel: HTMLElement;
  detailPanel: HTMLElement;
  errorBanner: HTMLElement;
  reportsPanel: HTMLElement;
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`element #${id} missing from the page`);
  return el as T;
}

export class App {
  readonly view: ViewState = {
    currentT: 0,
    layer: "buildings",
    offeredPlans: [],
    lastReport: null,
  };
  scene: Scene | null = null;
  lastState: StatePayload | null = null;

  private readonly el: Elements;
  private fetchSeq = 0; // latest-wins: stale state responses are dropped
  private stopEvents: (() => void) | null = null;

  constructor(private readonly api: ApiClient) {
    this.el = {
      canvas: byId<HTMLCanvasElement>("map"),
      slider: byId<HTMLInputElement>("timeline"),
      timeLabel: byId("time-label"),
      layerSelect: byId<HTMLSelectElement>("layer"),
      planList: byId("plan-list"),
      planButton: byId<HTMLButtonElement>("request-plans"),
      reportPanel: byId("report-panel"),
      detailPanel: byId("detail-panel"),
      errorBanner: byId("error-banner"),
      reportsPanel: byId("reports-panel"),
    };
    this.el.slider.addEventListener("input", () => {
      void this.scrub(Number(this.el.slider.value));
    });
    this.el.layerSelect.addEventListener("change", () => {
      this.view.layer = this.el.layerSelect.value as Layer;
      this.renderScene();
    });
    this.el.planButton.addEventListener("click", () => {
      void this.requestPlans();
    });
    this.el.canvas.addEventListener("click", (event) => {
      const rect = this.el.canvas.getBoundingClientRect();
      this.showDetail(event.clientX - rect.left, event.clientY - rect.top);
    });
  }

  async start(): Promise<void> {
    await this.scrub(0);
    this.stopEvents = this.api.subscribeEvents(() => {
      // notifications only say "a snapshot exists"; refetch the current t
      void this.scrub(this.view.currentT);
    });
  }

  stop(): void {
    this.stopEvents?.();
  }

  /** Fetch state at t and re-render; the slider mirrors the queried t. */
  async scrub(t: number): Promise<void> {
    const seq = ++this.fetchSeq;
    this.view.currentT = t;
    this.el.slider.value = String(t);
    this.el.timeLabel.textContent = `t = ${t} s`;
    try {
      const state = await this.api.state(t);
      if (seq !== this.fetchSeq) return; // a newer scrub superseded this one
      this.lastState = state;
      this.el.slider.min = "-1";
      this.el.slider.max = String(state.horizon_s);
      this.hideError();
      this.renderScene();
    } catch (err) {
      this.showError(err); // keep the last good scene on screen
    }
  }

  renderScene(): void {
    if (!this.lastState) return;
    this.scene = buildScene(this.lastState, { layer: this.view.layer });
    paint(this.scene, this.el.canvas);
    this.renderReportMarkers();
  }

  private renderReportMarkers(): void {
    const reports = this.lastState?.reports ?? [];
    this.el.reportsPanel.textContent = reports.length
      ? reports.map((r) => `${r.zone} (${r.count})`).join(", ")
      : "none";
  }

  async requestPlans(): Promise<void> {
    try {
      const offer = await this.api.plans();
      this.view.offeredPlans = offer.plans;
      this.renderPlanList();
      if (!offer.plans.length && offer.report) {
        this.renderReport(offer.report); // vacuous: nothing to rescue
      }
      this.hideError();
    } catch (err) {
      this.showError(err);
    }
  }

  private renderPlanList(): void {
    this.el.planList.textContent = "";
    for (const plan of this.view.offeredPlans) {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.dataset.planId = plan.plan_id;
      button.dataset.successRate = String(plan.success_rate);
      const legs = plan.assignments
        .map((a) => `${a.team_id} → ${a.building_id}`)
        .join(", ");
      button.textContent = `${plan.plan_id}: ${legs} | success rate ${plan.success_rate}`;
      button.addEventListener("click", () => {
        void this.submitDecision(plan.plan_id);
      });
      item.appendChild(button);
      this.el.planList.appendChild(item);
    }
  }

  async submitDecision(planId: string): Promise<void> {
    try {
      const report = await this.api.decide(planId);
      this.view.lastReport = report;
      this.view.offeredPlans = []; // offer consumed
      this.renderPlanList();
      this.renderReport(report);
      this.hideError();
      await this.scrub(this.view.currentT);
    } catch (err) {
      this.showError(err); // offers stay on screen after a rejection
    }
  }

  private renderReport(report: OutcomeReportPayload): void {
    const panel = this.el.reportPanel;
    panel.textContent = "";
    panel.dataset.successRate = String(report.success_rate);

    const headline = document.createElement("p");
    headline.id = "report-headline";
    headline.textContent =
      `plan ${report.plan}: saved ${report.total_saved} of ${report.total_trapped}, ` +
      `casualties ${report.casualties}, success rate ${report.success_rate}`;
    panel.appendChild(headline);

    const buildings = document.createElement("p");
    buildings.id = "report-buildings";
    buildings.textContent =
      `buildings: ${report.buildings.intact} intact, ` +
      `${report.buildings.damaged} damaged, ${report.buildings.collapsed} collapsed`;
    panel.appendChild(buildings);

    const infra = document.createElement("p");
    infra.id = "report-infra";
    infra.textContent = Object.entries(report.infra)
      .map(([layer, counts]) => `${layer} ${counts.up} up / ${counts.down} down`)
      .join("; ");
    panel.appendChild(infra);
  }

  showDetail(x: number, y: number): void {
    if (!this.scene) return;
    const marker = hitTest(this.scene, x, y);
    this.el.detailPanel.textContent = marker ? marker.label : "";
  }

  private showError(err: unknown): void {
    const message =
      err instanceof ApiError ? err.message : err instanceof Error ? err.message : String(err);
    this.el.errorBanner.textContent = `error: ${message}`;
    this.el.errorBanner.style.display = "block";
  }

  private hideError(): void {
    this.el.errorBanner.textContent = "";
    this.el.errorBanner.style.display = "none";
  }
}
