/**
 * Controller: routes, data loading, and the mutate-then-refetch cycle.
 *
 * The controller owns no derived data. After every mutation it refetches
 * the payloads a panel needs and rebuilds the DOM from them, so the
 * screen always reflects what the service would say right now. The only
 * client-side state is navigation: which session is open, which cause
 * candidate the user highlighted, and the last error.
 */

import { ApiClient, ApiError } from "./api.js";
import type { CauseList, PlanList, TreeDoc, ViolationReport } from "./api.js";
import {
  causeRows,
  finishControl,
  kbView,
  planRows,
  treeView,
  violationsView,
} from "./model.js";
import {
  renderCausePicker,
  renderError,
  renderFinish,
  renderKb,
  renderNewSessionForm,
  renderPlans,
  renderTree,
  renderViolations,
} from "./render.js";

type Route =
  | { view: "new" }
  | { view: "session"; sessionId: string }
  | { view: "kb" };

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  if (parts[0] === "kb") return { view: "kb" };
  if (parts[0] === "session" && parts[1]) return { view: "session", sessionId: parts[1] };
  return { view: "new" };
}

export class Controller {
  private route: Route = { view: "new" };
  private selectedCauseId: number | null = null;
  private lastFinishNote: string | null = null;
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly onNavigate: (hash: string) => void = () => {},
  ) {}

  /** resolves once every queued load or mutation has rendered */
  settled(): Promise<void> {
    return this.pending;
  }

  navigate(hash: string): void {
    const next = parseRoute(hash);
    const changedSession =
      next.view !== "session" ||
      this.route.view !== "session" ||
      next.sessionId !== this.route.sessionId;
    this.route = next;
    if (changedSession) {
      this.selectedCauseId = null;
      this.lastFinishNote = null;
    }
    this.reload();
  }

  reload(): void {
    this.enqueue(() => this.load());
  }

  private enqueue(op: () => Promise<void>): void {
    this.pending = this.pending.then(async () => {
      try {
        await op();
      } catch (err) {
        this.showError(err);
      }
    });
  }

  private async load(): Promise<void> {
    if (this.route.view === "new") {
      this.renderShell([
        renderNewSessionForm((a, s, sys) => this.createSession(a, s, sys)),
      ]);
      return;
    }
    if (this.route.view === "kb") {
      const stats = await this.api.kbStats();
      this.renderShell([renderKb(kbView(stats), () => this.reload())]);
      return;
    }
    await this.loadDashboard(this.route.sessionId);
  }

  private async loadDashboard(sessionId: string): Promise<void> {
    const tree: TreeDoc = await this.api.tree(sessionId);
    const cursor = tree.cursor;
    const report: ViolationReport = await this.api.violations(sessionId, cursor);
    const causes: CauseList = await this.api.causes(sessionId, cursor);

    // the service tracks the confirmed cause by signature; recover the
    // highlighted candidate when navigating back into a session
    if (this.selectedCauseId === null && tree.selected_cause) {
      const match = causes.candidates.find((c) => c.signature === tree.selected_cause);
      this.selectedCauseId = match ? match.id : null;
    }

    let plansPanel: HTMLElement;
    if (this.selectedCauseId !== null) {
      const plans: PlanList = await this.api.plans(sessionId, cursor);
      const cursorNode = tree.nodes.find((n) => n.node_id === cursor);
      const base = cursorNode ? cursorNode.score : 0;
      plansPanel = renderPlans(planRows(plans.plans, base), plans.scope, (row) =>
        this.applyPlan(sessionId, row.index),
      );
    } else {
      plansPanel = renderPlans([], "pick a cause first", () => {});
    }

    const panels = [
      renderViolations(violationsView(report)),
      renderCausePicker(causeRows(causes.candidates, this.selectedCauseId), (id) =>
        this.pickCause(sessionId, id),
      ),
      plansPanel,
      renderTree(treeView(tree), (nodeId) => this.gotoNode(sessionId, nodeId)),
      this.toolbar(sessionId, tree),
      renderFinish(finishControl(tree), (outcome) => this.finish(sessionId, outcome)),
    ];
    this.renderShell(panels);
  }

  private toolbar(sessionId: string, tree: TreeDoc): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "toolbar";
    const cursorNode = tree.nodes.find((n) => n.node_id === tree.cursor);
    const undo = document.createElement("button");
    undo.type = "button";
    undo.className = "undo-step";
    undo.textContent = "Undo step";
    if (!cursorNode || cursorNode.parent === null) {
      undo.disabled = true;
    } else {
      const parent = cursorNode.parent;
      undo.addEventListener("click", () => this.gotoNode(sessionId, parent));
    }
    bar.appendChild(undo);
    if (this.lastFinishNote) {
      const note = document.createElement("span");
      note.className = "finish-note";
      note.textContent = this.lastFinishNote;
      bar.appendChild(note);
    }
    return bar;
  }

  createSession(architectureText: string, implementationText: string, systemId: string): void {
    this.enqueue(async () => {
      let architecture: unknown;
      let implementation: unknown;
      try {
        architecture = JSON.parse(architectureText);
        implementation = JSON.parse(implementationText);
      } catch (err) {
        throw new Error(`documents must be valid JSON: ${(err as Error).message}`);
      }
      const created = await this.api.createSession(architecture, implementation, systemId);
      this.route = { view: "session", sessionId: created.session_id };
      this.selectedCauseId = null;
      this.lastFinishNote = null;
      this.onNavigate(`#/session/${created.session_id}`);
      await this.load();
    });
  }

  pickCause(sessionId: string, candidateId: number): void {
    this.enqueue(async () => {
      await this.api.selectCause(sessionId, candidateId);
      this.selectedCauseId = candidateId;
      await this.loadDashboard(sessionId);
    });
  }

  applyPlan(sessionId: string, planIndex: number): void {
    this.enqueue(async () => {
      // refetch rather than trust the rendered list: the plan is applied
      // against whatever the service reports for the cursor right now
      const tree = await this.api.tree(sessionId);
      const plans = await this.api.plans(sessionId, tree.cursor);
      const plan = plans.plans[planIndex];
      if (!plan) throw new Error(`plan ${planIndex} is gone; reloaded`);
      for (const action of plan.actions) {
        await this.api.applyStep(sessionId, action);
      }
      await this.loadDashboard(sessionId);
    });
  }

  gotoNode(sessionId: string, nodeId: number): void {
    this.enqueue(async () => {
      await this.api.moveCursor(sessionId, nodeId);
      await this.loadDashboard(sessionId);
    });
  }

  finish(sessionId: string, outcome: string): void {
    this.enqueue(async () => {
      const result = await this.api.finish(sessionId, outcome);
      this.lastFinishNote = `finished ${result.outcome}; ${result.events.length} event(s) recorded`;
      await this.loadDashboard(sessionId);
    });
  }

  private renderShell(panels: HTMLElement[]): void {
    this.root.replaceChildren();
    for (const p of panels) this.root.appendChild(p);
  }

  private showError(err: unknown): void {
    const message =
      err instanceof ApiError
        ? `${err.error}: ${err.detail}`
        : err instanceof Error
          ? err.message
          : String(err);
    const banner = renderError(message, () => this.reload());
    this.root.prepend(banner);
  }
}

export function boot(root: HTMLElement, baseUrl: string): Controller {
  const api = new ApiClient(baseUrl);
  const controller = new Controller(root, api, (hash) => {
    if (location.hash !== hash) location.hash = hash;
  });
  window.addEventListener("hashchange", () => controller.navigate(location.hash));
  controller.navigate(location.hash);
  return controller;
}

// served statically next to the API by default; override with
// <meta name="archmend-api" content="http://host:port/api/v1">
if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const meta = document.querySelector('meta[name="archmend-api"]');
    const base = meta?.getAttribute("content") ?? "/api/v1";
    boot(root, base);
  }
}
