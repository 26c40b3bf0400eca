// @vitest-environment happy-dom

/** Panel rendering against recorded payloads: structure plus wiring. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it, vi } from "vitest";

import type { CauseList, KbStats, TreeDoc, ViolationReport, PlanDoc } from "../src/api.js";
import {
  causeRows,
  finishControl,
  kbView,
  planRows,
  treeView,
  violationsView,
} from "../src/model.js";
import {
  renderCausePicker,
  renderError,
  renderFinish,
  renderKb,
  renderNewSessionForm,
  renderPlans,
  renderTree,
  renderViolations,
} from "../src/render.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

const violationsOpen = load<ViolationReport>("violations_open.json");
const causesOpen = load<CauseList>("causes_open.json");
const plansForCause = load<{ scope: string; plans: PlanDoc[] }>("plans_for_cause.json");
const treeOpen = load<TreeDoc>("tree_open.json");
const treeRepaired = load<TreeDoc>("tree_repaired.json");
const kbAfter = load<KbStats>("kb_stats_after.json");
const kbEmpty = load<KbStats>("kb_stats_empty.json");

describe("renderViolations", () => {
  it("shows a row per violation with the explanation text", () => {
    const panel = renderViolations(violationsView(violationsOpen));
    const rows = panel.querySelectorAll(".violation-row");
    expect(rows).toHaveLength(2);
    expect(rows[0]!.querySelector(".violation-explanation")!.textContent).toContain(
      "only strictly downward dependencies",
    );
  });

  it("shows the all-clear line for a conformant node", () => {
    const report = { ...violationsOpen, conformant: true, counts: {}, violations: [] };
    const panel = renderViolations(violationsView(report));
    expect(panel.querySelector(".all-clear")).not.toBeNull();
    expect(panel.querySelectorAll(".violation-row")).toHaveLength(0);
  });
});

describe("renderCausePicker", () => {
  it("invokes the pick callback with the candidate id", () => {
    const onPick = vi.fn();
    const panel = renderCausePicker(causeRows(causesOpen.candidates, null), onPick);
    (panel.querySelector(".cause-pick") as HTMLButtonElement).click();
    expect(onPick).toHaveBeenCalledWith(causesOpen.candidates[0]!.id);
  });

  it("highlights the selected candidate and sizes the confidence bar", () => {
    const id = causesOpen.candidates[0]!.id;
    const panel = renderCausePicker(causeRows(causesOpen.candidates, id), () => {});
    const item = panel.querySelector(".cause-item")!;
    expect(item.className).toContain("selected");
    const fill = item.querySelector(".confidence-fill") as HTMLElement;
    expect(fill.style.width).toBe("53%");
  });
});

describe("renderPlans", () => {
  it("badges consolidating plans and wires the apply button", () => {
    const onApply = vi.fn();
    const rows = planRows(plansForCause.plans, 20.0);
    const panel = renderPlans(rows, plansForCause.scope, onApply);
    const items = panel.querySelectorAll(".plan-item");
    expect(items.length).toBe(plansForCause.plans.length);
    expect(items[0]!.querySelector(".badge.consolidating")).not.toBeNull();
    (items[0]!.querySelector(".plan-apply") as HTMLButtonElement).click();
    expect(onApply).toHaveBeenCalledWith(rows[0]);
  });

  it("marks worse steps in the trajectory", () => {
    const detour: PlanDoc = {
      actions: [{ verb: "move_entity", args: { entity: "a.x", target: "b" } }],
      step_scores: [13.0, 5.0],
      final_score: 5.0,
      final_violations: 0,
      consolidating: true,
      provenance: "beam",
    };
    const panel = renderPlans(planRows([detour], 10.0), "violations", () => {});
    const chips = panel.querySelectorAll(".score-chip");
    expect(chips[1]!.className).toContain("worse");
    expect(chips[1]!.textContent).toBe("↑ 13");
    expect(chips[2]!.className).toContain("better");
  });
});

describe("renderTree", () => {
  it("draws labeled edges, cursor highlight, and the consolidated badge", () => {
    const panel = renderTree(treeView(treeRepaired), () => {});
    const nodes = panel.querySelectorAll(".tree-node");
    expect(nodes).toHaveLength(2);
    expect(panel.querySelector(".tree-edge")!.textContent).toContain("move_entity");
    expect(nodes[1]!.className).toContain("cursor");
    expect(nodes[1]!.querySelector(".badge.consolidating")!.textContent).toBe("consolidated");
  });

  it("backtracks on click for non-cursor nodes only", () => {
    const onGoto = vi.fn();
    const panel = renderTree(treeView(treeRepaired), onGoto);
    const nodes = panel.querySelectorAll(".tree-node");
    (nodes[1] as HTMLButtonElement).click();
    expect(onGoto).not.toHaveBeenCalled();
    (nodes[0] as HTMLButtonElement).click();
    expect(onGoto).toHaveBeenCalledWith(1);
  });
});

describe("renderFinish", () => {
  it("disables consolidation with an explanation while violations remain", () => {
    const onFinish = vi.fn();
    const panel = renderFinish(finishControl(treeOpen), onFinish);
    const button = panel.querySelector(".finish-consolidated") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    expect(panel.querySelector(".finish-blocked")!.textContent).toContain("2 violation(s)");
    button.click();
    expect(onFinish).not.toHaveBeenCalled();
  });

  it("finishes consolidated from a clean cursor node", () => {
    const onFinish = vi.fn();
    const panel = renderFinish(finishControl(treeRepaired), onFinish);
    (panel.querySelector(".finish-consolidated") as HTMLButtonElement).click();
    expect(onFinish).toHaveBeenCalledWith("consolidated");
  });

  it("shows the outcome once closed", () => {
    const closed = { ...treeRepaired, outcome: "abandoned" };
    const panel = renderFinish(finishControl(closed), () => {});
    expect(panel.querySelector(".session-outcome")!.textContent).toContain("abandoned");
    expect(panel.querySelector(".finish-consolidated")).toBeNull();
  });
});

describe("renderKb", () => {
  it("shows tallies and both score columns", () => {
    const panel = renderKb(kbView(kbAfter), () => {});
    expect(panel.querySelector(".kb-event-count")!.textContent).toContain("3");
    const row = panel.querySelector(".kb-row")!;
    expect(row.querySelector(".kb-tally")!.textContent).toBe("1/1");
    expect(row.querySelector(".kb-system-score")!.textContent).toBe("0.6667");
    expect(row.querySelector(".kb-blended")!.textContent).toBe("0.6667");
  });

  it("falls back to priors-only tables on an empty store", () => {
    const panel = renderKb(kbView(kbEmpty), () => {});
    expect(panel.querySelectorAll(".kb-empty")).toHaveLength(2);
    expect(panel.querySelectorAll(".prior-item").length).toBeGreaterThan(0);
  });

  it("wires the refresh control", () => {
    const onRefresh = vi.fn();
    const panel = renderKb(kbView(kbEmpty), onRefresh);
    (panel.querySelector(".kb-refresh") as HTMLButtonElement).click();
    expect(onRefresh).toHaveBeenCalled();
  });
});

describe("renderError", () => {
  it("shows the message and retries on demand", () => {
    const onRetry = vi.fn();
    const banner = renderError("unknown_session: no session with id x", onRetry);
    expect(banner.querySelector(".error-message")!.textContent).toContain("unknown_session");
    (banner.querySelector(".error-retry") as HTMLButtonElement).click();
    expect(onRetry).toHaveBeenCalled();
  });
});

describe("renderNewSessionForm", () => {
  it("submits the typed documents and system id", () => {
    const onCreate = vi.fn();
    const panel = renderNewSessionForm(onCreate);
    (panel.querySelector(".input-architecture") as HTMLTextAreaElement).value = "{\"a\":1}";
    (panel.querySelector(".input-implementation") as HTMLTextAreaElement).value = "{\"b\":2}";
    (panel.querySelector(".input-system") as HTMLInputElement).value = "sys9";
    panel
      .querySelector("form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    expect(onCreate).toHaveBeenCalledWith("{\"a\":1}", "{\"b\":2}", "sys9");
  });
});
