/**
 * View-model tests against payloads recorded from a live service run
 * (tests/fixtures/*.json). The closing contract test enforces the
 * package's core rule: any number a view model exposes for display
 * already exists somewhere in the payload it was built from.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import type { KbStats, PlanDoc, TreeDoc, ViolationReport, CauseList } from "../src/api.js";
import {
  causeRows,
  finishControl,
  kbView,
  planRows,
  treeView,
  violationsView,
} from "../src/model.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

const violationsOpen = load<ViolationReport>("violations_open.json");
const violationsRepaired = load<ViolationReport>("violations_repaired.json");
const causesOpen = load<CauseList>("causes_open.json");
const plansForCause = load<{ scope: string; plans: PlanDoc[] }>("plans_for_cause.json");
const treeOpen = load<TreeDoc>("tree_open.json");
const treeRepaired = load<TreeDoc>("tree_repaired.json");
const kbEmpty = load<KbStats>("kb_stats_empty.json");
const kbAfter = load<KbStats>("kb_stats_after.json");

describe("violationsView", () => {
  it("keeps one row per violation with the service's explanation verbatim", () => {
    const view = violationsView(violationsOpen);
    expect(view.rows).toHaveLength(2);
    expect(view.conformant).toBe(false);
    expect(view.counts).toEqual([{ kind: "layer_violation", count: 2 }]);
    expect(view.rows[0]!.explanation).toBe(violationsOpen.violations[0]!.explanation);
  });

  it("reports a conformant node with no rows", () => {
    const view = violationsView(violationsRepaired);
    expect(view.conformant).toBe(true);
    expect(view.rows).toHaveLength(0);
  });
});

describe("causeRows", () => {
  it("orders by confidence and scales the bar without touching the number", () => {
    const rows = causeRows(causesOpen.candidates, null);
    expect(rows[0]!.signature).toBe("misplaced_entity(entity=data.Cache,target=app)");
    for (let i = 1; i < rows.length; i++) {
      expect(rows[i - 1]!.confidence).toBeGreaterThanOrEqual(rows[i]!.confidence);
    }
    for (const row of rows) {
      expect(row.barPct).toBeGreaterThanOrEqual(0);
      expect(row.barPct).toBeLessThanOrEqual(100);
      const source = causesOpen.candidates.find((c) => c.id === row.id)!;
      expect(row.confidence).toBe(source.confidence);
      expect(row.coveredCount).toBe(source.covered.length);
    }
  });

  it("marks the selected candidate", () => {
    const selectedId = causesOpen.candidates[0]!.id;
    const rows = causeRows(causesOpen.candidates, selectedId);
    expect(rows.filter((r) => r.selected).map((r) => r.id)).toEqual([selectedId]);
  });
});

describe("planRows", () => {
  it("puts the single move first for the recorded cause scope", () => {
    const rows = planRows(plansForCause.plans, 20.0);
    expect(rows[0]!.verbs).toEqual(["move_entity"]);
    expect(rows[0]!.consolidating).toBe(true);
    expect(rows[0]!.finalScore).toBe(3.0);
    expect(rows[0]!.actions[0]!.argText).toBe("entity=data.Cache, target=app");
  });

  it("flags a worse-before-better trajectory step by step", () => {
    // shape returned by the service for the detour case: the first step
    // raises the score above the root before the second settles below it
    const detour: PlanDoc = {
      actions: [
        { verb: "move_entity", args: { entity: "a.x", target: "b" } },
        { verb: "add_allow", args: { from: "d", to: "b" } },
      ],
      step_scores: [13.0, 5.0],
      final_score: 5.0,
      final_violations: 0,
      consolidating: true,
      provenance: "beam",
    };
    const [row] = planRows([detour], 10.0);
    expect(row!.trajectory.map((c) => c.score)).toEqual([10.0, 13.0, 5.0]);
    expect(row!.trajectory.map((c) => c.direction)).toEqual(["start", "worse", "better"]);
  });
});

describe("treeView", () => {
  it("lays out parent before child with the action verb on the edge", () => {
    const view = treeView(treeRepaired);
    expect(view.nodes.map((n) => n.id)).toEqual([1, 2]);
    expect(view.nodes.map((n) => n.depth)).toEqual([0, 1]);
    expect(view.nodes[0]!.edgeLabel).toBe("");
    expect(view.nodes[1]!.edgeLabel).toBe("move_entity");
  });

  it("derives the consolidated badge from the node's violation count", () => {
    const view = treeView(treeRepaired);
    expect(view.nodes[0]!.consolidated).toBe(false);
    expect(view.nodes[1]!.consolidated).toBe(true);
    expect(view.nodes[1]!.isCursor).toBe(true);
  });
});

describe("finishControl", () => {
  it("blocks consolidation while the cursor node has violations", () => {
    const control = finishControl(treeOpen);
    expect(control.open).toBe(true);
    expect(control.canConsolidate).toBe(false);
    expect(control.consolidateBlockedReason).toContain("2 violation(s)");
  });

  it("enables consolidation on a clean cursor node", () => {
    const control = finishControl(treeRepaired);
    expect(control.canConsolidate).toBe(true);
    expect(control.consolidateBlockedReason).toBeNull();
  });

  it("closes the controls once the session has an outcome", () => {
    const closed: TreeDoc = { ...treeRepaired, outcome: "consolidated" };
    const control = finishControl(closed);
    expect(control.open).toBe(false);
    expect(control.outcome).toBe("consolidated");
  });
});

describe("kbView", () => {
  it("renders prior-only tables for an empty store", () => {
    const view = kbView(kbEmpty);
    expect(view.eventCount).toBe(0);
    expect(view.causes).toHaveLength(0);
    expect(view.plans).toHaveLength(0);
    expect(view.priors.length).toBeGreaterThan(0);
    const kinds = view.priors.map((p) => p.kind);
    expect([...kinds].sort()).toEqual(kinds);
  });

  it("mirrors counts and scores after a finished session", () => {
    const view = kbView(kbAfter);
    expect(view.eventCount).toBe(kbAfter.event_count);
    expect(view.causes[0]!.tally).toBe("1/1");
    expect(view.causes[0]!.blended).toBe(kbAfter.causes[0]!.blended);
    expect(view.plans[0]!.verbs).toEqual(["move_entity"]);
  });
});

// every number offered for display must appear in the source payload;
// geometry helpers (bar widths, depths) are exempt because they are
// never rendered as text
describe("payload-number contract", () => {
  function collectNumbers(doc: unknown, into: Set<number>): Set<number> {
    if (typeof doc === "number") {
      into.add(doc);
    } else if (Array.isArray(doc)) {
      for (const item of doc) collectNumbers(item, into);
    } else if (doc && typeof doc === "object") {
      for (const value of Object.values(doc)) collectNumbers(value, into);
    }
    return into;
  }

  it("violation counts come from the report", () => {
    const allowed = collectNumbers(violationsOpen, new Set());
    for (const c of violationsView(violationsOpen).counts) {
      expect(allowed.has(c.count)).toBe(true);
    }
  });

  it("cause confidences come from the candidate list", () => {
    const allowed = collectNumbers(causesOpen, new Set());
    for (const row of causeRows(causesOpen.candidates, null)) {
      expect(allowed.has(row.confidence)).toBe(true);
    }
  });

  it("plan scores come from the plan list or the base node score", () => {
    const allowed = collectNumbers(plansForCause, new Set());
    const base = treeOpen.nodes[0]!.score;
    allowed.add(base);
    for (const row of planRows(plansForCause.plans, base)) {
      expect(allowed.has(row.finalScore)).toBe(true);
      expect(allowed.has(row.finalViolations)).toBe(true);
      for (const chip of row.trajectory) {
        expect(allowed.has(chip.score)).toBe(true);
      }
    }
  });

  it("tree scores and counts come from the tree document", () => {
    const allowed = collectNumbers(treeRepaired, new Set());
    for (const node of treeView(treeRepaired).nodes) {
      expect(allowed.has(node.score)).toBe(true);
      expect(allowed.has(node.violationCount)).toBe(true);
    }
  });

  it("knowledge-base figures come from the stats document", () => {
    const allowed = collectNumbers(kbAfter, new Set());
    const view = kbView(kbAfter);
    expect(allowed.has(view.eventCount)).toBe(true);
    for (const row of [...view.causes, ...view.plans]) {
      expect(allowed.has(row.systemScore)).toBe(true);
      expect(allowed.has(row.blended)).toBe(true);
      for (const part of row.tally.split("/")) {
        expect(allowed.has(Number(part))).toBe(true);
      }
    }
    for (const p of view.priors) {
      expect(allowed.has(p.prior)).toBe(true);
    }
  });
});
