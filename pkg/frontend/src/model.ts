/**
 * View models derived from API payloads.
 *
 * Hard rule: every number a view model exposes for display is a value
 * copied out of a payload. Scores, confidences, and counts are never
 * recomputed here. The only arithmetic in this file produces geometry
 * (bar widths, tree depths) or comparisons (trajectory direction,
 * control gating), never a displayed figure. tests/model.test.ts holds
 * this down against recorded payloads.
 */

import type {
  CauseDoc,
  KbStats,
  NodeDoc,
  PlanDoc,
  TreeDoc,
  ViolationReport,
} from "./api.js";

export interface ViolationRow {
  id: string;
  kind: string;
  subjects: string[];
  ruleId: string | null;
  explanation: string;
}

export interface ViolationsView {
  nodeId: number;
  conformant: boolean;
  counts: { kind: string; count: number }[];
  rows: ViolationRow[];
}

export function violationsView(report: ViolationReport): ViolationsView {
  const counts = Object.keys(report.counts)
    .sort()
    .map((kind) => ({ kind, count: report.counts[kind] as number }));
  return {
    nodeId: report.node_id,
    conformant: report.conformant,
    counts,
    rows: report.violations.map((v) => ({
      id: v.id,
      kind: v.kind,
      subjects: v.subjects,
      ruleId: v.rule_id,
      explanation: v.explanation,
    })),
  };
}

export interface CauseRow {
  id: number;
  signature: string;
  kind: string;
  confidence: number;
  /** confidence scaled to a 0..100 css width; the displayed number stays `confidence` */
  barPct: number;
  coveredCount: number;
  covered: string[];
  explanation: string;
  selected: boolean;
}

export function causeRows(candidates: CauseDoc[], selectedId: number | null): CauseRow[] {
  const rows = candidates.map((c) => ({
    id: c.id,
    signature: c.signature,
    kind: c.cause_kind,
    confidence: c.confidence,
    barPct: Math.max(0, Math.min(100, Math.round(c.confidence * 100))),
    coveredCount: c.covered.length,
    covered: c.covered,
    explanation: c.explanation,
    selected: c.id === selectedId,
  }));
  // the service already ranks candidates; re-sorting here keeps the picker
  // stable if a caller ever merges lists, and must agree with payload order
  rows.sort((a, b) => b.confidence - a.confidence || a.id - b.id);
  return rows;
}

/**
 * One chip per projected score along a plan, starting from the score of
 * the node the plan applies to. Direction flags high-before-low paths so
 * a plan that gets worse before it gets better is visibly justified;
 * the numbers shown are the payload's step_scores, untouched.
 */
export interface ScoreChip {
  score: number;
  direction: "start" | "better" | "worse" | "flat";
}

export interface PlanRow {
  index: number;
  verbs: string[];
  actions: { verb: string; argText: string }[];
  trajectory: ScoreChip[];
  finalScore: number;
  finalViolations: number;
  consolidating: boolean;
  provenance: string;
}

function argText(args: Record<string, string>): string {
  return Object.keys(args)
    .sort()
    .map((k) => `${k}=${args[k]}`)
    .join(", ");
}

export function planRows(plans: PlanDoc[], baseScore: number): PlanRow[] {
  return plans.map((p, index) => {
    const trajectory: ScoreChip[] = [{ score: baseScore, direction: "start" }];
    let prev = baseScore;
    for (const s of p.step_scores) {
      trajectory.push({
        score: s,
        direction: s > prev ? "worse" : s < prev ? "better" : "flat",
      });
      prev = s;
    }
    return {
      index,
      verbs: p.actions.map((a) => a.verb),
      actions: p.actions.map((a) => ({ verb: a.verb, argText: argText(a.args) })),
      trajectory,
      finalScore: p.final_score,
      finalViolations: p.final_violations,
      consolidating: p.consolidating,
      provenance: p.provenance,
    };
  });
}

export interface TreeNodeView {
  id: number;
  parent: number | null;
  depth: number;
  /** label of the edge from the parent, empty on the root */
  edgeLabel: string;
  violationCount: number;
  score: number;
  isCursor: boolean;
  /** a node with zero violations has reached a consolidated pair */
  consolidated: boolean;
  stateHash: string;
}

export interface TreeView {
  sessionId: string;
  cursor: number;
  outcome: string;
  selectedCause: string | null;
  /** preorder, so rendering top-down draws parents before children */
  nodes: TreeNodeView[];
}

export function treeView(tree: TreeDoc): TreeView {
  const byParent = new Map<number | null, NodeDoc[]>();
  for (const n of tree.nodes) {
    const list = byParent.get(n.parent) ?? [];
    list.push(n);
    byParent.set(n.parent, list);
  }
  const ordered: TreeNodeView[] = [];
  const visit = (node: NodeDoc, depth: number) => {
    ordered.push({
      id: node.node_id,
      parent: node.parent,
      depth,
      edgeLabel: node.action ? node.action.verb : "",
      violationCount: node.violation_count,
      score: node.score,
      isCursor: node.node_id === tree.cursor,
      consolidated: node.violation_count === 0,
      stateHash: node.state_hash,
    });
    for (const child of byParent.get(node.node_id) ?? []) {
      visit(child, depth + 1);
    }
  };
  for (const root of byParent.get(null) ?? []) {
    visit(root, 0);
  }
  return {
    sessionId: tree.session_id,
    cursor: tree.cursor,
    outcome: tree.outcome,
    selectedCause: tree.selected_cause,
    nodes: ordered,
  };
}

export interface FinishControl {
  open: boolean;
  canConsolidate: boolean;
  /** shown when the consolidate button is disabled */
  consolidateBlockedReason: string | null;
  outcome: string;
}

export function finishControl(tree: TreeDoc): FinishControl {
  const cursorNode = tree.nodes.find((n) => n.node_id === tree.cursor);
  const open = tree.outcome === "open";
  const violations = cursorNode ? cursorNode.violation_count : 0;
  const canConsolidate = open && violations === 0;
  return {
    open,
    canConsolidate,
    consolidateBlockedReason:
      open && violations > 0
        ? `current node still has ${violations} violation(s)`
        : null,
    outcome: tree.outcome,
  };
}

export interface KbScoreRow {
  classKey: string;
  systemId: string;
  tally: string;
  systemScore: number;
  blended: number;
  verbs?: string[];
}

export interface KbView {
  eventCount: number;
  causes: KbScoreRow[];
  plans: KbScoreRow[];
  priors: { kind: string; prior: number }[];
}

export function kbView(stats: KbStats): KbView {
  return {
    eventCount: stats.event_count,
    causes: stats.causes.map((r) => ({
      classKey: r.class_key,
      systemId: r.system_id,
      tally: `${r.confirmed}/${r.offered}`,
      systemScore: r.system_score,
      blended: r.blended,
    })),
    plans: stats.plans.map((r) => ({
      classKey: r.class_key,
      systemId: r.system_id,
      tally: `${r.successes}/${r.attempts}`,
      systemScore: r.system_score,
      blended: r.blended,
      verbs: r.verbs,
    })),
    priors: Object.keys(stats.priors)
      .sort()
      .map((kind) => ({ kind, prior: stats.priors[kind] as number })),
  };
}
