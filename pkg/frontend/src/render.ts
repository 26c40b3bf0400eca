/**
 * DOM construction for the dashboard panels.
 *
 * Builders take a view model plus callbacks and return detached
 * elements; they read nothing off the network and keep no state, so the
 * controller can rebuild any panel from the latest payloads after each
 * mutation.
 */

import type {
  CauseRow,
  FinishControl,
  KbView,
  PlanRow,
  TreeView,
  ViolationsView,
} from "./model.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function panel(title: string, className: string): HTMLElement {
  const box = el("section", `panel ${className}`);
  box.appendChild(el("h2", "panel-title", title));
  return box;
}

export function renderViolations(view: ViolationsView): HTMLElement {
  const box = panel("Violations", "violations-panel");
  if (view.conformant) {
    box.appendChild(el("p", "all-clear", "No violations. This state is consolidated."));
    return box;
  }
  const summary = el("p", "violation-counts");
  summary.textContent = view.counts.map((c) => `${c.kind}: ${c.count}`).join("  ·  ");
  box.appendChild(summary);

  const table = el("table", "violations-table");
  const head = el("tr");
  for (const col of ["Kind", "Subjects", "Explanation"]) {
    head.appendChild(el("th", undefined, col));
  }
  table.appendChild(head);
  for (const row of view.rows) {
    const tr = el("tr", "violation-row");
    tr.dataset.violationId = row.id;
    tr.appendChild(el("td", "violation-kind", row.kind));
    tr.appendChild(el("td", "violation-subjects", row.subjects.join(", ")));
    tr.appendChild(el("td", "violation-explanation", row.explanation));
    table.appendChild(tr);
  }
  box.appendChild(table);
  return box;
}

export function renderCausePicker(
  rows: CauseRow[],
  onPick: (candidateId: number) => void,
): HTMLElement {
  const box = panel("Likely causes", "causes-panel");
  if (rows.length === 0) {
    box.appendChild(el("p", "empty-note", "No cause patterns detected for this node."));
    return box;
  }
  const list = el("ul", "cause-list");
  for (const row of rows) {
    const item = el("li", row.selected ? "cause-item selected" : "cause-item");
    item.dataset.causeId = String(row.id);

    const button = el("button", "cause-pick") as HTMLButtonElement;
    button.type = "button";
    button.appendChild(el("span", "cause-signature", row.signature));
    const bar = el("span", "confidence-bar");
    const fill = el("span", "confidence-fill");
    fill.style.width = `${row.barPct}%`;
    bar.appendChild(fill);
    button.appendChild(bar);
    button.appendChild(el("span", "confidence-value", row.confidence.toFixed(2)));
    button.addEventListener("click", () => onPick(row.id));
    item.appendChild(button);

    item.appendChild(
      el("p", "cause-detail", `${row.explanation} Covers ${row.coveredCount} violation(s).`),
    );
    list.appendChild(item);
  }
  box.appendChild(list);
  return box;
}

export function renderPlans(
  rows: PlanRow[],
  scope: string,
  onApply: (row: PlanRow) => void,
): HTMLElement {
  const box = panel(`Plans — ${scope}`, "plans-panel");
  if (rows.length === 0) {
    box.appendChild(el("p", "empty-note", "No plans found at this depth."));
    return box;
  }
  const list = el("ol", "plan-list");
  for (const row of rows) {
    const item = el("li", "plan-item");
    item.dataset.planIndex = String(row.index);

    const header = el("div", "plan-header");
    header.appendChild(el("span", "plan-provenance", row.provenance));
    header.appendChild(el("span", "plan-final-score", `final score ${row.finalScore}`));
    if (row.consolidating) {
      header.appendChild(el("span", "badge consolidating", "consolidating"));
    } else {
      header.appendChild(
        el("span", "badge partial", `${row.finalViolations} violation(s) left`),
      );
    }
    item.appendChild(header);

    const actions = el("div", "plan-actions");
    for (const a of row.actions) {
      actions.appendChild(el("span", "action-chip", `${a.verb}(${a.argText})`));
    }
    item.appendChild(actions);

    const trajectory = el("div", "plan-trajectory");
    for (const chip of row.trajectory) {
      const mark =
        chip.direction === "worse" ? "↑ " : chip.direction === "better" ? "↓ " : "";
      trajectory.appendChild(
        el("span", `score-chip ${chip.direction}`, `${mark}${chip.score}`),
      );
    }
    item.appendChild(trajectory);

    const apply = el("button", "plan-apply", "Apply plan") as HTMLButtonElement;
    apply.type = "button";
    apply.addEventListener("click", () => onApply(row));
    item.appendChild(apply);

    list.appendChild(item);
  }
  box.appendChild(list);
  return box;
}

/** Indented node boxes with labeled connectors; click any non-cursor node to back up. */
export function renderTree(
  view: TreeView,
  onGoto: (nodeId: number) => void,
): HTMLElement {
  const box = panel("State tree", "tree-panel");
  const list = el("div", "tree");
  for (const node of view.nodes) {
    const row = el("div", "tree-row");
    row.style.marginLeft = `${node.depth * 2}rem`;

    if (node.edgeLabel) {
      row.appendChild(el("span", "tree-edge", `↳ ${node.edgeLabel}`));
    }
    const classes = ["tree-node"];
    classes.push(node.consolidated ? "ok" : node.violationCount > 2 ? "bad" : "warn");
    if (node.isCursor) classes.push("cursor");
    const button = el("button", classes.join(" ")) as HTMLButtonElement;
    button.type = "button";
    button.dataset.nodeId = String(node.id);
    button.appendChild(el("span", "tree-node-id", `#${node.id}`));
    button.appendChild(el("span", "tree-node-score", `score ${node.score}`));
    button.appendChild(
      el("span", "tree-node-violations", `${node.violationCount} violation(s)`),
    );
    if (node.consolidated) {
      button.appendChild(el("span", "badge consolidating", "consolidated"));
    }
    button.title = node.stateHash;
    if (!node.isCursor) {
      button.addEventListener("click", () => onGoto(node.id));
    }
    row.appendChild(button);
    list.appendChild(row);
  }
  box.appendChild(list);
  return box;
}

export function renderFinish(
  control: FinishControl,
  onFinish: (outcome: string) => void,
): HTMLElement {
  const box = panel("Finish session", "finish-panel");
  if (!control.open) {
    box.appendChild(el("p", "session-outcome", `Session closed: ${control.outcome}.`));
    return box;
  }

  const consolidate = el("button", "finish-consolidated", "Finish as consolidated");
  (consolidate as HTMLButtonElement).type = "button";
  if (!control.canConsolidate) {
    (consolidate as HTMLButtonElement).disabled = true;
    box.appendChild(consolidate);
    box.appendChild(
      el("p", "finish-blocked", control.consolidateBlockedReason ?? ""),
    );
  } else {
    consolidate.addEventListener("click", () => onFinish("consolidated"));
    box.appendChild(consolidate);
  }

  const abandon = el("button", "finish-abandoned", "Abandon");
  (abandon as HTMLButtonElement).type = "button";
  abandon.addEventListener("click", () => onFinish("abandoned"));
  box.appendChild(abandon);
  return box;
}

export function renderKb(view: KbView, onRefresh: () => void): HTMLElement {
  const box = panel("Knowledge base", "kb-panel");
  box.appendChild(el("p", "kb-event-count", `${view.eventCount} recorded event(s)`));

  const section = (
    title: string,
    rows: typeof view.causes,
    tallyHead: string,
  ): HTMLElement => {
    const wrap = el("div", "kb-section");
    wrap.appendChild(el("h3", undefined, title));
    const table = el("table", "kb-table");
    const head = el("tr");
    for (const col of ["Class", "System", tallyHead, "System score", "Blended"]) {
      head.appendChild(el("th", undefined, col));
    }
    table.appendChild(head);
    for (const row of rows) {
      const tr = el("tr", "kb-row");
      const classCell = el("td", "kb-class", row.classKey);
      if (row.verbs) {
        classCell.appendChild(el("span", "kb-verbs", ` [${row.verbs.join(", ")}]`));
      }
      tr.appendChild(classCell);
      tr.appendChild(el("td", undefined, row.systemId));
      tr.appendChild(el("td", "kb-tally", row.tally));
      tr.appendChild(el("td", "kb-system-score", row.systemScore.toFixed(4)));
      tr.appendChild(el("td", "kb-blended", row.blended.toFixed(4)));
      table.appendChild(tr);
    }
    if (rows.length === 0) {
      const tr = el("tr", "kb-empty");
      const td = el("td", undefined, "no observations yet; priors below apply");
      td.setAttribute("colspan", "5");
      tr.appendChild(td);
      table.appendChild(tr);
    }
    wrap.appendChild(table);
    return wrap;
  };

  box.appendChild(section("Cause scores", view.causes, "Confirmed/Offered"));
  box.appendChild(section("Plan template scores", view.plans, "Succeeded/Attempted"));

  const priors = el("div", "kb-section kb-priors");
  priors.appendChild(el("h3", undefined, "Priors"));
  const list = el("ul", "prior-list");
  for (const p of view.priors) {
    list.appendChild(el("li", "prior-item", `${p.kind}: ${p.prior}`));
  }
  priors.appendChild(list);
  box.appendChild(priors);

  const refresh = el("button", "kb-refresh", "Refresh") as HTMLButtonElement;
  refresh.type = "button";
  refresh.addEventListener("click", onRefresh);
  box.appendChild(refresh);
  return box;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", "error-message", message));
  const retry = el("button", "error-retry", "Retry") as HTMLButtonElement;
  retry.type = "button";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}

export function renderNewSessionForm(
  onCreate: (architecture: string, implementation: string, systemId: string) => void,
): HTMLElement {
  const box = panel("New session", "new-session-panel");
  const form = el("form", "new-session-form") as HTMLFormElement;

  const field = (name: string, label: string, rows: number): HTMLTextAreaElement => {
    const wrap = el("label", "field");
    wrap.appendChild(el("span", undefined, label));
    const area = el("textarea", `input-${name}`) as HTMLTextAreaElement;
    area.rows = rows;
    area.spellcheck = false;
    wrap.appendChild(area);
    form.appendChild(wrap);
    return area;
  };

  const archInput = field("architecture", "Architecture document (JSON)", 10);
  const implInput = field("implementation", "Implementation document (JSON)", 10);

  const sysWrap = el("label", "field");
  sysWrap.appendChild(el("span", undefined, "System id"));
  const sysInput = el("input", "input-system") as HTMLInputElement;
  sysInput.value = "default";
  sysWrap.appendChild(sysInput);
  form.appendChild(sysWrap);

  const submit = el("button", "create-session", "Create session") as HTMLButtonElement;
  submit.type = "submit";
  form.appendChild(submit);

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    onCreate(archInput.value, implInput.value, sysInput.value);
  });
  box.appendChild(form);
  return box;
}
