"""Conformance checking: evaluates the architecture rules against the facts.

A dependency between entities mapped to different modules is classified by
precedence: forbid rule, then allow rule, then downward layering, then
layer_violation (both endpoints layered) or unsanctioned_dependency.
Non-public access into an interface_only module and unmapped entities are
reported independently. With cycle checking enabled, every elementary cycle
of the derived module graph yields one violation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ResourceLimitError, UnknownViolationError
from .model import ArchitectureModel, ImplementationModel, require_paired

VIOLATION_KINDS = (
    "unsanctioned_dependency",
    "forbidden_dependency",
    "layer_violation",
    "module_cycle",
    "unmapped_entity",
    "non_interface_access",
)

EDGE_KINDS = ("unsanctioned_dependency", "forbidden_dependency", "layer_violation", "non_interface_access")

MAX_CYCLES = 10000


@dataclass(frozen=True)
class Violation:
    """One concrete breach of an architecture rule.

    ``id`` is "<kind>:<subject-key>": the entity edge "from->to" for edge
    kinds, the entity id for unmapped_entity, and the canonical rotation
    "m1->m2->...->m1" for module_cycle. ``subjects`` lists the entity ids or
    entity-edge strings involved.
    """

    id: str
    kind: str
    subjects: tuple[str, ...]
    module_pair: tuple[str, str] | None = None
    rule_id: str | None = None


@dataclass(frozen=True)
class ViolationSet:
    violations: tuple[Violation, ...]

    @property
    def conformant(self) -> bool:
        return not self.violations

    def ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.violations)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.violations:
            out[v.kind] = out.get(v.kind, 0) + 1
        return dict(sorted(out.items()))

    def get(self, violation_id: str) -> Violation:
        for v in self.violations:
            if v.id == violation_id:
                return v
        raise UnknownViolationError(f"no violation with id '{violation_id}' in this set")

    def by_kind(self, kind: str) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.kind == kind)


def module_dependency_graph(a: ArchitectureModel, s: ImplementationModel) -> dict[str, dict[str, int]]:
    """Directed module graph from cross-module dependencies of mapped entities.

    Returns {source_module: {target_module: dependency_count}}; modules
    without outgoing cross-module edges are absent.
    """
    require_paired(a, s)
    mapping = s.entity_module()
    graph: dict[str, dict[str, int]] = {}
    for d in s.dependencies:
        m1, m2 = mapping[d.frm], mapping[d.to]
        if not m1 or not m2 or m1 == m2:
            continue
        graph.setdefault(m1, {})
        graph[m1][m2] = graph[m1].get(m2, 0) + 1
    return graph


def find_module_cycles(graph: dict[str, dict[str, int]], max_cycles: int = MAX_CYCLES) -> list[str]:
    """All elementary cycles as canonical "m1->m2->...->m1" strings, sorted.

    Each cycle is rooted at its lexicographically smallest module by
    searching from every node over the subgraph of nodes not smaller than it,
    which yields every elementary cycle exactly once.
    """
    nodes = sorted(set(graph) | {t for targets in graph.values() for t in targets})
    cycles: list[str] = []

    def visit(start: str, node: str, path: list[str], on_path: set[str]) -> None:
        for nxt in sorted(graph.get(node, {})):
            if nxt < start:
                continue
            if nxt == start:
                if len(cycles) >= max_cycles:
                    raise ResourceLimitError(
                        f"module cycle enumeration exceeded the cap of {max_cycles}", count=max_cycles
                    )
                cycles.append("->".join(path + [start]))
            elif nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                visit(start, nxt, path, on_path)
                path.pop()
                on_path.remove(nxt)

    for start in nodes:
        visit(start, start, [start], {start})
    return sorted(cycles)


def _cycle_subjects(cycle: str, pair_edges: dict[tuple[str, str], list[str]]) -> tuple[str, ...]:
    """Entity edges crossing consecutive module pairs along the cycle."""
    mods = cycle.split("->")
    subjects: list[str] = []
    for i in range(len(mods) - 1):
        subjects.extend(pair_edges.get((mods[i], mods[i + 1]), ()))
    return tuple(sorted(subjects))


def check(a: ArchitectureModel, s: ImplementationModel) -> ViolationSet:
    """Decide conformance; the returned set is empty iff no rule is breached.

    Lookup tables for module ranks, interface flags, and entity visibility are
    built once up front: the planner calls this on every expanded state, so
    per-edge linear scans over the models would dominate search time.
    """
    require_paired(a, s)
    mapping = s.entity_module()
    layer_ranks = {l.name: l.rank for l in a.layers}
    module_rank = {m.name: layer_ranks.get(m.layer) if m.layer else None for m in a.modules}
    interface_only = {m.name for m in a.modules if m.interface_only}
    entity_public = {e.id: e.public for e in s.entities}
    violations: list[Violation] = []

    for e in sorted(s.entities, key=lambda e: e.id):
        if not e.module:
            violations.append(
                Violation(id=f"unmapped_entity:{e.id}", kind="unmapped_entity", subjects=(e.id,))
            )

    forbids: dict[tuple[str, str], str] = {}
    allows: set[tuple[str, str]] = set()
    for r in sorted(a.rules, key=lambda r: r.id):
        if r.kind == "forbid":
            forbids.setdefault((r.frm, r.to), r.id)
        else:
            allows.add((r.frm, r.to))

    for d in s.dependencies:
        m1, m2 = mapping[d.frm], mapping[d.to]
        if not m1 or not m2 or m1 == m2:
            continue
        edge = f"{d.frm}->{d.to}"
        pair = (m1, m2)

        if pair in forbids:
            violations.append(
                Violation(
                    id=f"forbidden_dependency:{edge}",
                    kind="forbidden_dependency",
                    subjects=(edge,),
                    module_pair=pair,
                    rule_id=forbids[pair],
                )
            )
        elif pair in allows:
            pass
        else:
            r1, r2 = module_rank[m1], module_rank[m2]
            if r1 is not None and r2 is not None and r1 > r2:
                pass
            elif r1 is not None and r2 is not None:
                violations.append(
                    Violation(
                        id=f"layer_violation:{edge}",
                        kind="layer_violation",
                        subjects=(edge,),
                        module_pair=pair,
                    )
                )
            else:
                violations.append(
                    Violation(
                        id=f"unsanctioned_dependency:{edge}",
                        kind="unsanctioned_dependency",
                        subjects=(edge,),
                        module_pair=pair,
                    )
                )

        if m2 in interface_only and not entity_public[d.to]:
            violations.append(
                Violation(
                    id=f"non_interface_access:{edge}",
                    kind="non_interface_access",
                    subjects=(edge,),
                    module_pair=pair,
                )
            )

    if a.policy.cycle_check:
        graph: dict[str, dict[str, int]] = {}
        pair_edges: dict[tuple[str, str], list[str]] = {}
        for d in s.dependencies:
            m1, m2 = mapping[d.frm], mapping[d.to]
            if not m1 or not m2 or m1 == m2:
                continue
            graph.setdefault(m1, {})
            graph[m1][m2] = graph[m1].get(m2, 0) + 1
            pair_edges.setdefault((m1, m2), []).append(f"{d.frm}->{d.to}")
        for cycle in find_module_cycles(graph):
            violations.append(
                Violation(
                    id=f"module_cycle:{cycle}",
                    kind="module_cycle",
                    subjects=_cycle_subjects(cycle, pair_edges),
                )
            )

    return ViolationSet(violations=tuple(sorted(violations, key=lambda v: v.id)))


def explain(v: Violation, a: ArchitectureModel, s: ImplementationModel) -> str:
    """One-sentence explanation; the violation must be current for (a, s)."""
    current = check(a, s)
    v = current.get(v.id)

    if v.kind == "unmapped_entity":
        return f"Entity '{v.subjects[0]}' is not mapped to any module."

    if v.kind == "module_cycle":
        cycle = v.id.split(":", 1)[1]
        return f"Modules form a dependency cycle {cycle}, carried by {len(v.subjects)} dependency edge(s)."

    edge = v.subjects[0]
    m1, m2 = v.module_pair or ("", "")
    if v.kind == "forbidden_dependency":
        return f"Dependency {edge} crosses '{m1}' -> '{m2}', which rule '{v.rule_id}' explicitly forbids."
    if v.kind == "layer_violation":
        mod1, mod2 = a.module(m1), a.module(m2)
        r1, r2 = a.layer_rank(m1), a.layer_rank(m2)
        return (
            f"Dependency {edge} points from module '{m1}' (layer '{mod1.layer}', rank {r1}) "
            f"to module '{m2}' (layer '{mod2.layer}', rank {r2}); only strictly downward "
            f"dependencies are permitted."
        )
    if v.kind == "non_interface_access":
        target = edge.split("->", 1)[1]
        return (
            f"Dependency {edge} reaches non-public entity '{target}' inside interface-only "
            f"module '{m2}'."
        )
    return (
        f"Dependency {edge} crosses '{m1}' -> '{m2}' without an allow rule; "
        f"inter-module dependencies are denied by default."
    )


def violation_doc(v: Violation) -> dict:
    return {
        "id": v.id,
        "kind": v.kind,
        "subjects": list(v.subjects),
        "module_pair": list(v.module_pair) if v.module_pair else None,
        "rule_id": v.rule_id,
    }


def report_doc(vs: ViolationSet) -> dict:
    return {
        "conformant": vs.conformant,
        "counts": vs.counts(),
        "violations": [violation_doc(v) for v in vs.violations],
    }


def render_table(vs: ViolationSet) -> str:
    """Human-oriented plain-text table; not covered by byte-exactness rules."""
    if vs.conformant:
        return "conformant: no violations\n"
    rows = [("KIND", "SUBJECTS", "MODULES")]
    for v in vs.violations:
        modules = f"{v.module_pair[0]}->{v.module_pair[1]}" if v.module_pair else "-"
        rows.append((v.kind, ", ".join(v.subjects), modules))
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    lines.append(f"{len(vs.violations)} violation(s)")
    return "\n".join(lines) + "\n"
