"""Failure-pattern detection and cause ranking.

Violations are aggregated into patterns by four matchers plus a fallback:

* misplaced_entity: an entity whose violating cross-module edges (two or
  more, either direction) all point at one foreign module and form a strict
  majority of its cross-module edges.
* missing_allow_rule: at least ``m2_threshold`` permission violations on one
  module pair, from as many distinct source entities.
* cyclic_module_dependency: one per module_cycle violation.
* missing_facade: at least ``m4_threshold`` non_interface_access violations
  into one module.
* isolated_violation: fallback for every violation no other pattern covers.

Patterns may overlap; the engineer picks, the tool never auto-resolves.
Confidence blends system-specific and generic knowledge scores 0.7/0.3.
"""

from __future__ import annotations

from dataclasses import dataclass

from .conformance import Violation, ViolationSet
from .model import ArchitectureModel, ImplementationModel

PERMISSION_KINDS = ("unsanctioned_dependency", "forbidden_dependency", "layer_violation")

# Kinds an allow rule could legalize; forbidden edges are architect vetoes
# and outrank any allow, so they never suggest a missing rule.
M2_KINDS = ("unsanctioned_dependency", "layer_violation")


@dataclass(frozen=True)
class DiagnosisConfig:
    m1_min_edges: int = 2
    m2_threshold: int = 3
    m4_threshold: int = 2


@dataclass(frozen=True)
class FailurePattern:
    """An aggregation of violations attributed to one hypothesized cause."""

    cause_kind: str
    parameters: tuple[tuple[str, str], ...]
    covered: tuple[str, ...]

    @property
    def signature(self) -> str:
        args = ",".join(f"{k}={v}" for k, v in self.parameters)
        return f"{self.cause_kind}({args})"

    @property
    def class_key(self) -> str:
        """Structural shape of the signature: kind plus parameter names only."""
        names = ",".join(k for k, _ in self.parameters)
        return f"{self.cause_kind}/{names}"

    def param(self, name: str) -> str:
        for k, v in self.parameters:
            if k == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class CauseCandidate:
    id: int
    pattern: FailurePattern
    confidence: float
    explanation: str


def make_pattern(cause_kind: str, parameters: dict[str, str], covered: list[str]) -> FailurePattern:
    return FailurePattern(
        cause_kind=cause_kind,
        parameters=tuple(sorted(parameters.items())),
        covered=tuple(sorted(covered)),
    )


def _edge_endpoints(edge: str) -> tuple[str, str]:
    frm, to = edge.split("->", 1)
    return frm, to


def detect_patterns(
    vs: ViolationSet,
    a: ArchitectureModel,
    s: ImplementationModel,
    cfg: DiagnosisConfig = DiagnosisConfig(),
) -> list[FailurePattern]:
    """All matching patterns plus isolated fallbacks, sorted by signature."""
    mapping = s.entity_module()
    patterns: list[FailurePattern] = []

    # Violating edge -> the permission-violation ids on it.
    edge_violations: dict[str, list[str]] = {}
    for v in vs.violations:
        if v.kind in PERMISSION_KINDS:
            edge_violations.setdefault(v.subjects[0], []).append(v.id)

    # M1: per entity, collect violating edges and their far-end modules.
    incident: dict[str, set[str]] = {}
    for edge in edge_violations:
        frm, to = _edge_endpoints(edge)
        incident.setdefault(frm, set()).add(edge)
        incident.setdefault(to, set()).add(edge)

    cross_module_degree: dict[str, int] = {}
    for d in s.dependencies:
        m1, m2 = mapping[d.frm], mapping[d.to]
        if not m1 or not m2 or m1 == m2:
            continue
        cross_module_degree[d.frm] = cross_module_degree.get(d.frm, 0) + 1
        cross_module_degree[d.to] = cross_module_degree.get(d.to, 0) + 1

    for entity_id in sorted(incident):
        edges = incident[entity_id]
        home = mapping.get(entity_id, "")
        if not home or len(edges) < cfg.m1_min_edges:
            continue
        far_modules = set()
        for edge in edges:
            frm, to = _edge_endpoints(edge)
            far = to if frm == entity_id else frm
            far_modules.add(mapping[far])
        if len(far_modules) != 1:
            continue
        target = next(iter(far_modules))
        if target == home:
            continue
        if 2 * len(edges) <= cross_module_degree.get(entity_id, 0):
            continue
        covered = [vid for edge in edges for vid in edge_violations[edge]]
        patterns.append(make_pattern("misplaced_entity", {"entity": entity_id, "target": target}, covered))

    # M2: repeated violations on one module pair from distinct sources.
    pair_violations: dict[tuple[str, str], list[Violation]] = {}
    for v in vs.violations:
        if v.kind in M2_KINDS and v.module_pair:
            pair_violations.setdefault(v.module_pair, []).append(v)
    for pair in sorted(pair_violations):
        group = pair_violations[pair]
        sources = {_edge_endpoints(v.subjects[0])[0] for v in group}
        if len(group) >= cfg.m2_threshold and len(sources) >= cfg.m2_threshold:
            patterns.append(
                make_pattern(
                    "missing_allow_rule",
                    {"from": pair[0], "to": pair[1]},
                    [v.id for v in group],
                )
            )

    # M3: one pattern per module cycle.
    for v in vs.by_kind("module_cycle"):
        cycle = v.id.split(":", 1)[1]
        patterns.append(make_pattern("cyclic_module_dependency", {"cycle": cycle}, [v.id]))

    # M4: repeated non-public access into one module.
    facade_targets: dict[str, list[str]] = {}
    for v in vs.by_kind("non_interface_access"):
        assert v.module_pair is not None
        facade_targets.setdefault(v.module_pair[1], []).append(v.id)
    for module in sorted(facade_targets):
        ids = facade_targets[module]
        if len(ids) >= cfg.m4_threshold:
            patterns.append(make_pattern("missing_facade", {"module": module}, ids))

    covered_ids = {vid for p in patterns for vid in p.covered}
    for v in vs.violations:
        if v.id not in covered_ids:
            patterns.append(make_pattern("isolated_violation", {"violation": v.id}, [v.id]))

    return sorted(patterns, key=lambda p: p.signature)


def explain_pattern(p: FailurePattern) -> str:
    if p.cause_kind == "misplaced_entity":
        return (
            f"Entity '{p.param('entity')}' interacts mostly with module "
            f"'{p.param('target')}'; it probably belongs there."
        )
    if p.cause_kind == "missing_allow_rule":
        return (
            f"{len(p.covered)} dependencies cross '{p.param('from')}' -> '{p.param('to')}' "
            f"from several source entities; the architecture may be missing an allow rule "
            f"for this pair."
        )
    if p.cause_kind == "cyclic_module_dependency":
        return (
            f"Modules form the dependency cycle {p.param('cycle')}; at least one edge "
            f"contradicts the intended direction."
        )
    if p.cause_kind == "missing_facade":
        return (
            f"Several dependencies reach non-public entities inside module "
            f"'{p.param('module')}'; the module lacks a public access point."
        )
    return (
        f"Violation {p.param('violation')} matches no broader pattern and likely "
        f"needs an individual fix."
    )


def rank_causes(patterns: list[FailurePattern], kb, system_id: str) -> list[CauseCandidate]:
    """Candidates sorted by (confidence desc, signature asc), ids assigned 1..n.

    ``kb`` is any object with cause_score(class_key, cause_kind, system_id).
    """
    scored = [
        (kb.cause_score(p.class_key, p.cause_kind, system_id), p)
        for p in patterns
    ]
    scored.sort(key=lambda item: (-item[0], item[1].signature))
    return [
        CauseCandidate(id=i, pattern=p, confidence=conf, explanation=explain_pattern(p))
        for i, (conf, p) in enumerate(scored, start=1)
    ]


def candidate_doc(c: CauseCandidate) -> dict:
    return {
        "id": c.id,
        "signature": c.pattern.signature,
        "cause_kind": c.pattern.cause_kind,
        "class_key": c.pattern.class_key,
        "parameters": dict(c.pattern.parameters),
        "covered": list(c.pattern.covered),
        "confidence": c.confidence,
        "explanation": c.explanation,
    }


def diagnosis_doc(candidates: list[CauseCandidate]) -> list[dict]:
    return [candidate_doc(c) for c in candidates]
