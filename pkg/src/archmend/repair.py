"""Repair-action catalog: atomic, precondition-checked edits to either model.

Implementation-level verbs rewrite the facts (move_entity, delete_dependency,
set_public, introduce_interface); architecture-level verbs rewrite the rules
and structure (add_allow, remove_rule, change_layer, add_module,
merge_modules). Applying an action returns a new state and adds the verb's
cost; inputs are never mutated.

Candidate generation is scoped to a violation set or a selected cause so
search never wanders over the full edit space.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

from .conformance import Violation, ViolationSet, check
from .errors import LockViolationError, PreconditionError
from .model import (
    ArchitectureModel,
    Dependency,
    Entity,
    ModuleDecl,
    RuleDecl,
    SystemState,
)

IMPLEMENTATION_VERBS = ("move_entity", "delete_dependency", "set_public", "introduce_interface")
ARCHITECTURE_VERBS = ("add_allow", "remove_rule", "change_layer", "add_module", "merge_modules")
ALL_VERBS = IMPLEMENTATION_VERBS + ARCHITECTURE_VERBS

EDGE_VIOLATION_KINDS = (
    "unsanctioned_dependency",
    "forbidden_dependency",
    "layer_violation",
    "non_interface_access",
)

UNMAPPED_MOVE_CAP = 5


@dataclass(frozen=True)
class RepairAction:
    verb: str
    args: tuple[tuple[str, str], ...]

    # cached_property writes straight into __dict__, which frozen dataclasses
    # permit; the search sorts candidates by id often enough for this to show.
    @cached_property
    def id(self) -> str:
        body = ",".join(f"{k}={v}" for k, v in self.args)
        return f"{self.verb}({body})"

    @property
    def level(self) -> str:
        return "implementation" if self.verb in IMPLEMENTATION_VERBS else "architecture"

    def arg(self, name: str) -> str:
        for k, v in self.args:
            if k == name:
                return v
        raise PreconditionError(f"action '{self.id}' lacks required argument '{name}'")


def make_action(verb: str, **args: str) -> RepairAction:
    if verb not in ALL_VERBS:
        raise PreconditionError(f"unknown repair verb '{verb}'")
    return RepairAction(verb=verb, args=tuple(sorted(args.items())))


@dataclass(frozen=True)
class CostConfig:
    move_entity: float = 3.0
    delete_dependency: float = 6.0
    set_public: float = 1.0
    introduce_interface: float = 4.0
    add_allow: float = 2.0
    remove_rule: float = 2.0
    change_layer: float = 6.0
    add_module: float = 4.0
    merge_modules: float = 8.0

    def __post_init__(self) -> None:
        for verb in ALL_VERBS:
            if getattr(self, verb) <= 0:
                raise PreconditionError(f"cost for '{verb}' must be positive")


def action_cost(act: RepairAction, costs: CostConfig) -> float:
    if act.verb not in ALL_VERBS:
        raise PreconditionError(f"unknown repair verb '{act.verb}'")
    return getattr(costs, act.verb)


def action_doc(act: RepairAction) -> dict:
    return {"verb": act.verb, "args": dict(act.args)}


def action_from_doc(doc: dict) -> RepairAction:
    if not isinstance(doc, dict) or set(doc) != {"verb", "args"}:
        raise PreconditionError("action document must be an object with keys 'verb' and 'args'")
    verb, args = doc["verb"], doc["args"]
    if not isinstance(args, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in args.items()
    ):
        raise PreconditionError("action 'args' must be a string-to-string map")
    return make_action(verb, **args)


# ---------------------------------------------------------------------------
# Candidate generation
# ---------------------------------------------------------------------------


def _has_allow(a: ArchitectureModel, frm: str, to: str) -> bool:
    return any(r.kind == "allow" and r.frm == frm and r.to == to for r in a.rules)


def _allow_lockable(a: ArchitectureModel, frm: str, to: str) -> bool:
    return f"allow:{frm}->{to}" in a.rule_locks


def _top_layer_below(a: ArchitectureModel, module: str) -> list[str]:
    """Modules of the highest-ranked layer strictly below the module's layer."""
    rank = a.layer_rank(module)
    if rank is None:
        return []
    below = [l for l in a.layers if l.rank < rank]
    if not below:
        return []
    top_rank = max(l.rank for l in below)
    layer_names = {l.name for l in below if l.rank == top_rank}
    return sorted(m.name for m in a.modules if m.layer in layer_names)


def _move_candidates_for_edge(st: SystemState, violation: Violation) -> list[RepairAction]:
    a, s = st.architecture, st.implementation
    frm, to = violation.subjects[0].split("->", 1)
    source_module = s.entity(frm).module
    target_module = s.entity(to).module
    candidates = {target_module}
    for r in a.rules:
        if r.kind == "allow" and r.to == target_module:
            candidates.add(r.frm)
    candidates.update(_top_layer_below(a, target_module))
    candidates.discard(source_module)
    return [make_action("move_entity", entity=frm, target=m) for m in sorted(candidates)]


def _actions_for_edge_violation(st: SystemState, v: Violation) -> list[RepairAction]:
    a, s = st.architecture, st.implementation
    frm, to = v.subjects[0].split("->", 1)
    m1, m2 = v.module_pair or ("", "")
    actions = [make_action("delete_dependency", **{"from": frm, "to": to})]
    if not _has_allow(a, m1, m2) and not _allow_lockable(a, m1, m2):
        actions.append(make_action("add_allow", **{"from": m1, "to": m2}))
    actions.extend(_move_candidates_for_edge(st, v))
    if v.kind == "non_interface_access":
        actions.append(make_action("set_public", entity=to))
        actions.append(make_action("introduce_interface", target=to))
    return actions


def _actions_for_cycle(st: SystemState, v: Violation) -> list[RepairAction]:
    a = st.architecture
    actions = []
    for edge in v.subjects:
        frm, to = edge.split("->", 1)
        actions.append(make_action("delete_dependency", **{"from": frm, "to": to}))
    modules = v.id.split(":", 1)[1].split("->")
    pairs = [(modules[i], modules[i + 1]) for i in range(len(modules) - 1)]
    for x, y in pairs:
        into, drop = (x, y) if x < y else (y, x)
        actions.append(make_action("merge_modules", into=into, drop=drop))
    for r in a.rules:
        if r.kind == "allow" and (r.frm, r.to) in pairs and r.pattern not in a.rule_locks:
            actions.append(make_action("remove_rule", id=r.id))
    return actions


def _actions_for_unmapped(st: SystemState, v: Violation) -> list[RepairAction]:
    a, s = st.architecture, st.implementation
    entity_id = v.subjects[0]
    mapping = s.entity_module()
    neighbor_counts = {m.name: 0 for m in a.modules}
    for d in s.dependencies:
        if d.frm == entity_id and mapping[d.to]:
            neighbor_counts[mapping[d.to]] += 1
        elif d.to == entity_id and mapping[d.frm]:
            neighbor_counts[mapping[d.frm]] += 1
    ranked = sorted(neighbor_counts.items(), key=lambda item: (-item[1], item[0]))
    return [
        make_action("move_entity", entity=entity_id, target=name)
        for name, _ in ranked[:UNMAPPED_MOVE_CAP]
    ]


def _actions_for_violation(st: SystemState, v: Violation) -> list[RepairAction]:
    if v.kind in EDGE_VIOLATION_KINDS:
        return _actions_for_edge_violation(st, v)
    if v.kind == "module_cycle":
        return _actions_for_cycle(st, v)
    if v.kind == "unmapped_entity":
        return _actions_for_unmapped(st, v)
    return []


def cause_template_actions(st: SystemState, pattern) -> list[RepairAction]:
    """Directly suggested fixes for a diagnosed cause, checked for validity.

    ``pattern`` is a diagnosis FailurePattern (duck-typed to avoid a cycle).
    """
    a, s = st.architecture, st.implementation
    kind = pattern.cause_kind
    if kind == "misplaced_entity":
        entity, target = pattern.param("entity"), pattern.param("target")
        if s.has_entity(entity) and a.has_module(target) and s.entity(entity).module != target:
            return [make_action("move_entity", entity=entity, target=target)]
        return []
    if kind == "missing_allow_rule":
        frm, to = pattern.param("from"), pattern.param("to")
        if a.has_module(frm) and a.has_module(to) and not _has_allow(a, frm, to) and not _allow_lockable(a, frm, to):
            return [make_action("add_allow", **{"from": frm, "to": to})]
        return []
    if kind == "missing_facade":
        targets = set()
        for vid in pattern.covered:
            if vid.startswith("non_interface_access:"):
                edge = vid.split(":", 1)[1]
                targets.add(edge.split("->", 1)[1])
        return [
            make_action("introduce_interface", target=t)
            for t in sorted(targets)
            if s.has_entity(t) and s.entity(t).module and not s.entity(t).public
        ]
    return []


def applicable_actions(st: SystemState, scope, costs: CostConfig = CostConfig()) -> list[RepairAction]:
    """Deduplicated candidate actions for the scope, deterministically ordered.

    ``scope`` is a ViolationSet or a diagnosis CauseCandidate. Violation-derived
    actions sort by (level: implementation first, cost asc, id asc);
    cause-scoped requests put the cause's template actions ahead of that list.
    """
    templates: list[RepairAction] = []
    if isinstance(scope, ViolationSet):
        violations = list(scope.violations)
    else:
        pattern = scope.pattern
        templates = cause_template_actions(st, pattern)
        current = check(st.architecture, st.implementation)
        violations = [current.get(vid) for vid in pattern.covered]

    generated: dict[str, RepairAction] = {}
    for v in violations:
        for act in _actions_for_violation(st, v):
            generated.setdefault(act.id, act)

    ordered = sorted(
        generated.values(),
        key=lambda act: (0 if act.level == "implementation" else 1, action_cost(act, costs), act.id),
    )
    seen = {t.id for t in templates}
    return templates + [act for act in ordered if act.id not in seen]


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def _apply_move_entity(st: SystemState, act: RepairAction) -> SystemState:
    entity_id, target = act.arg("entity"), act.arg("target")
    s = st.implementation
    if not s.has_entity(entity_id):
        raise PreconditionError(f"move_entity: unknown entity '{entity_id}'")
    if not st.architecture.has_module(target):
        raise PreconditionError(f"move_entity: unknown target module '{target}'")
    if s.entity(entity_id).module == target:
        raise PreconditionError(f"move_entity: entity '{entity_id}' is already in module '{target}'")
    entities = tuple(
        replace(e, module=target) if e.id == entity_id else e for e in s.entities
    )
    return replace(st, implementation=replace(s, entities=entities))


def _apply_delete_dependency(st: SystemState, act: RepairAction) -> SystemState:
    frm, to = act.arg("from"), act.arg("to")
    s = st.implementation
    if not any(d.frm == frm and d.to == to for d in s.dependencies):
        raise PreconditionError(f"delete_dependency: no dependency '{frm}' -> '{to}'")
    deps = tuple(d for d in s.dependencies if not (d.frm == frm and d.to == to))
    return replace(st, implementation=replace(s, dependencies=deps))


def _apply_set_public(st: SystemState, act: RepairAction) -> SystemState:
    entity_id = act.arg("entity")
    s = st.implementation
    if not s.has_entity(entity_id):
        raise PreconditionError(f"set_public: unknown entity '{entity_id}'")
    entities = tuple(
        replace(e, public=not e.public) if e.id == entity_id else e for e in s.entities
    )
    return replace(st, implementation=replace(s, entities=entities))


def _apply_introduce_interface(st: SystemState, act: RepairAction) -> SystemState:
    target = act.arg("target")
    s = st.implementation
    if not s.has_entity(target):
        raise PreconditionError(f"introduce_interface: unknown entity '{target}'")
    target_entity = s.entity(target)
    module = target_entity.module
    if not module:
        raise PreconditionError(f"introduce_interface: entity '{target}' is unmapped")

    leaf = target.split(".")[-1]
    facade_id = f"{module}.{leaf}Facade"
    suffix = 2
    while s.has_entity(facade_id):
        facade_id = f"{module}.{leaf}Facade{suffix}"
        suffix += 1

    mapping = s.entity_module()
    deps = []
    for d in s.dependencies:
        if d.to == target and mapping[d.frm] and mapping[d.frm] != module:
            deps.append(replace(d, to=facade_id))
        else:
            deps.append(d)
    deps.append(Dependency(frm=facade_id, to=target))
    entities = s.entities + (Entity(id=facade_id, module=module, public=True),)
    return replace(st, implementation=replace(s, entities=entities, dependencies=tuple(deps)))


def _apply_add_allow(st: SystemState, act: RepairAction) -> SystemState:
    frm, to = act.arg("from"), act.arg("to")
    a = st.architecture
    for name in (frm, to):
        if not a.has_module(name):
            raise PreconditionError(f"add_allow: unknown module '{name}'")
    if frm == to:
        raise PreconditionError("add_allow: rule endpoints must differ")
    if _allow_lockable(a, frm, to):
        raise LockViolationError(f"add_allow: rule pattern 'allow:{frm}->{to}' is locked")
    if _has_allow(a, frm, to):
        raise PreconditionError(f"add_allow: allow rule for '{frm}' -> '{to}' already present")
    existing = {r.id for r in a.rules}
    rule_id = f"allow-{frm}-{to}"
    suffix = 2
    while rule_id in existing:
        rule_id = f"allow-{frm}-{to}-{suffix}"
        suffix += 1
    rules = a.rules + (RuleDecl(id=rule_id, kind="allow", frm=frm, to=to),)
    return replace(st, architecture=replace(a, rules=rules))


def _apply_remove_rule(st: SystemState, act: RepairAction) -> SystemState:
    rule_id = act.arg("id")
    a = st.architecture
    try:
        rule = a.rule(rule_id)
    except KeyError:
        raise PreconditionError(f"remove_rule: unknown rule '{rule_id}'") from None
    if rule.pattern in a.rule_locks:
        raise LockViolationError(f"remove_rule: rule pattern '{rule.pattern}' is locked")
    rules = tuple(r for r in a.rules if r.id != rule_id)
    return replace(st, architecture=replace(a, rules=rules))


def _apply_change_layer(st: SystemState, act: RepairAction) -> SystemState:
    module, layer = act.arg("module"), act.arg("layer")
    a = st.architecture
    if not a.has_module(module):
        raise PreconditionError(f"change_layer: unknown module '{module}'")
    if layer and layer not in {l.name for l in a.layers}:
        raise PreconditionError(f"change_layer: unknown layer '{layer}'")
    modules = tuple(
        replace(m, layer=layer or None) if m.name == module else m for m in a.modules
    )
    return replace(st, architecture=replace(a, modules=modules))


def _apply_add_module(st: SystemState, act: RepairAction) -> SystemState:
    name = act.arg("name")
    layer = dict(act.args).get("layer", "")
    a = st.architecture
    if a.has_module(name):
        raise PreconditionError(f"add_module: module '{name}' already exists")
    if layer and layer not in {l.name for l in a.layers}:
        raise PreconditionError(f"add_module: unknown layer '{layer}'")
    modules = a.modules + (ModuleDecl(name=name, layer=layer or None),)
    return replace(st, architecture=replace(a, modules=modules))


def _apply_merge_modules(st: SystemState, act: RepairAction) -> SystemState:
    into, drop = act.arg("into"), act.arg("drop")
    a, s = st.architecture, st.implementation
    for name in (into, drop):
        if not a.has_module(name):
            raise PreconditionError(f"merge_modules: unknown module '{name}'")
    if into == drop:
        raise PreconditionError("merge_modules: operands must be distinct")

    modules = tuple(m for m in a.modules if m.name != drop)
    rewritten: list[RuleDecl] = []
    seen_shapes: dict[tuple[str, str, str], str] = {}
    for r in sorted(a.rules, key=lambda r: r.id):
        frm = into if r.frm == drop else r.frm
        to = into if r.to == drop else r.to
        if frm == to:
            continue
        shape = (r.kind, frm, to)
        if shape in seen_shapes:
            continue
        seen_shapes[shape] = r.id
        rewritten.append(RuleDecl(id=r.id, kind=r.kind, frm=frm, to=to))

    entities = tuple(
        replace(e, module=into) if e.module == drop else e for e in s.entities
    )
    return replace(
        st,
        architecture=replace(a, modules=modules, rules=tuple(rewritten)),
        implementation=replace(s, entities=entities),
    )


_APPLIERS = {
    "move_entity": _apply_move_entity,
    "delete_dependency": _apply_delete_dependency,
    "set_public": _apply_set_public,
    "introduce_interface": _apply_introduce_interface,
    "add_allow": _apply_add_allow,
    "remove_rule": _apply_remove_rule,
    "change_layer": _apply_change_layer,
    "add_module": _apply_add_module,
    "merge_modules": _apply_merge_modules,
}


def apply_action(st: SystemState, act: RepairAction, costs: CostConfig = CostConfig()) -> SystemState:
    """Apply one action, returning a new state with the verb's cost added."""
    if act.verb not in _APPLIERS:
        raise PreconditionError(f"unknown repair verb '{act.verb}'")
    new_state = _APPLIERS[act.verb](st, act)
    return new_state.with_cost(action_cost(act, costs))
