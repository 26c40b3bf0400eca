"""Core data model: the architecture/implementation tuple and its canonical form.

An architecture model holds modules, layers, allow/forbid dependency rules,
a policy block, and a set of locked rule patterns. An implementation model
holds code entities (each mapped to a module, or unmapped) and typed,
weighted dependency edges between them. A ``SystemState`` pairs the two and
carries the cost accumulated by repairs.

All values are immutable after construction. The canonical serialization
(sorted keys, lists sorted by primary key, compact separators, UTF-8, single
trailing LF) is the basis for state hashing and golden tests; it is
documented in ``docs/canonical-serialization.md``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace

from .errors import DocumentParseError, ModelValidationError, PairingError

IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")

RULE_KINDS = ("allow", "forbid")

# Rule-lock pattern: "<kind>:<from>-><to>", e.g. "allow:data->ui".
LOCK_PATTERN_RE = re.compile(
    r"^(allow|forbid):([A-Za-z_][A-Za-z0-9_.-]*)->([A-Za-z_][A-Za-z0-9_.-]*)$"
)


def is_identifier(text: str) -> bool:
    return bool(IDENTIFIER_RE.match(text))


@dataclass(frozen=True)
class LayerDecl:
    """A named layer with an integer rank; higher rank = closer to the user."""

    name: str
    rank: int


@dataclass(frozen=True)
class ModuleDecl:
    """A declared module, optionally assigned to a layer.

    ``interface_only`` modules require cross-module inbound edges to target
    public entities.
    """

    name: str
    layer: str | None = None
    interface_only: bool = False


@dataclass(frozen=True)
class RuleDecl:
    """An allow or forbid statement over a module pair."""

    id: str
    kind: str
    frm: str
    to: str

    @property
    def pattern(self) -> str:
        """The lockable pattern form of this rule, ``kind:from->to``."""
        return f"{self.kind}:{self.frm}->{self.to}"


@dataclass(frozen=True)
class PolicyConfig:
    """Fixed evaluation policy; only the version-1 values are accepted."""

    default_inter_module: str = "deny"
    layer_semantics: str = "strict_downward"
    cycle_check: bool = True


@dataclass(frozen=True)
class ArchitectureModel:
    modules: tuple[ModuleDecl, ...]
    layers: tuple[LayerDecl, ...]
    rules: tuple[RuleDecl, ...]
    policy: PolicyConfig = PolicyConfig()
    rule_locks: frozenset[str] = frozenset()

    def module_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.modules)

    def module(self, name: str) -> ModuleDecl:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def has_module(self, name: str) -> bool:
        return any(m.name == name for m in self.modules)

    def layer_rank(self, module_name: str) -> int | None:
        """Rank of the module's layer, or None if the module is unlayered."""
        m = self.module(module_name)
        if m.layer is None:
            return None
        for l in self.layers:
            if l.name == m.layer:
                return l.rank
        return None

    def rule(self, rule_id: str) -> RuleDecl:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)


@dataclass(frozen=True)
class Entity:
    """A code entity; ``module == ""`` means unmapped."""

    id: str
    module: str = ""
    public: bool = True


@dataclass(frozen=True)
class Dependency:
    frm: str
    to: str
    kind: str = "ref"
    weight: int = 1


@dataclass(frozen=True)
class ImplementationModel:
    entities: tuple[Entity, ...]
    dependencies: tuple[Dependency, ...]

    def entity(self, entity_id: str) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def has_entity(self, entity_id: str) -> bool:
        return any(e.id == entity_id for e in self.entities)

    def entity_module(self) -> dict[str, str]:
        return {e.id: e.module for e in self.entities}


@dataclass(frozen=True)
class SystemState:
    """The (architecture, implementation) tuple plus repair cost so far."""

    architecture: ArchitectureModel
    implementation: ImplementationModel
    accumulated_cost: float = 0.0

    def with_cost(self, extra: float) -> SystemState:
        return replace(self, accumulated_cost=self.accumulated_cost + extra)


# ---------------------------------------------------------------------------
# Document construction and validation
# ---------------------------------------------------------------------------


def _require_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise DocumentParseError(f"unknown key(s) {sorted(unknown)} in {where}")


def _require_str(obj: dict, key: str, where: str, default: str | None = None) -> str:
    if key not in obj:
        if default is not None:
            return default
        raise DocumentParseError(f"missing key '{key}' in {where}")
    value = obj[key]
    if not isinstance(value, str):
        raise DocumentParseError(f"key '{key}' in {where} must be a string")
    return value


def _require_bool(obj: dict, key: str, where: str, default: bool) -> bool:
    value = obj.get(key, default)
    if not isinstance(value, bool):
        raise DocumentParseError(f"key '{key}' in {where} must be a boolean")
    return value


def _require_int(obj: dict, key: str, where: str, default: int | None = None) -> int:
    if key not in obj:
        if default is not None:
            return default
        raise DocumentParseError(f"missing key '{key}' in {where}")
    value = obj[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise DocumentParseError(f"key '{key}' in {where} must be an integer")
    return value


def _parse_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentParseError("top-level document must be a JSON object")
    return doc


def _check_identifier(value: str, what: str) -> None:
    if not is_identifier(value):
        raise ModelValidationError(f"{what} '{value}' is not a valid identifier")


def architecture_from_doc(doc: dict) -> ArchitectureModel:
    """Build and validate an ArchitectureModel from a parsed document."""
    _require_keys(doc, {"modules", "layers", "rules", "policy", "rule_locks"}, "architecture document")

    layers = []
    for raw in doc.get("layers", []):
        if not isinstance(raw, dict):
            raise DocumentParseError("each layer must be an object")
        _require_keys(raw, {"name", "rank"}, "layer")
        layers.append(LayerDecl(name=_require_str(raw, "name", "layer"), rank=_require_int(raw, "rank", "layer")))

    modules = []
    for raw in doc.get("modules", []):
        if not isinstance(raw, dict):
            raise DocumentParseError("each module must be an object")
        _require_keys(raw, {"name", "layer", "interface_only"}, "module")
        layer = raw.get("layer")
        if layer is not None and not isinstance(layer, str):
            raise DocumentParseError("module 'layer' must be a string or null")
        modules.append(
            ModuleDecl(
                name=_require_str(raw, "name", "module"),
                layer=layer or None,
                interface_only=_require_bool(raw, "interface_only", "module", False),
            )
        )

    rules = []
    for raw in doc.get("rules", []):
        if not isinstance(raw, dict):
            raise DocumentParseError("each rule must be an object")
        _require_keys(raw, {"id", "kind", "from", "to"}, "rule")
        rules.append(
            RuleDecl(
                id=_require_str(raw, "id", "rule"),
                kind=_require_str(raw, "kind", "rule"),
                frm=_require_str(raw, "from", "rule"),
                to=_require_str(raw, "to", "rule"),
            )
        )

    raw_policy = doc.get("policy", {})
    if not isinstance(raw_policy, dict):
        raise DocumentParseError("'policy' must be an object")
    _require_keys(raw_policy, {"default_inter_module", "layer_semantics", "cycle_check"}, "policy")
    policy = PolicyConfig(
        default_inter_module=_require_str(raw_policy, "default_inter_module", "policy", "deny"),
        layer_semantics=_require_str(raw_policy, "layer_semantics", "policy", "strict_downward"),
        cycle_check=_require_bool(raw_policy, "cycle_check", "policy", True),
    )

    raw_locks = doc.get("rule_locks", [])
    if not isinstance(raw_locks, list) or not all(isinstance(x, str) for x in raw_locks):
        raise DocumentParseError("'rule_locks' must be a list of strings")

    model = ArchitectureModel(
        modules=tuple(modules),
        layers=tuple(layers),
        rules=tuple(rules),
        policy=policy,
        rule_locks=frozenset(raw_locks),
    )
    validate_architecture(model)
    return model


def validate_architecture(a: ArchitectureModel) -> None:
    """Raise ModelValidationError on the first broken invariant."""
    seen_layers: set[str] = set()
    for layer in a.layers:
        _check_identifier(layer.name, "layer name")
        if layer.name in seen_layers:
            raise ModelValidationError(f"duplicate layer name '{layer.name}'")
        seen_layers.add(layer.name)

    seen_modules: set[str] = set()
    for m in a.modules:
        if not m.name:
            raise ModelValidationError("module name must be non-empty")
        _check_identifier(m.name, "module name")
        if m.name in seen_modules:
            raise ModelValidationError(f"duplicate module name '{m.name}'")
        seen_modules.add(m.name)
        if m.layer is not None and m.layer not in seen_layers:
            raise ModelValidationError(f"module '{m.name}' references unknown layer '{m.layer}'")

    seen_rules: set[str] = set()
    for r in a.rules:
        _check_identifier(r.id, "rule id")
        if r.id in seen_rules:
            raise ModelValidationError(f"duplicate rule id '{r.id}'")
        seen_rules.add(r.id)
        if r.kind not in RULE_KINDS:
            raise ModelValidationError(f"rule '{r.id}' has unknown kind '{r.kind}'")
        if r.frm == r.to:
            raise ModelValidationError(f"rule '{r.id}' is a self-rule on module '{r.frm}'")
        for endpoint in (r.frm, r.to):
            if endpoint not in seen_modules:
                raise ModelValidationError(f"rule '{r.id}' references unknown module '{endpoint}'")

    if a.policy.default_inter_module != "deny":
        raise ModelValidationError(
            f"policy default_inter_module '{a.policy.default_inter_module}' is not supported (only 'deny')"
        )
    if a.policy.layer_semantics != "strict_downward":
        raise ModelValidationError(
            f"policy layer_semantics '{a.policy.layer_semantics}' is not supported (only 'strict_downward')"
        )

    for lock in a.rule_locks:
        if not LOCK_PATTERN_RE.match(lock):
            raise ModelValidationError(f"rule lock '{lock}' does not match '<kind>:<from>-><to>'")


def load_architecture(text: str) -> ArchitectureModel:
    """Parse and validate an architecture document."""
    return architecture_from_doc(_parse_json(text))


def implementation_from_doc(doc: dict) -> ImplementationModel:
    """Build and validate an ImplementationModel from a parsed document."""
    _require_keys(doc, {"entities", "dependencies"}, "facts document")

    entities = []
    for raw in doc.get("entities", []):
        if not isinstance(raw, dict):
            raise DocumentParseError("each entity must be an object")
        _require_keys(raw, {"id", "module", "public"}, "entity")
        entities.append(
            Entity(
                id=_require_str(raw, "id", "entity"),
                module=_require_str(raw, "module", "entity", ""),
                public=_require_bool(raw, "public", "entity", True),
            )
        )

    dependencies = []
    for raw in doc.get("dependencies", []):
        if not isinstance(raw, dict):
            raise DocumentParseError("each dependency must be an object")
        _require_keys(raw, {"from", "to", "kind", "weight"}, "dependency")
        dependencies.append(
            Dependency(
                frm=_require_str(raw, "from", "dependency"),
                to=_require_str(raw, "to", "dependency"),
                kind=_require_str(raw, "kind", "dependency", "ref"),
                weight=_require_int(raw, "weight", "dependency", 1),
            )
        )

    model = ImplementationModel(entities=tuple(entities), dependencies=tuple(dependencies))
    validate_implementation(model)
    return model


def validate_implementation(s: ImplementationModel) -> None:
    """Raise ModelValidationError on the first broken invariant."""
    seen: set[str] = set()
    for e in s.entities:
        _check_identifier(e.id, "entity id")
        if e.id in seen:
            raise ModelValidationError(f"duplicate entity id '{e.id}'")
        seen.add(e.id)
        if e.module and not is_identifier(e.module):
            raise ModelValidationError(f"entity '{e.id}' has invalid module name '{e.module}'")

    seen_pairs: set[tuple[str, str]] = set()
    for d in s.dependencies:
        for endpoint in (d.frm, d.to):
            if endpoint not in seen:
                raise ModelValidationError(f"dependency endpoint '{endpoint}' is not a declared entity")
        if d.frm == d.to:
            raise ModelValidationError(f"self-dependency on entity '{d.frm}'")
        if (d.frm, d.to) in seen_pairs:
            raise ModelValidationError(f"duplicate dependency '{d.frm}' -> '{d.to}'")
        seen_pairs.add((d.frm, d.to))
        if d.weight < 1:
            raise ModelValidationError(f"dependency '{d.frm}' -> '{d.to}' has weight {d.weight} < 1")


def load_implementation(text: str) -> ImplementationModel:
    """Parse and validate an implementation facts document."""
    return implementation_from_doc(_parse_json(text))


def validate_pairing(a: ArchitectureModel, s: ImplementationModel) -> list[str]:
    """Descriptive pairing issues; empty iff every mapped entity's module exists.

    Unmapped entities are not pairing issues (they surface as conformance
    violations instead).
    """
    declared = set(a.module_names())
    issues = []
    for e in s.entities:
        if e.module and e.module not in declared:
            issues.append(f"entity '{e.id}' is mapped to undeclared module '{e.module}'")
    return issues


def require_paired(a: ArchitectureModel, s: ImplementationModel) -> None:
    issues = validate_pairing(a, s)
    if issues:
        raise PairingError("; ".join(issues))


def validate_state(st: SystemState) -> None:
    validate_architecture(st.architecture)
    validate_implementation(st.implementation)
    require_paired(st.architecture, st.implementation)
    if st.accumulated_cost < 0:
        raise ModelValidationError("accumulated_cost must be non-negative")


# ---------------------------------------------------------------------------
# Canonical serialization and hashing
# ---------------------------------------------------------------------------


def architecture_doc(a: ArchitectureModel) -> dict:
    """The canonical document form of an architecture model."""
    return {
        "modules": [
            {"name": m.name, "layer": m.layer, "interface_only": m.interface_only}
            for m in sorted(a.modules, key=lambda m: m.name)
        ],
        "layers": [{"name": l.name, "rank": l.rank} for l in sorted(a.layers, key=lambda l: l.name)],
        "rules": [
            {"id": r.id, "kind": r.kind, "from": r.frm, "to": r.to}
            for r in sorted(a.rules, key=lambda r: r.id)
        ],
        "policy": {
            "default_inter_module": a.policy.default_inter_module,
            "layer_semantics": a.policy.layer_semantics,
            "cycle_check": a.policy.cycle_check,
        },
        "rule_locks": sorted(a.rule_locks),
    }


def implementation_doc(s: ImplementationModel) -> dict:
    """The canonical document form of an implementation model."""
    return {
        "entities": [
            {"id": e.id, "module": e.module, "public": e.public}
            for e in sorted(s.entities, key=lambda e: e.id)
        ],
        "dependencies": [
            {"from": d.frm, "to": d.to, "kind": d.kind, "weight": d.weight}
            for d in sorted(s.dependencies, key=lambda d: (d.frm, d.to))
        ],
    }


def canonical_json(doc) -> str:
    """Canonical text: sorted keys, no insignificant whitespace, trailing LF."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def serialize_architecture(a: ArchitectureModel) -> str:
    return canonical_json(architecture_doc(a))


def serialize_implementation(s: ImplementationModel) -> str:
    return canonical_json(implementation_doc(s))


def state_doc(st: SystemState) -> dict:
    """Hash input for a state; accumulated_cost is deliberately excluded."""
    return {
        "architecture": architecture_doc(st.architecture),
        "implementation": implementation_doc(st.implementation),
    }


def state_hash(st: SystemState) -> str:
    """SHA-256 hex digest of the canonical serialization of the (A, S) tuple."""
    return hashlib.sha256(canonical_json(state_doc(st)).encode("utf-8")).hexdigest()
