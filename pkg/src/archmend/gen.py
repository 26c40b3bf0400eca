"""Synthetic erosion cases: a conformant system, injected damage, and the cure.

Construction guarantees every invariant instead of sampling and hoping:

* The clean model's cross-module edges are drawn only from permitted module
  pairs that point forward along a hidden module ordering, so the clean
  model is conformant and its module graph acyclic by construction.
* Mutations are exact inverses of catalog verbs and touch disjoint entities:
  misplacing is restricted to entities whose edges all stay inside one
  module (so moving back is always generated as a candidate), illegal edges
  connect untouched entities over unpermitted pairs, and dropping an allow
  rule keeps the rule's edges in the eroded model while the clean model is
  the edge set still permitted afterwards.
* The recorded ground truth therefore provably consolidates the eroded
  model, and a depth-k search over generated candidates can always find a
  consolidating plan.

Randomness comes from a self-contained 64-bit linear congruential generator
(documented in docs/prng.md) so identical seeds give identical bytes on any
platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .conformance import check
from .errors import GenerationError
from .model import (
    ArchitectureModel,
    Dependency,
    Entity,
    ImplementationModel,
    LayerDecl,
    ModuleDecl,
    PolicyConfig,
    RuleDecl,
    SystemState,
    architecture_doc,
    canonical_json,
    implementation_doc,
)
from .repair import RepairAction, action_doc, apply_action, make_action

MUTATION_KINDS = ("misplace_entity", "add_illegal_edge", "drop_allow_rule")


class Lcg:
    """64-bit linear congruential generator, MMIX constants.

    state' = (state * 6364136223846793005 + 1442695040888963407) mod 2^64.
    randrange reduces the HIGH 32 bits: the low bits of a power-of-two LCG
    cycle with tiny periods, and reducing them modulo a small n makes
    consecutive draws correlated enough to starve rejection sampling.
    """

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return self.state

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs a positive bound")
        return (self.next_u64() >> 32) % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def weighted_choice(self, options: list[str], weights: dict[str, int]) -> str:
        total = sum(weights[o] for o in options)
        draw = self.randrange(total)
        for option in options:
            draw -= weights[option]
            if draw < 0:
                return option
        return options[-1]


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n_modules: int = 8
    n_layers: int = 3
    n_entities: int = 40
    edge_density: float = 1.5
    k_mutations: int = 2
    mutation_weights: dict[str, int] = field(
        default_factory=lambda: {k: 1 for k in MUTATION_KINDS}
    )

    def __post_init__(self) -> None:
        if self.seed < 0 or self.seed > Lcg.MASK:
            raise GenerationError("seed must fit in 64 unsigned bits")
        if min(self.n_modules, self.n_layers, self.n_entities) < 1 or self.edge_density <= 0:
            raise GenerationError("model size knobs must be positive")
        if self.k_mutations < 1:
            raise GenerationError("k_mutations must be at least 1")
        if set(self.mutation_weights) - set(MUTATION_KINDS):
            raise GenerationError("unknown mutation kind in mutation_weights")
        if sum(self.mutation_weights.values()) < 1 or any(
            w < 0 for w in self.mutation_weights.values()
        ):
            raise GenerationError("mutation weights must be non-negative with a positive sum")


@dataclass(frozen=True)
class ErosionCase:
    architecture: ArchitectureModel
    clean: ImplementationModel
    eroded: ImplementationModel
    ground_truth: tuple[RepairAction, ...]
    mutations: tuple[dict, ...]


def _permitted(
    pair: tuple[str, str],
    allows: set[tuple[str, str]],
    forbids: set[tuple[str, str]],
    rank: dict[str, int],
) -> bool:
    if pair in forbids:
        return False
    if pair in allows:
        return True
    return rank[pair[0]] > rank[pair[1]]


def generate(cfg: GenConfig) -> ErosionCase:
    """Deterministic erosion case for the seed; see the module docstring."""
    rng = Lcg(cfg.seed)

    layers = tuple(LayerDecl(name=f"l{i}", rank=i) for i in range(1, cfg.n_layers + 1))
    module_names = [f"m{i}" for i in range(1, cfg.n_modules + 1)]
    module_layer = {name: f"l{1 + rng.randrange(cfg.n_layers)}" for name in module_names}
    rank = {name: int(module_layer[name][1:]) for name in module_names}

    order = list(module_names)
    rng.shuffle(order)
    position = {name: i for i, name in enumerate(order)}

    forward_pairs = [
        (x, y)
        for x in module_names
        for y in module_names
        if x != y and position[x] < position[y]
    ]
    forward_pairs.sort()

    allow_candidates = [p for p in forward_pairs if rank[p[0]] <= rank[p[1]]]
    n_allows = min(max(1, cfg.n_modules // 3), len(allow_candidates))
    allows: set[tuple[str, str]] = set()
    pool = list(allow_candidates)
    for _ in range(n_allows):
        pick = pool.pop(rng.randrange(len(pool)))
        allows.add(pick)

    forbid_candidates = [p for p in forward_pairs if rank[p[0]] > rank[p[1]] and p not in allows]
    n_forbids = min(cfg.n_modules // 4, len(forbid_candidates))
    forbids: set[tuple[str, str]] = set()
    pool = list(forbid_candidates)
    for _ in range(n_forbids):
        pick = pool.pop(rng.randrange(len(pool)))
        forbids.add(pick)

    rules = []
    for i, (frm, to) in enumerate(sorted(allows), start=1):
        rules.append(RuleDecl(id=f"r{i}", kind="allow", frm=frm, to=to))
    for i, (frm, to) in enumerate(sorted(forbids), start=len(rules) + 1):
        rules.append(RuleDecl(id=f"r{i}", kind="forbid", frm=frm, to=to))

    base_architecture = ArchitectureModel(
        modules=tuple(ModuleDecl(name=n, layer=module_layer[n]) for n in module_names),
        layers=layers,
        rules=tuple(rules),
        policy=PolicyConfig(cycle_check=True),
        rule_locks=frozenset(),
    )

    entity_ids = [f"e{i}" for i in range(1, cfg.n_entities + 1)]
    entity_module = {eid: rng.choice(module_names) for eid in entity_ids}
    entities = tuple(Entity(id=eid, module=entity_module[eid], public=True) for eid in entity_ids)
    by_module: dict[str, list[str]] = {name: [] for name in module_names}
    for eid in entity_ids:
        by_module[entity_module[eid]].append(eid)

    edges: set[tuple[str, str]] = set()

    # Each allow rule gets one using edge so dropping it always erodes.
    for frm, to in sorted(allows):
        if by_module[frm] and by_module[to]:
            u = rng.choice(by_module[frm])
            v = rng.choice(by_module[to])
            if u != v:
                edges.add((u, v))

    target_edges = int(cfg.n_entities * cfg.edge_density + 0.5)
    attempts = 0
    while len(edges) < target_edges and attempts < 50 * target_edges:
        attempts += 1
        u = rng.choice(entity_ids)
        v = rng.choice(entity_ids)
        if u == v or (u, v) in edges:
            continue
        mu, mv = entity_module[u], entity_module[v]
        if mu != mv:
            if position[mu] >= position[mv]:
                continue
            if not _permitted((mu, mv), allows, forbids, rank):
                continue
        edges.add((u, v))
    if not edges:
        raise GenerationError("no permitted dependency could be sampled; config infeasible")

    base_edges = sorted(edges)
    outbound: dict[str, list[tuple[str, str]]] = {eid: [] for eid in entity_ids}
    incident: dict[str, list[tuple[str, str]]] = {eid: [] for eid in entity_ids}
    for u, v in base_edges:
        outbound[u].append((u, v))
        incident[u].append((u, v))
        incident[v].append((u, v))

    # Mutation state: permissions shrink as drops are chosen, never grow.
    current_allows = set(allows)
    touched: set[str] = set()
    dropped_rules: list[RuleDecl] = []
    illegal_edges: list[tuple[str, str]] = []
    moved: dict[str, str] = {}  # entity -> eroded module
    mutations: list[dict] = []
    ground_truth: list[RepairAction] = []

    def misplace_candidates() -> list[str]:
        # Edge partners must be untouched too: a partner that later moved
        # could silently legalize this entity's displaced edges.
        out = []
        for eid in entity_ids:
            if eid in touched or not outbound[eid]:
                continue
            home = entity_module[eid]
            partners_clean = True
            for a, b in incident[eid]:
                other = b if a == eid else a
                if entity_module[other] != home or other in touched:
                    partners_clean = False
                    break
            if partners_clean:
                out.append(eid)
        return out

    def misplace_targets(eid: str) -> list[str]:
        home = entity_module[eid]
        return [
            m
            for m in module_names
            if m != home and not _permitted((m, home), current_allows, forbids, rank)
        ]

    def drop_candidates() -> list[RuleDecl]:
        used_pairs = {(entity_module[u], entity_module[v]) for u, v in base_edges}
        return [
            r
            for r in rules
            if r.kind == "allow"
            and (r.frm, r.to) in current_allows
            and (r.frm, r.to) in used_pairs
        ]

    def illegal_candidates() -> list[tuple[str, str]]:
        out = []
        for u in entity_ids:
            if u in touched:
                continue
            for v in entity_ids:
                if v == u or v in touched or (u, v) in edges or (u, v) in illegal_edges:
                    continue
                mu, mv = entity_module[u], entity_module[v]
                if mu == mv:
                    continue
                if not _permitted((mu, mv), current_allows, forbids, rank):
                    out.append((u, v))
        return out

    for _ in range(cfg.k_mutations):
        kinds = [k for k in MUTATION_KINDS if cfg.mutation_weights.get(k, 0) > 0]
        applied = False
        while kinds and not applied:
            kind = rng.weighted_choice(kinds, cfg.mutation_weights)
            if kind == "misplace_entity":
                candidates = [e for e in misplace_candidates() if misplace_targets(e)]
                if candidates:
                    eid = rng.choice(sorted(candidates))
                    target = rng.choice(sorted(misplace_targets(eid)))
                    home = entity_module[eid]
                    moved[eid] = target
                    touched.add(eid)
                    for a, b in incident[eid]:
                        touched.add(b if a == eid else a)
                    mutations.append({"kind": kind, "entity": eid, "from": home, "to": target})
                    ground_truth.append(make_action("move_entity", entity=eid, target=home))
                    applied = True
                    continue
            elif kind == "drop_allow_rule":
                candidates = drop_candidates()
                if candidates:
                    rule = rng.choice(sorted(candidates, key=lambda r: r.id))
                    current_allows.discard((rule.frm, rule.to))
                    dropped_rules.append(rule)
                    mutations.append(
                        {"kind": kind, "rule_id": rule.id, "from": rule.frm, "to": rule.to}
                    )
                    ground_truth.append(
                        make_action("add_allow", **{"from": rule.frm, "to": rule.to})
                    )
                    applied = True
                    continue
            else:
                candidates = illegal_candidates()
                if candidates:
                    u, v = rng.choice(sorted(candidates))
                    illegal_edges.append((u, v))
                    touched.update((u, v))
                    mutations.append({"kind": kind, "from": u, "to": v})
                    ground_truth.append(make_action("delete_dependency", **{"from": u, "to": v}))
                    applied = True
                    continue
            kinds.remove(kind)
        if not applied:
            raise GenerationError("no feasible mutation remains; config infeasible")

    dropped_ids = {r.id for r in dropped_rules}
    dropped_pairs = {(r.frm, r.to) for r in dropped_rules}
    architecture = ArchitectureModel(
        modules=base_architecture.modules,
        layers=base_architecture.layers,
        rules=tuple(r for r in rules if r.id not in dropped_ids),
        policy=base_architecture.policy,
        rule_locks=base_architecture.rule_locks,
    )

    def still_permitted(u: str, v: str) -> bool:
        mu, mv = entity_module[u], entity_module[v]
        return mu == mv or (mu, mv) not in dropped_pairs

    clean = ImplementationModel(
        entities=entities,
        dependencies=tuple(
            Dependency(frm=u, to=v) for u, v in base_edges if still_permitted(u, v)
        ),
    )
    eroded = ImplementationModel(
        entities=tuple(
            Entity(id=e.id, module=moved.get(e.id, e.module), public=e.public) for e in entities
        ),
        dependencies=tuple(
            Dependency(frm=u, to=v) for u, v in base_edges + sorted(illegal_edges)
        ),
    )

    case = ErosionCase(
        architecture=architecture,
        clean=clean,
        eroded=eroded,
        ground_truth=tuple(ground_truth),
        mutations=tuple(mutations),
    )
    _verify(case)
    return case


def _verify(case: ErosionCase) -> None:
    if not check(case.architecture, case.clean).conformant:
        raise GenerationError("generated clean model is not conformant")
    if check(case.architecture, case.eroded).conformant:
        raise GenerationError("generated eroded model has no violations")
    state = SystemState(architecture=case.architecture, implementation=case.eroded)
    for act in case.ground_truth:
        state = apply_action(state, act)
    if not check(state.architecture, state.implementation).conformant:
        raise GenerationError("ground truth does not consolidate the eroded model")


def case_summary(case: ErosionCase) -> dict:
    vs = check(case.architecture, case.eroded)
    return {
        "modules": len(case.architecture.modules),
        "entities": len(case.eroded.entities),
        "dependencies": len(case.eroded.dependencies),
        "violations": vs.counts(),
        "mutations": list(case.mutations),
        "ground_truth": [a.id for a in case.ground_truth],
    }


def write_case_bundle(case: ErosionCase, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "architecture.json").write_text(
        canonical_json(architecture_doc(case.architecture)), encoding="utf-8"
    )
    (out / "clean.json").write_text(canonical_json(implementation_doc(case.clean)), encoding="utf-8")
    (out / "eroded.json").write_text(
        canonical_json(implementation_doc(case.eroded)), encoding="utf-8"
    )
    (out / "ground_truth.json").write_text(
        canonical_json([action_doc(a) for a in case.ground_truth]), encoding="utf-8"
    )
    (out / "summary.json").write_text(canonical_json(case_summary(case)), encoding="utf-8")
