"""Repair-plan search over the joint (architecture, implementation) space.

The objective is score_state = factor * weighted violation count plus the
accumulated repair cost; lower is better and zero means consolidated at zero
cost. Three strategies share candidate generation:

* plan_exhaustive enumerates every action sequence up to the depth limit
  (depth-first, with sound cost-bound pruning) and is the oracle.
* plan_beam keeps the W best states per level but never discards a state
  merely for scoring worse than its parent, so repairs that get worse before
  getting better stay reachable.
* plan_greedy always takes the single best improving step and serves as the
  baseline the beam is measured against.

A knowledge handle can bias the beam's exploration order (never the scores).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .conformance import ViolationSet, check
from .errors import ResourceLimitError
from .model import SystemState, state_hash
from .repair import (
    CostConfig,
    RepairAction,
    action_cost,
    action_doc,
    applicable_actions,
    apply_action,
)

DEFAULT_VIOLATION_WEIGHTS = {"forbidden_dependency": 2.0, "module_cycle": 2.0}


@dataclass(frozen=True)
class SearchConfig:
    beam_width: int = 8
    max_depth: int = 4
    max_expansions: int = 20000
    costs: CostConfig = CostConfig()
    violation_factor: float = 10.0
    violation_weights: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_VIOLATION_WEIGHTS)
    )

    def __post_init__(self) -> None:
        if self.beam_width < 1 or self.max_depth < 1 or self.max_expansions < 1:
            raise ValueError("beam_width, max_depth, and max_expansions must be >= 1")
        if self.violation_factor <= 0 or any(w <= 0 for w in self.violation_weights.values()):
            raise ValueError("violation factor and weights must be positive")

    def weight(self, kind: str) -> float:
        return self.violation_weights.get(kind, 1.0)


@dataclass(frozen=True)
class RepairPlan:
    actions: tuple[RepairAction, ...]
    final_score: float
    final_violations: int
    consolidating: bool
    provenance: str
    step_scores: tuple[float, ...]

    def action_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.actions)

    def verbs(self) -> tuple[str, ...]:
        return tuple(a.verb for a in self.actions)


def _violation_score(vs: ViolationSet, cfg: SearchConfig) -> float:
    return cfg.violation_factor * sum(cfg.weight(v.kind) for v in vs.violations)


def score_state(st: SystemState, cfg: SearchConfig = SearchConfig()) -> float:
    return _violation_score(check(st.architecture, st.implementation), cfg) + st.accumulated_cost


class _Search:
    """Shared bookkeeping: cached conformance checks and an expansion budget."""

    def __init__(self, cfg: SearchConfig):
        self.cfg = cfg
        self.expansions = 0
        self._memo: dict[str, ViolationSet] = {}

    def violations(self, st: SystemState, h: str) -> ViolationSet:
        if h not in self._memo:
            self._memo[h] = check(st.architecture, st.implementation)
        return self._memo[h]

    def score(self, st: SystemState, h: str) -> float:
        return _violation_score(self.violations(st, h), self.cfg) + st.accumulated_cost

    def expand(self, st: SystemState, act: RepairAction) -> SystemState:
        self.expansions += 1
        if self.expansions > self.cfg.max_expansions:
            raise ResourceLimitError(
                f"search exceeded the expansion budget of {self.cfg.max_expansions}",
                count=self.expansions,
            )
        return apply_action(st, act, self.cfg.costs)

    def candidates(self, st: SystemState, h: str, scope, depth: int) -> list[RepairAction]:
        if depth == 0:
            return applicable_actions(st, scope, self.cfg.costs)
        return applicable_actions(st, self.violations(st, h), self.cfg.costs)


@dataclass
class _Node:
    # h carries state_hash(state); every state is hashed exactly once, at the
    # expansion that created it, and reused for memoization and deduping.
    state: SystemState
    actions: tuple[RepairAction, ...]
    step_scores: tuple[float, ...]
    h: str

    def ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.actions)


def _plan_from_node(node: _Node, search: _Search, provenance: str) -> RepairPlan:
    vs = search.violations(node.state, node.h)
    return RepairPlan(
        actions=node.actions,
        final_score=search.score(node.state, node.h),
        final_violations=len(vs.violations),
        consolidating=vs.conformant,
        provenance=provenance,
        step_scores=node.step_scores,
    )


def plan_from_actions(
    st: SystemState,
    actions: list[RepairAction],
    cfg: SearchConfig = SearchConfig(),
    provenance: str = "template",
) -> RepairPlan:
    """Replay a fixed action sequence into a scored plan."""
    search = _Search(cfg)
    state, h = st, state_hash(st)
    step_scores = []
    for act in actions:
        state = apply_action(state, act, cfg.costs)
        h = state_hash(state)
        step_scores.append(search.score(state, h))
    node = _Node(state=state, actions=tuple(actions), step_scores=tuple(step_scores), h=h)
    return _plan_from_node(node, search, provenance)


def plan_exhaustive(st: SystemState, scope, cfg: SearchConfig = SearchConfig()) -> RepairPlan:
    """Minimum-score plan over all sequences up to max_depth (the oracle).

    Ties break toward shorter plans, then the lexicographically smallest
    action-id sequence. Raises a resource error when the expansion budget is
    exceeded.

    Three sound prunings keep the enumeration honest but affordable:
    repeated state hashes along one path are cut (cost only grows); a branch
    whose sunk cost already exceeds the best known score is cut before the
    child is even built (score >= cost, and an equal-cost candidate can still
    win a tie on length or ids, so the pre-expansion filter is strict); and a
    state reached again at the same depth at equal or higher cost is cut.
    Children are explored in action-id order, so the first visit of a
    duplicate also carries the lexicographically smallest prefix and the
    transposition cut never changes the tie-break winner.
    """
    search = _Search(cfg)
    best_key: tuple[float, int, tuple[str, ...]] | None = None
    best_node: _Node | None = None
    visited: dict[tuple[str, int], float] = {}

    def consider(node: _Node) -> None:
        nonlocal best_key, best_node
        key = (search.score(node.state, node.h), len(node.actions), node.ids())
        if best_key is None or key < best_key:
            best_key, best_node = key, node

    def recurse(node: _Node, path_hashes: frozenset[str], depth: int) -> None:
        if best_key is not None and node.state.accumulated_cost > best_key[0]:
            return
        consider(node)
        if depth >= cfg.max_depth or search.violations(node.state, node.h).conformant:
            return
        assert best_key is not None
        if node.state.accumulated_cost >= best_key[0]:
            return
        candidates = sorted(search.candidates(node.state, node.h, scope, depth), key=lambda a: a.id)
        for act in candidates:
            if node.state.accumulated_cost + action_cost(act, cfg.costs) > best_key[0]:
                continue
            child_state = search.expand(node.state, act)
            h = state_hash(child_state)
            if h in path_hashes:
                continue
            seen_cost = visited.get((h, depth + 1))
            if seen_cost is not None and seen_cost <= child_state.accumulated_cost:
                continue
            visited[(h, depth + 1)] = child_state.accumulated_cost
            child = _Node(
                state=child_state,
                actions=node.actions + (act,),
                step_scores=node.step_scores + (search.score(child_state, h),),
                h=h,
            )
            recurse(child, path_hashes | {h}, depth + 1)

    root_hash = state_hash(st)
    root = _Node(state=st, actions=(), step_scores=(), h=root_hash)
    recurse(root, frozenset({root_hash}), 0)
    assert best_node is not None
    return _plan_from_node(best_node, search, "exhaustive")


def _dedupe_cheapest(nodes: list[_Node]) -> list[_Node]:
    """One node per end-state hash: lowest cost, then shortest, then lex ids."""
    by_hash: dict[str, _Node] = {}
    for node in nodes:
        held = by_hash.get(node.h)
        if held is None:
            by_hash[node.h] = node
            continue
        if (node.state.accumulated_cost, len(node.actions), node.ids()) < (
            held.state.accumulated_cost,
            len(held.actions),
            held.ids(),
        ):
            by_hash[node.h] = node
    return list(by_hash.values())


def plan_beam(
    st: SystemState,
    scope,
    cfg: SearchConfig = SearchConfig(),
    kb=None,
    system_id: str = "",
) -> list[RepairPlan]:
    """Beam search returning up to beam_width distinct end plans.

    Each level keeps the beam_width lowest-score states; states scoring worse
    than their parent are eligible, so degrade-then-recover paths survive.
    Already-consolidated states ride along unexpanded. Every state ever
    selected into a beam is a candidate end plan; candidates deduplicate by
    end-state hash (cheapest wins) and sort by (consolidating desc,
    final_score asc, action-id sequence asc).

    When the scope is a selected cause and a knowledge handle is given,
    candidate paths whose verb sequence scores above 0.5 for the cause's
    class are preferred at equal state score (exploration bias only).
    """
    search = _Search(cfg)
    kb_class = scope.pattern.class_key if hasattr(scope, "pattern") else None

    def kb_bias(node: _Node) -> int:
        if kb is None or kb_class is None:
            return 1
        preference = kb.plan_score(kb_class, [a.verb for a in node.actions], system_id)
        return 0 if preference > 0.5 else 1

    root = _Node(state=st, actions=(), step_scores=(), h=state_hash(st))
    beam = [root]
    candidates = [root]

    for depth in range(cfg.max_depth):
        if all(search.violations(node.state, node.h).conformant for node in beam):
            break
        pool: list[_Node] = []
        for node in beam:
            if search.violations(node.state, node.h).conformant:
                pool.append(node)
                continue
            for act in search.candidates(node.state, node.h, scope, depth):
                child_state = search.expand(node.state, act)
                h = state_hash(child_state)
                pool.append(
                    _Node(
                        state=child_state,
                        actions=node.actions + (act,),
                        step_scores=node.step_scores + (search.score(child_state, h),),
                        h=h,
                    )
                )
        pool = _dedupe_cheapest(pool)
        if not pool:
            break
        pool.sort(key=lambda node: (search.score(node.state, node.h), kb_bias(node), node.ids()))
        beam = pool[: cfg.beam_width]
        candidates.extend(node for node in beam if node is not root)

    plans = [_plan_from_node(node, search, "beam") for node in _dedupe_cheapest(candidates)]
    plans.sort(key=lambda p: (0 if p.consolidating else 1, p.final_score, p.action_ids()))
    return plans[: cfg.beam_width]


def plan_greedy(st: SystemState, scope, cfg: SearchConfig = SearchConfig()) -> RepairPlan:
    """Repeatedly take the single lowest-score step while it improves.

    Stops at the first consolidated state or when no candidate scores below
    the current state. Termination is guaranteed because the score strictly
    decreases while the cost component strictly increases.
    """
    search = _Search(cfg)
    node = _Node(state=st, actions=(), step_scores=(), h=state_hash(st))
    depth = 0
    while not search.violations(node.state, node.h).conformant:
        current_score = search.score(node.state, node.h)
        best_child: _Node | None = None
        best_key: tuple[float, tuple[str, ...]] | None = None
        for act in search.candidates(node.state, node.h, scope, depth):
            child_state = search.expand(node.state, act)
            h = state_hash(child_state)
            child = _Node(
                state=child_state,
                actions=node.actions + (act,),
                step_scores=node.step_scores + (search.score(child_state, h),),
                h=h,
            )
            key = (search.score(child_state, h), child.ids())
            if best_key is None or key < best_key:
                best_key, best_child = key, child
        if best_child is None or best_key is None or best_key[0] >= current_score:
            break
        node = best_child
        depth += 1
    return _plan_from_node(node, search, "greedy")


def rank_plans(plans: list[RepairPlan], cause, kb, system_id: str) -> list[RepairPlan]:
    """Stable re-sort by (consolidating, learned template score, final score).

    ``cause`` may be None (template scores then use the empty class, which an
    empty store maps to 0.5 for every sequence, leaving the order unchanged).
    """
    class_key = cause.pattern.class_key if cause is not None else ""

    def template_score(p: RepairPlan) -> float:
        return kb.plan_score(class_key, list(p.verbs()), system_id)

    return sorted(
        plans,
        key=lambda p: (0 if p.consolidating else 1, -template_score(p), p.final_score),
    )


def plan_doc(p: RepairPlan) -> dict:
    return {
        "actions": [action_doc(a) for a in p.actions],
        "final_score": p.final_score,
        "final_violations": p.final_violations,
        "consolidating": p.consolidating,
        "provenance": p.provenance,
        "step_scores": list(p.step_scores),
    }


def plans_doc(plans: list[RepairPlan]) -> list[dict]:
    return [plan_doc(p) for p in plans]
