"""Brute-force reference evaluators the fast paths must agree with exactly.

Everything here is written straight from the documented semantics with no
regard for speed and no reuse of the production traversal code, so a bug
would have to be made twice, independently, to go unnoticed.
"""

from __future__ import annotations

from archmend.conformance import check
from archmend.planner import SearchConfig, score_state
from archmend.repair import applicable_actions, apply_action


def brute_force_cycles(graph: dict[str, set[str]]) -> list[str]:
    """Every elementary cycle, found the naive way: walk all simple paths
    from every node and close the loop whenever the walk returns to its
    origin. Each cycle is discovered once per rotation; the canonical form
    (rotated to the smallest module) dedupes them."""
    found: set[str] = set()

    def extend(path: list[str], seen: set[str]) -> None:
        for nxt in graph.get(path[-1], ()):
            if nxt == path[0]:
                pivot = path.index(min(path))
                rotated = path[pivot:] + path[:pivot]
                found.add("->".join(rotated + [rotated[0]]))
            elif nxt not in seen:
                extend(path + [nxt], seen | {nxt})

    for node in list(graph):
        extend([node], {node})
    return sorted(found)


def brute_force_violation_ids(a, s) -> list[str]:
    """Sorted violation ids for the pair, computed by literal restatement of
    the classification rules."""
    module_of = {e.id: e.module for e in s.entities}
    public = {e.id: e.public for e in s.entities}
    layer_of = {m.name: m.layer for m in a.modules}
    iface = {m.name: m.interface_only for m in a.modules}
    rank = {l.name: l.rank for l in a.layers}

    ids = [f"unmapped_entity:{e.id}" for e in s.entities if not e.module]
    unmapped = {e.id for e in s.entities if not e.module}

    allows: set[tuple[str, str]] = set()
    forbidden_pairs: set[tuple[str, str]] = set()
    for r in a.rules:
        if r.kind == "allow":
            allows.add((r.frm, r.to))
        else:
            forbidden_pairs.add((r.frm, r.to))

    module_edges: dict[str, set[str]] = {}
    for d in s.dependencies:
        if d.frm in unmapped or d.to in unmapped:
            continue
        mf, mt = module_of[d.frm], module_of[d.to]
        if mf == mt:
            continue
        edge = f"{d.frm}->{d.to}"
        if (mf, mt) in forbidden_pairs:
            ids.append(f"forbidden_dependency:{edge}")
        elif (mf, mt) in allows:
            pass
        elif layer_of[mf] is not None and layer_of[mt] is not None:
            if rank[layer_of[mf]] <= rank[layer_of[mt]]:
                ids.append(f"layer_violation:{edge}")
        else:
            ids.append(f"unsanctioned_dependency:{edge}")
        if iface[mt] and not public[d.to]:
            ids.append(f"non_interface_access:{edge}")
        module_edges.setdefault(mf, set()).add(mt)

    if a.policy.cycle_check:
        ids += [f"module_cycle:{c}" for c in brute_force_cycles(module_edges)]
    return sorted(ids)


def naive_exhaustive(st, scope, cfg: SearchConfig) -> tuple[float, int, tuple[str, ...]]:
    """Unpruned depth-first enumeration of every action sequence up to
    max_depth; returns the best (score, length, action-id sequence) key.
    Shares the action/apply/score primitives with the planner on purpose:
    what it cross-checks is the pruning, not the action semantics."""
    best: list[tuple[float, int, tuple[str, ...]]] = []

    def visit(state, ids: tuple[str, ...], depth: int) -> None:
        vs = check(state.architecture, state.implementation)
        key = (score_state(state, cfg), len(ids), ids)
        if not best or key < best[0]:
            best[:] = [key]
        if vs.conformant or depth == cfg.max_depth:
            return
        source = scope if depth == 0 else vs
        for act in applicable_actions(state, source, cfg.costs):
            visit(apply_action(state, act, cfg.costs), ids + (act.id,), depth + 1)

    visit(st, (), 0)
    return best[0]
