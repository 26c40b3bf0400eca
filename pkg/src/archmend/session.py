"""Repair sessions: a versioned tree of states with a cursor and a decision log.

Nodes store only the action that produced them plus the resulting state hash,
violation count, and score; the state itself is always recomputed by
replaying the action path from the root models, so the replay invariant is
exercised on every read. Branches are never deleted: abandoned paths remain
in the tree and contribute evidence when the session is closed.

Closing a session emits knowledge events: one cause_offered per distinct
candidate signature ever shown, a cause_confirmed when a selected cause ends
consolidated, and one plan_outcome carrying the root-to-cursor verb sequence.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass
from typing import Callable

from .conformance import check
from .diagnosis import CauseCandidate, detect_patterns, rank_causes
from .errors import SessionStateError
from .kb import KnowledgeEvent
from .model import (
    ArchitectureModel,
    ImplementationModel,
    SystemState,
    architecture_doc,
    architecture_from_doc,
    implementation_doc,
    implementation_from_doc,
    state_hash,
    validate_state,
)
from .planner import SearchConfig, score_state
from .repair import RepairAction, action_doc, action_from_doc, apply_action

OUTCOMES = ("consolidated", "abandoned")

DECISION_KINDS = ("cause_selected", "step_applied", "backtracked", "cause_revised", "finished")


@dataclass(frozen=True)
class SessionNode:
    node_id: int
    parent: int | None
    action: RepairAction | None
    state_hash: str
    violation_count: int
    score: float


@dataclass(frozen=True)
class DecisionRecord:
    timestamp: float
    kind: str
    payload: dict


class Session:
    """One repair session; a single writer mutates it, reads see full state."""

    def __init__(
        self,
        architecture: ArchitectureModel,
        implementation: ImplementationModel,
        system_id: str,
        cfg: SearchConfig = SearchConfig(),
        session_id: str | None = None,
        clock: Callable[[], float] = time.time,
    ):
        root_state = SystemState(architecture=architecture, implementation=implementation)
        validate_state(root_state)
        self.session_id = session_id or str(uuid.uuid4())
        self.system_id = system_id
        self.cfg = cfg
        self.clock = clock
        self.root_architecture = architecture
        self.root_implementation = implementation
        self.outcome = "open"
        self.selected_cause = None  # FailurePattern of the chosen candidate
        self.decisions: list[DecisionRecord] = []
        self.emitted_events: list[KnowledgeEvent] = []
        self._offered: dict[str, str] = {}  # signature -> class_key
        self._diagnosed: dict[int, list[CauseCandidate]] = {}
        self._child_by_action: dict[tuple[int, str], int] = {}

        vs = check(architecture, implementation)
        root = SessionNode(
            node_id=1,
            parent=None,
            action=None,
            state_hash=state_hash(root_state),
            violation_count=len(vs.violations),
            score=score_state(root_state, cfg),
        )
        self.nodes: list[SessionNode] = [root]
        self.cursor = 1

    # -- queries ------------------------------------------------------------

    @property
    def already_consolidated(self) -> bool:
        return self.nodes[0].violation_count == 0

    def node(self, node_id: int) -> SessionNode:
        if 1 <= node_id <= len(self.nodes):
            return self.nodes[node_id - 1]
        raise SessionStateError(f"unknown node {node_id}")

    def path_to(self, node_id: int) -> list[SessionNode]:
        path = []
        current: int | None = node_id
        while current is not None:
            n = self.node(current)
            path.append(n)
            current = n.parent
        return list(reversed(path))

    def state_at(self, node_id: int) -> SystemState:
        """Replay the action path from the root models; never cached."""
        state = SystemState(
            architecture=self.root_architecture, implementation=self.root_implementation
        )
        for n in self.path_to(node_id)[1:]:
            assert n.action is not None
            state = apply_action(state, n.action, self.cfg.costs)
        return state

    def cursor_state(self) -> SystemState:
        return self.state_at(self.cursor)

    def verb_path(self, node_id: int) -> tuple[str, ...]:
        return tuple(n.action.verb for n in self.path_to(node_id)[1:] if n.action)

    def _is_descendant(self, node_id: int, ancestor: int) -> bool:
        current: int | None = node_id
        while current is not None:
            if current == ancestor:
                return True
            current = self.node(current).parent
        return False

    # -- mutations ----------------------------------------------------------

    def _require_open(self) -> None:
        if self.outcome != "open":
            raise SessionStateError(f"session is closed with outcome '{self.outcome}'")

    def _record(self, kind: str, payload: dict) -> None:
        self.decisions.append(DecisionRecord(timestamp=self.clock(), kind=kind, payload=payload))

    def diagnose(self, kb) -> list[CauseCandidate]:
        """Rank causes for the cursor state; remembers what was shown."""
        state = self.cursor_state()
        vs = check(state.architecture, state.implementation)
        patterns = detect_patterns(vs, state.architecture, state.implementation)
        candidates = rank_causes(patterns, kb, self.system_id)
        self._diagnosed[self.cursor] = candidates
        for c in candidates:
            self._offered.setdefault(c.pattern.signature, c.pattern.class_key)
        return candidates

    def select_cause(self, candidate_id: int) -> None:
        self._require_open()
        candidates = self._diagnosed.get(self.cursor)
        if candidates is None:
            raise SessionStateError("no diagnosis has been computed for the current node")
        match = next((c for c in candidates if c.id == candidate_id), None)
        if match is None:
            raise SessionStateError(f"unknown cause candidate id {candidate_id}")
        kind = "cause_revised" if self.selected_cause is not None else "cause_selected"
        self.selected_cause = match.pattern
        self._record(kind, {"candidate_id": candidate_id, "signature": match.pattern.signature})

    def apply_step(self, action: RepairAction) -> SessionNode:
        """Apply an action at the cursor, creating (or revisiting) a child node."""
        self._require_open()
        existing = self._child_by_action.get((self.cursor, action.id))
        if existing is not None:
            self.cursor = existing
            node = self.node(existing)
            self._record("step_applied", {"action": action.id, "node": existing, "revisited": True})
            return node

        new_state = apply_action(self.cursor_state(), action, self.cfg.costs)
        vs = check(new_state.architecture, new_state.implementation)
        node = SessionNode(
            node_id=len(self.nodes) + 1,
            parent=self.cursor,
            action=action,
            state_hash=state_hash(new_state),
            violation_count=len(vs.violations),
            score=score_state(new_state, self.cfg),
        )
        self.nodes.append(node)
        self._child_by_action[(self.cursor, action.id)] = node.node_id
        self.cursor = node.node_id
        self._record("step_applied", {"action": action.id, "node": node.node_id, "revisited": False})
        return node

    def goto(self, node_id: int) -> None:
        self._require_open()
        target = self.node(node_id)
        if target.node_id == self.cursor:
            return
        backtrack = not self._is_descendant(target.node_id, self.cursor)
        origin = self.cursor
        self.cursor = target.node_id
        if backtrack:
            self._record("backtracked", {"from": origin, "to": target.node_id})

    def finish(self, outcome: str) -> list[KnowledgeEvent]:
        self._require_open()
        if outcome not in OUTCOMES:
            raise SessionStateError(f"unknown outcome '{outcome}'")
        cursor_node = self.node(self.cursor)
        if outcome == "consolidated" and cursor_node.violation_count != 0:
            raise SessionStateError(
                f"cannot finish consolidated: {cursor_node.violation_count} violation(s) remain"
            )
        now = self.clock()
        events = [
            KnowledgeEvent(
                timestamp=now, system_id=self.system_id, kind="cause_offered", class_key=class_key
            )
            for _, class_key in sorted(self._offered.items())
        ]
        if self.selected_cause is not None and outcome == "consolidated":
            events.append(
                KnowledgeEvent(
                    timestamp=now,
                    system_id=self.system_id,
                    kind="cause_confirmed",
                    class_key=self.selected_cause.class_key,
                )
            )
        events.append(
            KnowledgeEvent(
                timestamp=now,
                system_id=self.system_id,
                kind="plan_outcome",
                class_key=self.selected_cause.class_key if self.selected_cause else "",
                verb_sequence=self.verb_path(self.cursor),
                outcome=outcome,
            )
        )
        self.outcome = outcome
        self.emitted_events = events
        self._record("finished", {"outcome": outcome})
        return events


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def node_doc(n: SessionNode) -> dict:
    return {
        "node_id": n.node_id,
        "parent": n.parent,
        "action": action_doc(n.action) if n.action else None,
        "state_hash": n.state_hash,
        "violation_count": n.violation_count,
        "score": n.score,
    }


def tree_doc(t: Session) -> dict:
    return {
        "session_id": t.session_id,
        "system_id": t.system_id,
        "cursor": t.cursor,
        "outcome": t.outcome,
        "already_consolidated": t.already_consolidated,
        "selected_cause": t.selected_cause.signature if t.selected_cause else None,
        "nodes": [node_doc(n) for n in t.nodes],
    }


def export_log(t: Session) -> dict:
    from .kb import event_doc

    return {
        "session_id": t.session_id,
        "system_id": t.system_id,
        "outcome": t.outcome,
        "cursor": t.cursor,
        "selected_cause": (
            {"signature": t.selected_cause.signature, "class_key": t.selected_cause.class_key}
            if t.selected_cause
            else None
        ),
        "offered": dict(sorted(t._offered.items())),
        "architecture": architecture_doc(t.root_architecture),
        "implementation": implementation_doc(t.root_implementation),
        "nodes": [node_doc(n) for n in t.nodes],
        "decisions": [
            {"timestamp": d.timestamp, "kind": d.kind, "payload": d.payload} for d in t.decisions
        ],
        "events": [event_doc(e) for e in t.emitted_events],
    }


def replay_log(doc: dict, cfg: SearchConfig = SearchConfig()) -> Session:
    """Rebuild a session from an exported log, verifying every stored hash.

    The tree is reconstructed by actually re-applying every recorded action;
    any divergence between a replayed hash and the stored one fails loudly.
    The exported decision log, offered-candidate record, and outcome are
    restored verbatim; a selected cause is not (re-select after import).
    """
    from .kb import event_from_doc

    architecture = architecture_from_doc(doc["architecture"])
    implementation = implementation_from_doc(doc["implementation"])
    session = Session(
        architecture,
        implementation,
        system_id=doc["system_id"],
        cfg=cfg,
        session_id=doc["session_id"],
    )
    root_doc = doc["nodes"][0]
    if session.nodes[0].state_hash != root_doc["state_hash"]:
        raise SessionStateError("replayed root hash does not match the stored hash")
    for raw in doc["nodes"][1:]:
        action = action_from_doc(raw["action"])
        session.goto(raw["parent"])
        node = session.apply_step(action)
        if node.node_id != raw["node_id"]:
            raise SessionStateError(
                f"replayed node id {node.node_id} does not match stored id {raw['node_id']}"
            )
        if node.state_hash != raw["state_hash"]:
            raise SessionStateError(
                f"replayed hash for node {raw['node_id']} does not match the stored hash"
            )
    session.cursor = doc["cursor"]
    session.decisions = [
        DecisionRecord(timestamp=d["timestamp"], kind=d["kind"], payload=dict(d["payload"]))
        for d in doc["decisions"]
    ]
    session._offered = dict(doc.get("offered", {}))
    session.emitted_events = [event_from_doc(e) for e in doc.get("events", [])]
    session.outcome = doc["outcome"]
    return session
