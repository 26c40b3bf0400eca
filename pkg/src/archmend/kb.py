"""Knowledge base: append-only decision log and the smoothed scores over it.

Three event kinds are recorded: cause_offered (a candidate was shown),
cause_confirmed (the engineer's selected cause closed a consolidated
session), and plan_outcome (a root-to-cursor verb sequence finished with an
outcome). Scores are Laplace-smoothed rates (x+1)/(total+2), blended 0.7
system-specific and 0.3 generic. The generic layer aggregates all systems
and falls back to a prior table when a class has no events at all, so fresh
stores still rank sensibly.

Storage is one JSON object per line (LF); every score is recomputable from
the log alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import KnowledgeStoreError

EVENT_KINDS = ("cause_offered", "cause_confirmed", "plan_outcome")
OUTCOMES = ("consolidated", "abandoned")

SYSTEM_SHARE = 0.7
GENERIC_SHARE = 0.3
PLAN_PRIOR = 0.5
DEFAULT_CAUSE_PRIOR = 0.5


@dataclass(frozen=True)
class KnowledgeEvent:
    timestamp: float
    system_id: str
    kind: str
    class_key: str
    verb_sequence: tuple[str, ...] | None = None
    outcome: str | None = None


def validate_event(e: KnowledgeEvent) -> None:
    if e.kind not in EVENT_KINDS:
        raise KnowledgeStoreError(f"unknown event kind '{e.kind}'")
    if not e.system_id:
        raise KnowledgeStoreError("event system_id must be non-empty")
    if e.kind == "plan_outcome":
        if e.verb_sequence is None or e.outcome not in OUTCOMES:
            raise KnowledgeStoreError("plan_outcome events need verb_sequence and a valid outcome")
    else:
        if e.verb_sequence is not None or e.outcome is not None:
            raise KnowledgeStoreError(f"{e.kind} events carry neither verb_sequence nor outcome")


def event_doc(e: KnowledgeEvent) -> dict:
    return {
        "timestamp": e.timestamp,
        "system_id": e.system_id,
        "kind": e.kind,
        "class_key": e.class_key,
        "verb_sequence": list(e.verb_sequence) if e.verb_sequence is not None else None,
        "outcome": e.outcome,
    }


def event_from_doc(doc: dict) -> KnowledgeEvent:
    if not isinstance(doc, dict):
        raise KnowledgeStoreError("event must be a JSON object")
    unknown = set(doc) - {"timestamp", "system_id", "kind", "class_key", "verb_sequence", "outcome"}
    if unknown:
        raise KnowledgeStoreError(f"unknown event key(s) {sorted(unknown)}")
    verbs = doc.get("verb_sequence")
    event = KnowledgeEvent(
        timestamp=float(doc.get("timestamp", 0.0)),
        system_id=str(doc.get("system_id", "")),
        kind=str(doc.get("kind", "")),
        class_key=str(doc.get("class_key", "")),
        verb_sequence=tuple(verbs) if verbs is not None else None,
        outcome=doc.get("outcome"),
    )
    validate_event(event)
    return event


def _laplace(hits: int, total: int) -> float:
    return (hits + 1) / (total + 2)


def builtin_priors() -> dict[str, float]:
    text = resources.files("archmend").joinpath("data/priors.json").read_text(encoding="utf-8")
    return {str(k): float(v) for k, v in json.loads(text).items()}


class Snapshot:
    """Immutable read view: events plus the prior table, with score queries."""

    def __init__(self, events: tuple[KnowledgeEvent, ...], priors: dict[str, float]):
        self.events = tuple(events)
        self.priors = dict(priors)
        self._cause: dict[tuple[str, str], list[int]] = {}
        self._plan: dict[tuple[str, str, tuple[str, ...]], list[int]] = {}
        for e in self.events:
            if e.kind == "cause_offered":
                self._cause.setdefault((e.system_id, e.class_key), [0, 0])[0] += 1
            elif e.kind == "cause_confirmed":
                self._cause.setdefault((e.system_id, e.class_key), [0, 0])[1] += 1
            else:
                assert e.verb_sequence is not None
                row = self._plan.setdefault((e.system_id, e.class_key, e.verb_sequence), [0, 0])
                row[0] += 1
                if e.outcome == "consolidated":
                    row[1] += 1

    def _cause_counts(self, class_key: str, system_id: str | None) -> tuple[int, int]:
        offered = confirmed = 0
        for (sys, key), (n, c) in self._cause.items():
            if key == class_key and (system_id is None or sys == system_id):
                offered += n
                confirmed += c
        return offered, confirmed

    def _plan_counts(self, class_key: str, verbs: tuple[str, ...], system_id: str | None) -> tuple[int, int]:
        attempts = successes = 0
        for (sys, key, seq), (m, k) in self._plan.items():
            if key == class_key and seq == verbs and (system_id is None or sys == system_id):
                attempts += m
                successes += k
        return attempts, successes

    def cause_prior(self, cause_kind: str) -> float:
        return self.priors.get(cause_kind, DEFAULT_CAUSE_PRIOR)

    def cause_score(self, class_key: str, cause_kind: str, system_id: str) -> float:
        n_sys, c_sys = self._cause_counts(class_key, system_id)
        n_all, c_all = self._cause_counts(class_key, None)
        s_system = _laplace(c_sys, n_sys)
        s_generic = _laplace(c_all, n_all) if (n_all or c_all) else self.cause_prior(cause_kind)
        return SYSTEM_SHARE * s_system + GENERIC_SHARE * s_generic

    def plan_score(self, class_key: str, verb_sequence: list[str] | tuple[str, ...], system_id: str) -> float:
        verbs = tuple(verb_sequence)
        m_sys, k_sys = self._plan_counts(class_key, verbs, system_id)
        m_all, k_all = self._plan_counts(class_key, verbs, None)
        s_system = _laplace(k_sys, m_sys)
        s_generic = _laplace(k_all, m_all) if (m_all or k_all) else PLAN_PRIOR
        return SYSTEM_SHARE * s_system + GENERIC_SHARE * s_generic

    def doc(self) -> dict:
        return {
            "events": [event_doc(e) for e in self.events],
            "priors": dict(sorted(self.priors.items())),
        }

    def stats_doc(self) -> dict:
        """Score tables for reporting: one row per observed key and system."""
        causes = []
        for sys, key in sorted(self._cause):
            n_sys, c_sys = self._cause[(sys, key)]
            cause_kind = key.split("/", 1)[0]
            causes.append(
                {
                    "class_key": key,
                    "system_id": sys,
                    "offered": n_sys,
                    "confirmed": c_sys,
                    "system_score": _laplace(c_sys, n_sys),
                    "blended": self.cause_score(key, cause_kind, sys),
                }
            )
        plans = []
        for sys, key, verbs in sorted(self._plan):
            m_sys, k_sys = self._plan[(sys, key, verbs)]
            plans.append(
                {
                    "class_key": key,
                    "system_id": sys,
                    "verbs": list(verbs),
                    "attempts": m_sys,
                    "successes": k_sys,
                    "system_score": _laplace(k_sys, m_sys),
                    "blended": self.plan_score(key, verbs, sys),
                }
            )
        return {
            "event_count": len(self.events),
            "causes": causes,
            "plans": plans,
            "priors": dict(sorted(self.priors.items())),
        }


def load_snapshot(doc: dict) -> Snapshot:
    if not isinstance(doc, dict) or set(doc) - {"events", "priors"}:
        raise KnowledgeStoreError("snapshot document must hold only 'events' and 'priors'")
    events = tuple(event_from_doc(raw) for raw in doc.get("events", []))
    priors = {str(k): float(v) for k, v in doc.get("priors", {}).items()}
    return Snapshot(events, priors)


class KnowledgeStore:
    """Event log under one directory: events.jsonl plus an optional priors.json."""

    def __init__(self, kb_dir: str | Path):
        self.kb_dir = Path(kb_dir)
        self.events_path = self.kb_dir / "events.jsonl"

    def priors(self) -> dict[str, float]:
        override = self.kb_dir / "priors.json"
        if override.exists():
            try:
                raw = json.loads(override.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise KnowledgeStoreError(f"cannot read priors override: {exc}") from exc
            return {str(k): float(v) for k, v in raw.items()}
        return builtin_priors()

    def read_events(self) -> tuple[KnowledgeEvent, ...]:
        if not self.events_path.exists():
            return ()
        events = []
        with self.events_path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    events.append(event_from_doc(json.loads(line)))
                except (json.JSONDecodeError, KnowledgeStoreError) as exc:
                    raise KnowledgeStoreError(
                        f"corrupt event at {self.events_path} line {lineno}: {exc}"
                    ) from exc
        return tuple(events)

    def record(self, events: list[KnowledgeEvent]) -> None:
        for e in events:
            validate_event(e)
        try:
            self.kb_dir.mkdir(parents=True, exist_ok=True)
            with self.events_path.open("a", encoding="utf-8") as fh:
                for e in events:
                    fh.write(json.dumps(event_doc(e), sort_keys=True, separators=(",", ":")) + "\n")
        except OSError as exc:
            raise KnowledgeStoreError(f"cannot append to event log: {exc}") from exc

    def snapshot(self) -> Snapshot:
        return Snapshot(self.read_events(), self.priors())
