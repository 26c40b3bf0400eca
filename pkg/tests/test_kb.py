"""Knowledge base: event validation, Laplace-blended scoring, the JSONL
store, and snapshot isolation."""

import json

import pytest
from hypothesis import given, settings, strategies as st

from archmend.errors import KnowledgeStoreError
from archmend.kb import (
    KnowledgeEvent,
    KnowledgeStore,
    Snapshot,
    builtin_priors,
    event_doc,
    event_from_doc,
    load_snapshot,
    validate_event,
)

KEY = "misplaced_entity/entity,target"


def offered(system="sys", key=KEY):
    return KnowledgeEvent(timestamp=0.0, system_id=system, kind="cause_offered", class_key=key)


def confirmed(system="sys", key=KEY):
    return KnowledgeEvent(timestamp=0.0, system_id=system, kind="cause_confirmed", class_key=key)


def plan_event(verbs, outcome, system="sys", key=KEY):
    return KnowledgeEvent(
        timestamp=0.0,
        system_id=system,
        kind="plan_outcome",
        class_key=key,
        verb_sequence=tuple(verbs),
        outcome=outcome,
    )


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "event,msg",
    [
        (KnowledgeEvent(0.0, "s", "other", KEY), "unknown event kind"),
        (KnowledgeEvent(0.0, "", "cause_offered", KEY), "system_id"),
        (KnowledgeEvent(0.0, "s", "plan_outcome", KEY, None, "consolidated"), "verb_sequence"),
        (KnowledgeEvent(0.0, "s", "plan_outcome", KEY, ("move_entity",), "shrugged"), "outcome"),
        (KnowledgeEvent(0.0, "s", "cause_offered", KEY, ("move_entity",), None), "neither"),
        (KnowledgeEvent(0.0, "s", "cause_confirmed", KEY, None, "consolidated"), "neither"),
    ],
)
def test_validate_event_rejects(event, msg):
    with pytest.raises(KnowledgeStoreError, match=msg):
        validate_event(event)


def test_event_doc_round_trip():
    for e in (offered(), confirmed(), plan_event(["move_entity", "add_allow"], "consolidated")):
        assert event_from_doc(event_doc(e)) == e


def test_event_from_doc_rejects_unknown_keys():
    doc = event_doc(offered())
    doc["mood"] = "optimistic"
    with pytest.raises(KnowledgeStoreError, match="unknown event key"):
        event_from_doc(doc)
    with pytest.raises(KnowledgeStoreError, match="JSON object"):
        event_from_doc(["not", "an", "object"])


# ---------------------------------------------------------------------------
# Cause scores
# ---------------------------------------------------------------------------


def test_cause_score_empty_store_blends_prior():
    snap = Snapshot((), builtin_priors())
    assert abs(snap.cause_score(KEY, "misplaced_entity", "sys") - 0.53) < 1e-9
    assert abs(snap.cause_score("x/y", "unheard_of_kind", "sys") - 0.5) < 1e-9


def test_cause_score_own_confirmations():
    events = tuple([offered(), confirmed()] * 3)
    snap = Snapshot(events, builtin_priors())
    # System layer 4/5; the generic layer sees the same three pairs.
    assert abs(snap.cause_score(KEY, "misplaced_entity", "sys") - 0.8) < 1e-9


def test_cause_score_other_system_moves_generic_layer_only():
    events = tuple([offered("sys1"), confirmed("sys1")] * 3)
    snap = Snapshot(events, builtin_priors())
    # sys2 has no history of its own: system layer stays at Laplace(0,0)=0.5.
    expected = 0.7 * 0.5 + 0.3 * 0.8
    assert abs(snap.cause_score(KEY, "misplaced_entity", "sys2") - expected) < 1e-9


def test_cause_score_unconfirmed_offers_drag_down():
    snap = Snapshot(tuple(offered() for _ in range(4)), builtin_priors())
    score = snap.cause_score(KEY, "misplaced_entity", "sys")
    assert abs(score - (0.7 * (1 / 6) + 0.3 * (1 / 6))) < 1e-9
    assert score < 0.53


def test_builtin_prior_table():
    priors = builtin_priors()
    assert priors == {
        "misplaced_entity": 0.6,
        "missing_allow_rule": 0.5,
        "cyclic_module_dependency": 0.5,
        "missing_facade": 0.4,
        "isolated_violation": 0.2,
    }


# ---------------------------------------------------------------------------
# Plan scores
# ---------------------------------------------------------------------------


def test_plan_score_all_successes():
    verbs = ("move_entity",)
    events = tuple(plan_event(verbs, "consolidated") for _ in range(5))
    snap = Snapshot(events, builtin_priors())
    assert abs(snap.plan_score(KEY, verbs, "sys") - 6 / 7) < 1e-9


def test_plan_score_all_failures():
    verbs = ("delete_dependency",)
    events = tuple(plan_event(verbs, "abandoned") for _ in range(4))
    snap = Snapshot(events, builtin_priors())
    assert abs(snap.plan_score(KEY, verbs, "sys") - 1 / 6) < 1e-9


def test_plan_score_empty_store_is_flat():
    snap = Snapshot((), builtin_priors())
    assert snap.plan_score(KEY, ["move_entity"], "sys") == 0.5


def test_plan_score_other_system():
    verbs = ("add_allow",)
    events = tuple(plan_event(verbs, "consolidated", system="sys1") for _ in range(5))
    snap = Snapshot(events, builtin_priors())
    expected = 0.7 * 0.5 + 0.3 * (6 / 7)
    assert abs(snap.plan_score(KEY, verbs, "sys2") - expected) < 1e-9


def test_plan_score_distinguishes_sequences_and_classes():
    verbs = ("move_entity",)
    events = tuple(plan_event(verbs, "consolidated") for _ in range(5))
    snap = Snapshot(events, builtin_priors())
    assert snap.plan_score(KEY, ("move_entity", "add_allow"), "sys") == 0.5
    assert snap.plan_score("other/params", verbs, "sys") == 0.5


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------


def test_store_record_and_score(tmp_path):
    store = KnowledgeStore(tmp_path)
    store.record([offered(), confirmed()])
    snap = store.snapshot()
    # One offer, one confirmation: both layers sit at 2/3.
    assert abs(snap.cause_score(KEY, "misplaced_entity", "sys") - 2 / 3) < 1e-9
    lines = (tmp_path / "events.jsonl").read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["kind"] == "cause_offered"


def test_store_missing_file_is_empty(tmp_path):
    assert KnowledgeStore(tmp_path / "fresh").read_events() == ()


def test_store_corrupt_line_names_location(tmp_path):
    store = KnowledgeStore(tmp_path)
    store.record([offered()])
    with (tmp_path / "events.jsonl").open("a") as fh:
        fh.write("{not json\n")
    with pytest.raises(KnowledgeStoreError, match=r"line 2"):
        store.read_events()
    with pytest.raises(KnowledgeStoreError, match="events.jsonl"):
        store.read_events()


def test_store_rejects_invalid_before_writing(tmp_path):
    store = KnowledgeStore(tmp_path)
    with pytest.raises(KnowledgeStoreError):
        store.record([offered(), KnowledgeEvent(0.0, "", "cause_offered", KEY)])
    assert not (tmp_path / "events.jsonl").exists()


def test_store_priors_override(tmp_path):
    (tmp_path / "priors.json").write_text('{"misplaced_entity": 0.9}')
    store = KnowledgeStore(tmp_path)
    snap = store.snapshot()
    assert abs(snap.cause_score(KEY, "misplaced_entity", "sys") - (0.35 + 0.3 * 0.9)) < 1e-9
    # Kinds missing from the override fall back to the flat default.
    assert abs(snap.cause_score("a/b", "missing_facade", "sys") - 0.5) < 1e-9


def test_store_priors_override_bad_json(tmp_path):
    (tmp_path / "priors.json").write_text("{broken")
    with pytest.raises(KnowledgeStoreError, match="priors override"):
        KnowledgeStore(tmp_path).priors()


def test_snapshot_isolation(tmp_path):
    store = KnowledgeStore(tmp_path)
    store.record([offered(), confirmed()])
    snap = store.snapshot()
    before = snap.cause_score(KEY, "misplaced_entity", "sys")
    store.record([offered(), offered()])
    assert snap.cause_score(KEY, "misplaced_entity", "sys") == before
    assert store.snapshot().cause_score(KEY, "misplaced_entity", "sys") < before


def test_snapshot_doc_round_trip():
    events = (offered(), confirmed(), plan_event(("move_entity",), "consolidated"))
    snap = Snapshot(events, builtin_priors())
    rebuilt = load_snapshot(snap.doc())
    assert rebuilt.events == snap.events
    assert rebuilt.priors == snap.priors
    assert rebuilt.cause_score(KEY, "misplaced_entity", "sys") == snap.cause_score(
        KEY, "misplaced_entity", "sys"
    )


def test_load_snapshot_rejects_extra_keys():
    with pytest.raises(KnowledgeStoreError, match="snapshot document"):
        load_snapshot({"events": [], "priors": {}, "extra": 1})


def test_stats_doc_shape():
    events = (
        offered(),
        confirmed(),
        offered(system="sys2"),
        plan_event(("move_entity",), "consolidated"),
        plan_event(("move_entity",), "abandoned"),
    )
    snap = Snapshot(events, builtin_priors())
    doc = snap.stats_doc()
    assert doc["event_count"] == 5
    assert [row["system_id"] for row in doc["causes"]] == ["sys", "sys2"]
    row = doc["causes"][0]
    assert row["offered"] == 1 and row["confirmed"] == 1
    assert abs(row["system_score"] - 2 / 3) < 1e-9
    plan_row = doc["plans"][0]
    assert plan_row["verbs"] == ["move_entity"]
    assert plan_row["attempts"] == 2 and plan_row["successes"] == 1
    assert list(doc["priors"]) == sorted(doc["priors"])


# ---------------------------------------------------------------------------
# Monotonicity
# ---------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(n=st.integers(min_value=0, max_value=30), c=st.integers(min_value=0, max_value=30))
def test_confirmation_and_offer_monotonicity(n, c):
    c = min(c, n)  # confirmations never outnumber offers in recorded sessions
    base = Snapshot(
        tuple(offered() for _ in range(n)) + tuple(confirmed() for _ in range(c)),
        builtin_priors(),
    )
    with_pair = Snapshot(
        base.events + (offered(), confirmed()),
        builtin_priors(),
    )
    with_offer = Snapshot(base.events + (offered(),), builtin_priors())
    s0 = base.cause_score(KEY, "misplaced_entity", "sys")
    assert with_pair.cause_score(KEY, "misplaced_entity", "sys") > s0
    assert with_offer.cause_score(KEY, "misplaced_entity", "sys") < s0
