"""Erosion generator: byte determinism, construction invariants, ground-truth
recovery, and the self-contained PRNG."""

import json

import pytest

from archmend.conformance import check
from archmend.errors import GenerationError
from archmend.gen import (
    GenConfig,
    Lcg,
    case_summary,
    generate,
    write_case_bundle,
)
from archmend.model import SystemState, implementation_doc, state_hash
from archmend.repair import apply_action

SMALL = dict(n_modules=4, n_layers=2, n_entities=10, edge_density=1.2, k_mutations=2)


def small_case(seed, **overrides):
    return generate(GenConfig(seed=seed, **{**SMALL, **overrides}))


# ---------------------------------------------------------------------------
# PRNG
# ---------------------------------------------------------------------------


def test_lcg_frozen_sequence():
    # First outputs for seed 0, computed from the recurrence by hand and
    # frozen; any drift here silently breaks every recorded case.
    rng = Lcg(0)
    assert [rng.next_u64() for _ in range(4)] == [
        1442695040888963407,
        1876011003808476466,
        11166244414315200793,
        7401132627792533940,
    ]


def test_lcg_seed_masking_and_bounds():
    assert Lcg(2**64).state == 0
    rng = Lcg(7)
    with pytest.raises(ValueError):
        rng.randrange(0)
    values = {rng.randrange(5) for _ in range(50)}
    assert values <= set(range(5))


def test_lcg_shuffle_is_deterministic():
    items_a = list(range(10))
    items_b = list(range(10))
    Lcg(42).shuffle(items_a)
    Lcg(42).shuffle(items_b)
    assert items_a == items_b
    assert sorted(items_a) == list(range(10))


# ---------------------------------------------------------------------------
# Generation invariants
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(0, 51, 5))
def test_clean_conformant_eroded_not(seed):
    case = small_case(seed)
    assert check(case.architecture, case.clean).conformant
    assert not check(case.architecture, case.eroded).conformant


def test_mutation_count_matches_config():
    for seed in range(5):
        case = small_case(seed, k_mutations=3)
        assert len(case.mutations) == 3
        assert len(case.ground_truth) == 3


def test_ground_truth_consolidates():
    for seed in range(8):
        case = small_case(seed)
        state = SystemState(case.architecture, case.eroded)
        for act in case.ground_truth:
            state = apply_action(state, act)
        assert check(state.architecture, state.implementation).conformant


def test_ground_truth_inverts_each_mutation():
    inverse_verb = {
        "misplace_entity": "move_entity",
        "add_illegal_edge": "delete_dependency",
        "drop_allow_rule": "add_allow",
    }
    for seed in range(10):
        case = small_case(seed)
        for mutation, cure in zip(case.mutations, case.ground_truth):
            assert cure.verb == inverse_verb[mutation["kind"]]
            if mutation["kind"] == "misplace_entity":
                assert cure.arg("entity") == mutation["entity"]
                assert cure.arg("target") == mutation["from"]


def test_mutation_weights_restrict_kinds():
    cfg = GenConfig(
        seed=3,
        **SMALL | {"mutation_weights": {"add_illegal_edge": 1}},
    )
    case = generate(cfg)
    assert {m["kind"] for m in case.mutations} == {"add_illegal_edge"}
    assert all(a.verb == "delete_dependency" for a in case.ground_truth)


def test_single_module_config_is_infeasible():
    # One module leaves no cross-module pair to corrupt.
    with pytest.raises(GenerationError, match="no feasible mutation"):
        generate(GenConfig(seed=0, n_modules=1, n_layers=1, n_entities=5, k_mutations=1))


def test_differing_seeds_differ():
    a = SystemState(*(lambda c: (c.architecture, c.eroded))(small_case(0)))
    b = SystemState(*(lambda c: (c.architecture, c.eroded))(small_case(1)))
    assert state_hash(a) != state_hash(b)


@pytest.mark.parametrize(
    "overrides,msg",
    [
        ({"seed": -1}, "seed"),
        ({"n_modules": 0}, "positive"),
        ({"n_entities": 0}, "positive"),
        ({"edge_density": 0.0}, "positive"),
        ({"k_mutations": 0}, "at least 1"),
        ({"mutation_weights": {"typo_kind": 1}}, "unknown mutation kind"),
        ({"mutation_weights": {k: 0 for k in ("misplace_entity",)}}, "positive sum"),
    ],
)
def test_gen_config_validation(overrides, msg):
    with pytest.raises(GenerationError, match=msg):
        GenConfig(**{**SMALL, "seed": 0, **overrides})


# ---------------------------------------------------------------------------
# Determinism and bundles
# ---------------------------------------------------------------------------


def test_two_runs_are_byte_identical(tmp_path):
    for directory in ("one", "two"):
        case = small_case(11)
        write_case_bundle(case, tmp_path / directory)
    names = ["architecture.json", "clean.json", "eroded.json", "ground_truth.json", "summary.json"]
    for name in names:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_bundle_contents(tmp_path):
    case = small_case(11)
    write_case_bundle(case, tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary == case_summary(case)
    assert summary["mutations"] == list(case.mutations)
    assert summary["ground_truth"] == [a.id for a in case.ground_truth]
    assert sum(summary["violations"].values()) > 0
    eroded = json.loads((tmp_path / "eroded.json").read_text())
    assert eroded == implementation_doc(case.eroded)
    clean = json.loads((tmp_path / "clean.json").read_text())
    assert clean != eroded


def test_summary_is_json_stable():
    case = small_case(11)
    assert json.dumps(case_summary(case), sort_keys=True) == json.dumps(
        case_summary(generate(GenConfig(seed=11, **SMALL))), sort_keys=True
    )
