"""Watch knowledge-base scores sharpen as simulated sessions complete.

Each round generates a fresh single-mutation case, runs a full session
against it (diagnose, select the top cause, apply the best cause-scoped
plan, finish), and records the emitted events into a knowledge directory.
The printed curve shows the blended confidence of the recurring cause class
climbing away from its prior as confirmations accumulate. Run as:

    python3 scripts/kb_learning_curve.py --rounds 12 --kb /tmp/kb-demo
"""

from __future__ import annotations

import argparse
import tempfile

from archmend.gen import GenConfig, generate
from archmend.kb import KnowledgeStore
from archmend.planner import SearchConfig, plan_beam, rank_plans
from archmend.session import Session


def run_round(store: KnowledgeStore, seed: int, mutation: str, system_id: str) -> tuple[str, bool]:
    case = generate(GenConfig(seed=seed, k_mutations=1, mutation_weights={mutation: 1}))
    sess = Session(case.architecture, case.eroded, system_id=system_id)
    snap = store.snapshot()
    candidates = sess.diagnose(snap)
    sess.select_cause(candidates[0].id)

    cause = candidates[0]
    plans = plan_beam(
        sess.cursor_state(),
        cause,
        SearchConfig(max_depth=2, beam_width=8),
        kb=snap,
        system_id=system_id,
    )
    plans = rank_plans(plans, cause, snap, system_id)
    for act in plans[0].actions:
        sess.apply_step(act)

    consolidated = sess.node(sess.cursor).violation_count == 0
    events = sess.finish("consolidated" if consolidated else "abandoned")
    store.record(events)
    return cause.pattern.class_key, consolidated


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rounds", type=int, default=10)
    ap.add_argument("--seed-base", type=int, default=0)
    ap.add_argument(
        "--mutation",
        default="misplace_entity",
        choices=["misplace_entity", "add_illegal_edge", "drop_allow_rule"],
        help="the single planted mutation kind, so one cause class recurs",
    )
    ap.add_argument("--system", default="demo-system")
    ap.add_argument("--kb", help="knowledge directory (default: a fresh temp dir)")
    args = ap.parse_args(argv)

    kb_dir = args.kb or tempfile.mkdtemp(prefix="archmend-kb-")
    store = KnowledgeStore(kb_dir)
    print(f"knowledge directory: {kb_dir}")
    print(f"{'round':>5} {'outcome':<12} {'class':<34} {'score after':>11}")

    for i in range(args.rounds):
        class_key, ok = run_round(store, args.seed_base + i, args.mutation, args.system)
        kind = class_key.split("/", 1)[0]
        score = store.snapshot().cause_score(class_key, kind, args.system)
        print(f"{i + 1:>5} {'consolidated' if ok else 'abandoned':<12} {class_key:<34} {score:>11.4f}")

    snap = store.snapshot()
    stats = snap.stats_doc()
    print(f"\n{stats['event_count']} events recorded; cause rows:")
    for row in stats["causes"]:
        print(f"  {row['system_id']}/{row['class_key']}: {row['confirmed']}/{row['offered']} confirmed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
