"""Compare planner strategies on generated erosion cases.

For each case the generator plants k mutations whose recorded inverses form a
consolidating plan, so "did the strategy consolidate" and "at what cost" have
a ground truth to stand next to. Run as:

    python3 scripts/recovery_benchmark.py --cases 50 --out results/recovery.json
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from archmend.conformance import check
from archmend.errors import ResourceLimitError
from archmend.gen import GenConfig, generate
from archmend.model import SystemState
from archmend.planner import SearchConfig, plan_beam, plan_exhaustive, plan_greedy


def run_case(seed: int, k: int, width: int, budget: int) -> dict:
    case = generate(GenConfig(seed=seed, k_mutations=k))
    st = SystemState(architecture=case.architecture, implementation=case.eroded)
    vs = check(case.architecture, case.eroded)
    row = {"seed": seed, "k": k, "violations": len(vs.violations)}

    greedy = plan_greedy(st, vs, SearchConfig(max_depth=k + 1, max_expansions=budget))
    row["greedy"] = {"consolidated": greedy.consolidating, "score": greedy.final_score}

    beams = plan_beam(
        st, vs, SearchConfig(max_depth=k + 1, beam_width=width, max_expansions=budget)
    )
    top = beams[0]
    row["beam"] = {"consolidated": top.consolidating, "score": top.final_score}

    try:
        ex = plan_exhaustive(st, vs, SearchConfig(max_depth=k, max_expansions=budget))
        row["exhaustive"] = {"consolidated": ex.consolidating, "score": ex.final_score}
    except ResourceLimitError:
        row["exhaustive"] = {"consolidated": False, "score": None, "budget_exceeded": True}
    return row


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=30, help="number of generated cases")
    ap.add_argument("--seed-base", type=int, default=0)
    ap.add_argument("--width", type=int, default=8, help="beam width")
    ap.add_argument("--budget", type=int, default=2_000_000, help="expansion budget per search")
    ap.add_argument("--out", help="write the per-case rows as JSON")
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    rows = [run_case(args.seed_base + i, 1 + i % 3, args.width, args.budget) for i in range(args.cases)]
    elapsed = time.perf_counter() - t0

    print(f"{args.cases} cases in {elapsed:.1f}s (beam width {args.width})")
    print(f"{'strategy':<12} {'consolidated':>12} {'mean score':>12}")
    for name in ("greedy", "beam", "exhaustive"):
        done = [r for r in rows if r[name]["consolidated"]]
        scored = [r[name]["score"] for r in rows if r[name]["score"] is not None]
        mean = sum(scored) / len(scored) if scored else float("nan")
        print(f"{name:<12} {len(done):>9}/{args.cases:<3} {mean:>11.2f}")

    # Cost of greed: cases where the beam consolidates strictly cheaper.
    cheaper = sum(
        1
        for r in rows
        if r["beam"]["consolidated"]
        and r["greedy"]["consolidated"]
        and r["beam"]["score"] < r["greedy"]["score"]
    )
    print(f"beam strictly cheaper than greedy on {cheaper}/{args.cases}")

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
