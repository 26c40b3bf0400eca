"""Command line front end: check, diagnose, plan, apply, gen, serve, kb stats.

Machine consumers should use JSON output modes; those are byte-stable for
equal inputs.  Table output is for humans and carries no format guarantee.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .conformance import check, render_table, report_doc
from .diagnosis import detect_patterns, diagnosis_doc, rank_causes
from .errors import ArchmendError, ResourceLimitError
from .gen import GenConfig, case_summary, generate, write_case_bundle
from .kb import KnowledgeStore, Snapshot, builtin_priors
from .model import (
    SystemState,
    load_architecture,
    load_implementation,
    require_paired,
    serialize_architecture,
    serialize_implementation,
)
from .planner import SearchConfig, plan_beam, plan_exhaustive, plan_greedy, plans_doc, rank_plans
from .repair import action_from_doc, apply_action

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RESOURCE = 4

KB_DIR_ENV = "ARCHMEND_KB_DIR"


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _fail(message: str) -> None:
    sys.stderr.write(f"error: {message}\n")


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_pair(arch_path: str, impl_path: str):
    a = load_architecture(_read_text(arch_path))
    s = load_implementation(_read_text(impl_path))
    require_paired(a, s)
    return a, s


def _kb_dir(args) -> str | None:
    return args.kb or os.environ.get(KB_DIR_ENV) or None


def _snapshot(kb_dir: str | None) -> Snapshot:
    if kb_dir:
        return KnowledgeStore(kb_dir).snapshot()
    return Snapshot((), builtin_priors())


def _search_config(args) -> SearchConfig:
    base = SearchConfig()
    return SearchConfig(
        beam_width=args.width if args.width is not None else base.beam_width,
        max_depth=args.depth if args.depth is not None else base.max_depth,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    a, s = _load_pair(args.architecture, args.implementation)
    vs = check(a, s)
    if args.format == "json":
        _emit(report_doc(vs))
    else:
        sys.stdout.write(render_table(vs) + "\n")
    return EXIT_OK if vs.conformant else EXIT_VIOLATIONS


def cmd_diagnose(args) -> int:
    a, s = _load_pair(args.architecture, args.implementation)
    snap = _snapshot(_kb_dir(args))
    vs = check(a, s)
    patterns = detect_patterns(vs, a, s)
    candidates = rank_causes(patterns, snap, args.system)
    _emit({"system_id": args.system, "candidates": diagnosis_doc(candidates)})
    return EXIT_OK


def cmd_plan(args) -> int:
    a, s = _load_pair(args.architecture, args.implementation)
    snap = _snapshot(_kb_dir(args))
    cfg = _search_config(args)
    st = SystemState(architecture=a, implementation=s)
    vs = check(a, s)

    cause = None
    if args.cause is not None:
        candidates = rank_causes(detect_patterns(vs, a, s), snap, args.system)
        cause = next((c for c in candidates if c.id == args.cause), None)
        if cause is None:
            _fail(f"no cause candidate with id {args.cause}; run diagnose first")
            return EXIT_INPUT
    scope = cause if cause is not None else vs

    if args.strategy == "beam":
        plans = plan_beam(st, scope, cfg, kb=snap, system_id=args.system)
    elif args.strategy == "greedy":
        plans = [plan_greedy(st, scope, cfg)]
    else:
        plans = [plan_exhaustive(st, scope, cfg)]
    if cause is not None:
        plans = rank_plans(plans, cause, snap, args.system)

    _emit({"strategy": args.strategy, "plans": plans_doc(plans)})
    return EXIT_OK


def cmd_apply(args) -> int:
    a, s = _load_pair(args.architecture, args.implementation)
    raw = json.loads(_read_text(args.plan))
    action_docs = raw["actions"] if isinstance(raw, dict) else raw
    if not isinstance(action_docs, list):
        _fail("plan file must be a plan document or a list of actions")
        return EXIT_INPUT

    st = SystemState(architecture=a, implementation=s)
    applied = []
    for doc in action_docs:
        act = action_from_doc(doc)
        st = apply_action(st, act)
        applied.append(act.id)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "architecture.json").write_text(serialize_architecture(st.architecture), encoding="utf-8")
    (out / "implementation.json").write_text(
        serialize_implementation(st.implementation), encoding="utf-8"
    )
    final = check(st.architecture, st.implementation)
    _emit(
        {
            "applied": applied,
            "accumulated_cost": st.accumulated_cost,
            "conformant": final.conformant,
            "violations_left": len(final.violations),
            "out": str(out),
        }
    )
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = GenConfig(
        seed=args.seed,
        n_modules=args.modules,
        n_layers=args.layers,
        n_entities=args.entities,
        edge_density=args.density,
        k_mutations=args.mutations,
    )
    case = generate(cfg)
    write_case_bundle(case, args.out)
    _emit(case_summary(case))
    return EXIT_OK


def cmd_session_serve(args) -> int:
    # Imported here so batch subcommands stay free of the HTTP stack.
    import uvicorn

    from .api import create_app

    app = create_app(kb_dir=_kb_dir(args), cors_origins=args.cors_origin)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_kb_stats(args) -> int:
    kb_dir = _kb_dir(args)
    if not kb_dir:
        _fail(f"kb stats needs --kb or {KB_DIR_ENV}")
        return EXIT_USAGE
    _emit(KnowledgeStore(kb_dir).snapshot().stats_doc())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_pair_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-a", "--architecture", required=True, help="architecture JSON file")
    p.add_argument("-s", "--implementation", required=True, help="implementation JSON file")


def _add_kb_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kb", default=None, help=f"knowledge base directory (default ${KB_DIR_ENV})")


def _add_system_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--system", default="cli", help="system id for knowledge base scoring")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archmend",
        description="Check architecture conformance, diagnose erosion, and plan repairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="report violations for an architecture/implementation pair")
    _add_pair_args(p)
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("diagnose", help="rank likely erosion causes")
    _add_pair_args(p)
    _add_kb_arg(p)
    _add_system_arg(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("plan", help="search for repair plans")
    _add_pair_args(p)
    _add_kb_arg(p)
    _add_system_arg(p)
    p.add_argument("--cause", type=int, default=None, help="restrict to one diagnosed cause id")
    p.add_argument("--width", type=int, default=None, help="beam width")
    p.add_argument("--depth", type=int, default=None, help="maximum plan length")
    p.add_argument("--strategy", choices=("beam", "greedy", "exhaustive"), default="beam")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("apply", help="apply a plan file and write the resulting pair")
    _add_pair_args(p)
    p.add_argument("--plan", required=True, help="plan JSON file (plan document or action list)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("gen", help="generate a seeded erosion case bundle")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--modules", type=int, default=GenConfig.__dataclass_fields__["n_modules"].default)
    p.add_argument("--layers", type=int, default=GenConfig.__dataclass_fields__["n_layers"].default)
    p.add_argument(
        "--entities", type=int, default=GenConfig.__dataclass_fields__["n_entities"].default
    )
    p.add_argument(
        "--density", type=float, default=GenConfig.__dataclass_fields__["edge_density"].default
    )
    p.add_argument(
        "--mutations", type=int, default=GenConfig.__dataclass_fields__["k_mutations"].default
    )
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("session", help="session utilities")
    session_sub = p.add_subparsers(dest="session_command", required=True)
    q = session_sub.add_parser("serve", help="run the HTTP service")
    q.add_argument("--host", default="127.0.0.1")
    q.add_argument("--port", type=int, default=8000)
    q.add_argument(
        "--cors-origin",
        action="append",
        default=None,
        help="origin allowed via CORS (repeatable)",
    )
    _add_kb_arg(q)
    q.set_defaults(func=cmd_session_serve)

    p = sub.add_parser("kb", help="knowledge base utilities")
    kb_sub = p.add_subparsers(dest="kb_command", required=True)
    q = kb_sub.add_parser("stats", help="print score tables")
    _add_kb_arg(q)
    q.set_defaults(func=cmd_kb_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        _fail(str(exc))
        return EXIT_RESOURCE
    except ArchmendError as exc:
        _fail(str(exc))
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        # Covers unreadable files, malformed JSON, and bad numeric options.
        _fail(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
