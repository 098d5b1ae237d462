"""Command-line entry point for the toolkit.

Exit codes: 0 success, 2 usage error, 3 input integrity error, 4 backend
terminal error. Usage errors are rejected before any output file is
opened, so they never create or truncate artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import datasetgen, grading, llm, osmio, report, transform
from .errors import BackendError, OsmagError
from .planner import plan_avoiding, render_path, shortest_paths
from .prompting import (
    PromptLibrary,
    PromptSpec,
    TaskKind,
    assemble_prompt,
    hierarchy_question,
    path_question,
)

_VARIANTS = {
    "original": transform.VariantKind.ORIGINAL,
    "v1": transform.VariantKind.VARIANT1,
    "variant1": transform.VariantKind.VARIANT1,
    "v2": transform.VariantKind.VARIANT2,
    "variant2": transform.VariantKind.VARIANT2,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osmag-bench",
        description="osmAG map toolkit: validate, transform, plan, generate datasets, evaluate models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a map and check its invariants")
    p.add_argument("--map", required=True, dest="map_path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("variant", help="rewrite a map (v1/v2/strip/prune)")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--kind",
        required=True,
        help="comma list applied in order, from: v1, v2, strip, prune",
    )
    p.add_argument("--keep", default="", help="area names pruning must keep (comma list)")
    p.set_defaults(func=cmd_variant)

    p = sub.add_parser("plan", help="shortest hop path between two areas")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--from", required=True, dest="from_area")
    p.add_argument("--to", required=True, dest="to_area")
    p.add_argument("--blocked", default="", help="comma list of areas to avoid")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("gen-topo", help="generate a path-finding dataset")
    p.add_argument("--preset", help="shipped config name, e.g. dataset1/dataset2/dataset3")
    p.add_argument("--template", default="", help="template ids, comma list (e.g. a,b,c)")
    p.add_argument("--maps", default="", help="instances per template, comma list or one value")
    p.add_argument("--holdout", default="", help="held-out instances per template, comma list")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--level", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--variant", default="v2", choices=sorted(_VARIANTS))
    p.add_argument("--token-ceiling", type=int, default=datasetgen.DEFAULT_TOKEN_CEILING)
    p.add_argument("--prompt-dir")
    p.set_defaults(func=cmd_gen_topo)

    p = sub.add_parser("gen-hier", help="generate a locate-the-person dataset")
    p.add_argument("--preset", help="shipped config name, e.g. dataset4")
    p.add_argument("--count", type=int)
    p.add_argument("--pool-template", default="a,b,c")
    p.add_argument("--pool-maps", type=int, default=4)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--level", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--token-ceiling", type=int, default=datasetgen.DEFAULT_TOKEN_CEILING)
    p.add_argument("--prompt-dir")
    p.set_defaults(func=cmd_gen_hier)

    p = sub.add_parser("gen-general", help="export the general-knowledge probe set")
    p.add_argument("--out", required=True)
    p.add_argument("--source", help="override the shipped question file")
    p.set_defaults(func=cmd_gen_general)

    p = sub.add_parser("prompt", help="assemble and print one prompt")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--task", required=True, choices=("path", "hierarchy"))
    p.add_argument("--level", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--variant", default="v2", choices=sorted(_VARIANTS))
    p.add_argument("--from", dest="from_area")
    p.add_argument("--to", dest="to_area")
    p.add_argument("--person")
    p.add_argument("--question", help="override the generated question text")
    p.add_argument("--keep-metric", action="store_true")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--prompt-dir")
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("eval", help="run a backend over a dataset and grade it")
    _add_eval_args(p, backend_required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grade", help="re-grade a recorded transcript offline")
    p.add_argument("--dataset", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--report", required=True, dest="report_prefix")
    p.set_defaults(func=cmd_grade)

    return parser


def _add_eval_args(p: argparse.ArgumentParser, backend_required: bool) -> None:
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--backend",
        required=backend_required,
        choices=("mock-oracle", "mock-corruptor", "replay", "remote"),
    )
    p.add_argument("--report", required=True, dest="report_prefix")
    p.add_argument("--transcript-in")
    p.add_argument("--transcript-out")
    p.add_argument("--p", type=float, default=0.3, help="corruption probability")
    p.add_argument("--seed", type=int, default=0, help="mock-corruptor seed")
    p.add_argument("--max-in-flight", type=int, default=1)
    p.add_argument("--model", default="")
    p.add_argument("--base-url", default="https://api.openai.com/v1")
    p.add_argument("--temperature", type=float, default=llm.DEFAULT_TEMPERATURE)
    p.add_argument("--max-tokens", type=int, default=llm.DEFAULT_MAX_TOKENS)
    p.add_argument("--api-key-env", default=llm.API_KEY_ENV)
    p.add_argument("--config", help="JSON file with endpoint/model/retry defaults")


def cmd_validate(args) -> int:
    graph = osmio.load_map(args.map_path)
    for warning in graph.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"OK: {len(graph.areas)} areas, {len(graph.passages)} passages, "
        f"{len(graph.nodes)} nodes, variant={transform.detect_variant(graph).value}"
    )
    return 0


def cmd_variant(args) -> int:
    graph = osmio.load_map(args.map_path)
    keep = {name for name in args.keep.split(",") if name}
    for kind in args.kind.split(","):
        kind = kind.strip()
        if kind in ("v1", "variant1"):
            graph = transform.to_variant1(graph)
        elif kind in ("v2", "variant2"):
            graph = transform.to_variant2(graph)
        elif kind == "strip":
            graph = transform.strip_metric(graph)
        elif kind == "prune":
            graph = transform.prune_leaf_areas(graph, keep)
        else:
            raise OsmagError(f"unknown transform kind {kind!r}")
    osmio.save_map(graph, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_plan(args) -> int:
    graph = osmio.load_map(args.map_path)
    blocked = {name for name in args.blocked.split(",") if name}
    if blocked:
        answer = plan_avoiding(graph, args.from_area, args.to_area, blocked)
    else:
        answer = shortest_paths(graph, args.from_area, args.to_area)
    if not answer.reachable:
        print("unreachable")
        return 0
    for path in answer.paths:
        print(render_path(path))
    return 0


def _library(args) -> PromptLibrary | None:
    if getattr(args, "prompt_dir", None):
        return PromptLibrary.from_dir(args.prompt_dir)
    return None


def _write_splits(splits: dict[str, list], out: str) -> None:
    out_path = Path(out)
    datasetgen.export_records(splits["main"], out_path)
    print(f"wrote {len(splits['main'])} records to {out_path}")
    holdout = splits.get("holdout")
    if holdout:
        test_path = out_path.with_name(out_path.stem + ".test" + out_path.suffix)
        datasetgen.export_records(holdout, test_path)
        print(f"wrote {len(holdout)} held-out records to {test_path}")


def cmd_gen_topo(args) -> int:
    library = _library(args)
    if args.preset:
        config = datasetgen.load_preset(args.preset)
    else:
        if not args.template or not args.maps:
            raise OsmagError("either --preset or both --template and --maps are required")
        template_ids = [t for t in args.template.split(",") if t]
        counts = [int(n) for n in args.maps.split(",")]
        if len(counts) == 1:
            counts = counts * len(template_ids)
        holdout = [int(n) for n in args.holdout.split(",")] if args.holdout else []
        config = {
            "kind": "topological",
            "dataset_id": Path(args.out).stem,
            "level": args.level,
            "variant": _VARIANTS[args.variant].value,
            "token_ceiling": args.token_ceiling,
            "templates": {
                tid: {"maps": n} for tid, n in zip(template_ids, counts)
            },
            "holdout": {
                tid: n for tid, n in zip(template_ids, holdout) if n
            },
        }
    splits = datasetgen.generate_from_config(config, args.seed, library)
    _write_splits(splits, args.out)
    return 0


def cmd_gen_hier(args) -> int:
    library = _library(args)
    if args.preset:
        config = datasetgen.load_preset(args.preset)
    else:
        if args.count is None:
            raise OsmagError("either --preset or --count is required")
        config = {
            "kind": "hierarchical",
            "dataset_id": Path(args.out).stem,
            "level": args.level,
            "token_ceiling": args.token_ceiling,
            "count": args.count,
            "pool": {
                "templates": [t for t in args.pool_template.split(",") if t],
                "maps_per_template": args.pool_maps,
            },
        }
    splits = datasetgen.generate_from_config(config, args.seed, library)
    _write_splits(splits, args.out)
    return 0


def cmd_gen_general(args) -> int:
    items = datasetgen.load_general(args.source)
    datasetgen.export_records(items, args.out)
    print(f"wrote {len(items)} records to {args.out}")
    return 0


def cmd_prompt(args) -> int:
    graph = osmio.load_map(args.map_path)
    variant = _VARIANTS[args.variant]
    task = TaskKind(args.task)

    if task is TaskKind.PATH:
        if args.question is None and not (args.from_area and args.to_area):
            raise OsmagError("path prompts need --from and --to (or --question)")
        question = args.question or path_question(args.from_area, args.to_area)
    else:
        if args.question is None and not args.person:
            raise OsmagError("hierarchy prompts need --person (or --question)")
        question = args.question or hierarchy_question(args.person)

    graph = transform.apply_variant(graph, variant)
    if not args.keep_metric:
        graph = transform.strip_metric(graph)
    if task is TaskKind.PATH and not args.no_prune:
        graph = transform.prune_leaf_areas(graph, {args.from_area, args.to_area})

    spec = PromptSpec(
        level=args.level,
        variant=variant,
        task=task,
        map_text=osmio.render_map_text(graph),
        question=question,
    )
    print(assemble_prompt(spec, _library(args)))
    return 0


def _build_backend(args, items, config: dict) -> llm.Backend:
    if args.backend == "mock-oracle":
        return llm.MockOracleBackend(items)
    if args.backend == "mock-corruptor":
        return llm.MockCorruptorBackend(items, p=args.p, seed=args.seed)
    if args.backend == "replay":
        if not args.transcript_in:
            raise OsmagError("--backend replay requires --transcript-in")
        return llm.TranscriptReplayBackend(args.transcript_in)
    retry = llm.RetryPolicy(**config["retry"]) if "retry" in config else None
    return llm.RemoteBackend(
        base_url=config.get("base_url", args.base_url),
        model=args.model or config.get("model", ""),
        api_key_env=config.get("api_key_env", args.api_key_env),
        retry=retry,
    )


def _run_eval(items, backend, args, *, model="", temperature=0.2, max_tokens=512,
              max_in_flight=1, transcript_out=None) -> int:
    eval_report, requests_, responses = grading.evaluate(
        items,
        backend,
        model=model,
        temperature=temperature,
        max_tokens=max_tokens,
        max_in_flight=max_in_flight,
        dataset_id=Path(args.dataset).stem,
    )
    paths = report.write_report(eval_report, args.report_prefix, responses)
    if transcript_out:
        llm.write_transcript(transcript_out, requests_, responses)
    print(
        f"success_rate={eval_report.success_rate:.4f} n={len(eval_report.results)} "
        f"counts={eval_report.counts} -> {paths['summary']}"
    )
    backend_failures = sum(1 for r in responses if not r.ok)
    if backend_failures == len(responses):
        raise BackendError("every request failed; see the report for causes")
    return 0


def cmd_eval(args) -> int:
    items = datasetgen.import_records(args.dataset)
    config = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    backend = _build_backend(args, items, config)
    return _run_eval(
        items,
        backend,
        args,
        model=args.model or config.get("model", ""),
        temperature=args.temperature,
        max_tokens=args.max_tokens,
        max_in_flight=args.max_in_flight,
        transcript_out=args.transcript_out,
    )


def cmd_grade(args) -> int:
    items = datasetgen.import_records(args.dataset)
    backend = llm.TranscriptReplayBackend(args.transcript)
    eval_report, _, responses = grading.evaluate(
        items, backend, dataset_id=Path(args.dataset).stem
    )
    paths = report.write_report(eval_report, args.report_prefix, responses)
    print(
        f"success_rate={eval_report.success_rate:.4f} n={len(eval_report.results)} "
        f"counts={eval_report.counts} -> {paths['summary']}"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 4
    except OsmagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
