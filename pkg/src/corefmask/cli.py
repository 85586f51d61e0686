"""``coref`` command line: export-train, infer, score, pipeline.

Every flag can also be set through an environment variable named
``COREF_<FLAG>`` (upper case, dashes as underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .conllu import ConlluError, read_conllu, write_conllu
from .framing import LENGTH_FUNCTIONS, FramingConfig, FramingError, export_training_tuples, write_records
from .pipeline import PipelineConfig, PipelineError, resolve_corpus
from .report import format_table, write_jsonl, write_tsv
from .scorer import macro_average, micro_average, score_documents

logger = logging.getLogger("corefmask")


def _env(name, default, cast=str):
    value = os.environ.get(f"COREF_{name}")
    if value is None:
        return default
    if cast is bool:
        return value.strip().lower() in ("1", "true", "yes", "on")
    return cast(value)


def _add_framing_args(p):
    p.add_argument("--instruction", type=int, choices=range(1, 6), metavar="N",
                   default=_env("INSTRUCTION", 5, int), help="instruction set 1-5 (default 5)")
    p.add_argument("--language", default=_env("LANGUAGE", "English"), help="language named by instruction 1")
    p.add_argument("--zero-suffix", action="store_true", default=_env("ZERO_SUFFIX", False, bool),
                   help="append the zero-mention line to the instruction")
    p.add_argument("--frame-budget", type=int, default=_env("FRAME_BUDGET", 1600, int))
    p.add_argument("--tuple-budget", type=int, default=_env("TUPLE_BUDGET", 7168, int))
    p.add_argument("--length", choices=sorted(LENGTH_FUNCTIONS), default=_env("LENGTH", "whitespace"),
                   help="length unit for the budgets")


def _add_inference_args(p):
    p.add_argument("--backend", default=_env("BACKEND", "oracle"),
                   help="oracle | replay:<file> | remote:<url>")
    p.add_argument("--token", default=_env("TOKEN", None), help="bearer token for a remote backend")
    p.add_argument("--timeout", type=float, default=_env("TIMEOUT", 30.0, float))
    p.add_argument("--retries", type=int, default=_env("RETRIES", 2, int),
                   help="re-asks on a non-numeric generation before opening a new cluster")
    p.add_argument("--jobs", type=int, default=_env("JOBS", 1, int))
    p.add_argument("--seed", type=int, default=_env("SEED", 0, int))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coref", description=__doc__.splitlines()[0].replace("``", ""))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export-train", help="write instruction/input/output training records")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, default=_env("OUT", None, Path), required=_env("OUT", None) is None)
    _add_framing_args(p)

    p = sub.add_parser("infer", help="resolve mentions of a CoNLL-U file with a predictor")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, default=_env("OUT", None, Path), required=_env("OUT", None) is None)
    p.add_argument("--diagnostics", type=Path, default=_env("DIAGNOSTICS", None, Path),
                   help="default: <out>.diagnostics.jsonl")
    _add_framing_args(p)
    _add_inference_args(p)

    p = sub.add_parser("score", help="score a response against a key")
    p.add_argument("key", type=Path, help="CoNLL-U file or directory of files (one dataset each)")
    p.add_argument("response", type=Path)
    p.add_argument("--out", type=Path, default=_env("OUT", None, Path),
                   help="directory for scores.tsv, scores.jsonl and scores.png")
    p.add_argument("--no-plot", action="store_true", default=_env("NO_PLOT", False, bool))

    p = sub.add_parser("pipeline", help="infer on a key file, then score against it")
    p.add_argument("key", type=Path)
    p.add_argument("--out", type=Path, default=_env("OUT", Path("coref-out"), Path), help="output directory")
    p.add_argument("--no-plot", action="store_true", default=_env("NO_PLOT", False, bool))
    _add_framing_args(p)
    _add_inference_args(p)
    return parser


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        instruction=args.instruction,
        language=args.language,
        zero_suffix=args.zero_suffix,
        framing=FramingConfig(args.frame_budget, args.tuple_budget, args.length),
        backend=args.backend,
        retries=args.retries,
        jobs=args.jobs,
        seed=args.seed,
        timeout=args.timeout,
        token=args.token,
    )


def _datasets(key: Path, response: Path) -> list[tuple[str, Path, Path]]:
    if key.is_dir():
        pairs = []
        for k in sorted(key.glob("*.conllu")):
            r = response / k.name
            if not r.is_file():
                raise FileNotFoundError(f"no response file {r} for {k}")
            pairs.append((k.stem, k, r))
        return pairs
    return [(key.stem, key, response)]


def score_paths(key: Path, response: Path, out: Path | None = None, plot: bool = True) -> tuple[list[dict], str]:
    doc_rows: list[dict] = []
    dataset_rows: list[dict] = []
    for name, k, r in _datasets(key, response):
        key_docs = read_conllu(k)
        reports = score_documents(key_docs, read_conllu(r))
        for doc, report in zip(key_docs, reports):
            doc_rows.append({"dataset": name, "doc": doc.doc_id, **report.record()})
            for d in report.diagnostics:
                logger.info("%s/%s: %s", name, doc.doc_id, d)
        dataset_rows.append({"dataset": name, "doc": "*", **micro_average(reports).record()})
    summary = list(dataset_rows)
    if len(dataset_rows) > 1:
        summary.append({"dataset": "macro-avg", "doc": "", **macro_average(dataset_rows)})
    rows = doc_rows + summary
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_tsv(out / "scores.tsv", rows)
        write_jsonl(out / "scores.jsonl", rows)
        if plot and dataset_rows:
            from .plotting import plot_scores

            plot_scores(summary, out / "scores.png")
    return rows, format_table(rows)


def _write_diagnostics(path: Path, results) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for result in results:
            for message in result.diagnostics:
                f.write(json.dumps({"doc": result.document.doc_id, "message": message}, ensure_ascii=False) + "\n")


def _infer_file(src: Path, dst: Path, diagnostics: Path, config: PipelineConfig):
    results = resolve_corpus(read_conllu(src), config)
    dst.parent.mkdir(parents=True, exist_ok=True)
    write_conllu(dst, [r.document for r in results])
    _write_diagnostics(diagnostics, results)
    for r in results:
        for message in r.diagnostics:
            logger.warning("%s: %s", r.document.doc_id, message)
    return results


def cmd_export_train(args) -> int:
    config = FramingConfig(args.frame_budget, args.tuple_budget, args.length)
    spec = PipelineConfig(args.instruction, args.language, args.zero_suffix).instruction_spec
    from .instructions import render_instruction

    config.validate(render_instruction(spec))
    records = [rec for doc in read_conllu(args.input) for rec in export_training_tuples(doc, spec, config)]
    n = write_records(args.out, records)
    print(f"wrote {n} records to {args.out}")
    return 0


def cmd_infer(args) -> int:
    config = _pipeline_config(args)
    diagnostics = args.diagnostics or Path(str(args.out) + ".diagnostics.jsonl")
    results = _infer_file(args.input, args.out, diagnostics, config)
    calls = sum(r.calls for r in results)
    slots = sum(r.slots for r in results)
    print(f"resolved {len(results)} documents, {slots} slots, {calls} predictor calls -> {args.out}")
    return 0


def cmd_score(args) -> int:
    _, table = score_paths(args.key, args.response, args.out, plot=not args.no_plot)
    print(table)
    return 0


def cmd_pipeline(args) -> int:
    config = _pipeline_config(args)
    out: Path = args.out
    response_dir = out / "response"
    if args.key.is_dir():
        sources = sorted(args.key.glob("*.conllu"))
        response = response_dir
    else:
        sources = [args.key]
        response = response_dir / args.key.name
    for src in sources:
        dst = response_dir / src.name
        _infer_file(src, dst, Path(str(dst) + ".diagnostics.jsonl"), config)
    _, table = score_paths(args.key, response, out, plot=not args.no_plot)
    print(table)
    return 0


COMMANDS = {
    "export-train": cmd_export_train,
    "infer": cmd_infer,
    "score": cmd_score,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    for attr in ("input", "key", "response"):
        path = getattr(args, attr, None)
        if path is not None and not path.exists():
            parser.error(f"{attr} path does not exist: {path}")
    try:
        return COMMANDS[args.command](args)
    except (ConlluError, FramingError, PipelineError, ValueError, OSError) as e:
        print(f"coref {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
