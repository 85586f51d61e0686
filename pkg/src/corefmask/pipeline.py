"""Mask, infer, merge and write back, for one document or a whole corpus."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .conllu import Document, write_entities
from .framing import FramingConfig, frame_document
from .inference import (
    ErrorPolicy,
    InferenceAborted,
    OracleBackend,
    PredictorBackend,
    RemoteBackend,
    ReplayBackend,
    run_controlled_inference,
)
from .instructions import InstructionSpec, render_instruction
from .merge import GlobalClusterMap, apply_to_document, find_chain_breaks, merge_document


@dataclass(frozen=True)
class PipelineConfig:
    instruction: int = 5
    language: str = "English"
    zero_suffix: bool = False
    framing: FramingConfig = FramingConfig()
    backend: str = "oracle"
    retries: int = 2
    jobs: int = 1
    seed: int = 0
    timeout: float = 30.0
    token: str | None = None

    @property
    def instruction_spec(self) -> InstructionSpec:
        return InstructionSpec(self.instruction, self.language, self.zero_suffix)

    @property
    def instruction_text(self) -> str:
        return render_instruction(self.instruction_spec)

    @property
    def policy(self) -> ErrorPolicy:
        return ErrorPolicy(retries=self.retries)

    def validate(self) -> None:
        self.framing.validate(self.instruction_text)


@dataclass
class DocumentResult:
    document: Document
    clusters: GlobalClusterMap
    calls: int = 0
    slots: int = 0
    diagnostics: list[str] = field(default_factory=list)


class PipelineError(RuntimeError):
    pass


BackendFactory = Callable[[Document], PredictorBackend]


def backend_factory(config: PipelineConfig) -> tuple[BackendFactory, bool]:
    """Build a per-document backend factory; the flag says whether documents may run concurrently."""
    spec = config.backend
    if spec == "oracle":
        return (lambda doc: OracleBackend(doc, config.instruction_text, config.framing)), True
    if spec.startswith("replay:"):
        with open(spec[len("replay:"):], encoding="utf-8") as f:
            script = [json.loads(line) if line.startswith('"') else line for line in f.read().splitlines()]
        shared = ReplayBackend(script)
        # one script is consumed in document order
        return (lambda doc: shared), False
    if spec.startswith("remote:"):
        remote = RemoteBackend(spec[len("remote:"):], config.token, timeout=config.timeout)
        return (lambda doc: remote), True
    raise PipelineError(f"unknown backend {spec!r} (expected oracle, replay:<file> or remote:<url>)")


def resolve_document(doc: Document, config: PipelineConfig, backend: PredictorBackend) -> DocumentResult:
    instruction = config.instruction_text
    framed = frame_document(doc, instruction, config.framing)
    diagnostics = list(framed.diagnostics)
    per_tuple = []
    calls = 0
    for k, tup in enumerate(framed.tuples):
        try:
            result = run_controlled_inference(tup, backend, config.policy)
        except InferenceAborted as e:
            raise PipelineError(f"document {doc.doc_id!r}, input {k}: {e}") from e
        calls += result.calls
        diagnostics.extend(f"input {k}: {d}" for d in result.diagnostics)
        values = dict(result.assignments)
        slots = tup.slots
        n_before = len(tup.before.slots)
        before = [(s.position, values[s.slot_index]) for s in slots[:n_before]]
        after = [(s.position, values[s.slot_index]) for s in slots[n_before:]] if tup.after else None
        per_tuple.append((before, after))
    clusters = merge_document(per_tuple)
    diagnostics.extend(clusters.diagnostics)
    frame_of = {s.position: f.frame_index for f in framed.frames for s in f.slots}
    diagnostics.extend(str(b) for b in find_chain_breaks(framed.mentions, clusters, frame_of))
    out = apply_to_document(doc, clusters) if framed.tuples else write_entities(doc, [])
    n_slots = sum(len(f.slots) for f in framed.frames)
    return DocumentResult(out, clusters, calls, n_slots, diagnostics)


def resolve_corpus(docs: Sequence[Document], config: PipelineConfig) -> list[DocumentResult]:
    config.validate()
    make_backend, parallel = backend_factory(config)
    work = lambda doc: resolve_document(doc, config, make_backend(doc))  # noqa: E731
    if parallel and config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(work, docs))
    return [work(doc) for doc in docs]
