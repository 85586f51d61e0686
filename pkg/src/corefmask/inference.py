"""Controlled inference: the predictor is asked only for the number at each MASK.

Everything outside the slots is copied from the input markup, so the filled
output is structurally identical to the input by construction.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .conllu import Document
from .framing import FramingConfig, InputTuple, frame_document, gold_local_numbers
from .markup import MASK, MarkupError, MaskedSentence, pending_slot

logger = logging.getLogger(__name__)

STOP = ("<", "\n")
_LEADING_NUMBER_RE = re.compile(r"\s*([0-9]+)")


class BackendError(RuntimeError):
    """The predictor could not be reached or answered with garbage."""


class InferenceAborted(RuntimeError):
    def __init__(self, message: str, partial: "InferenceResult"):
        super().__init__(message)
        self.partial = partial


class PredictorBackend(Protocol):
    def complete(self, context: str, max_new_tokens: int, stop: Sequence[str]) -> str: ...


@dataclass(frozen=True)
class ErrorPolicy:
    retries: int = 2
    max_value: int = 10**6
    max_new_tokens: int = 8


@dataclass
class InferenceResult:
    filled: str
    assignments: list[tuple[int, int]]
    calls: int = 0
    diagnostics: list[str] = field(default_factory=list)


def compose_context(instruction: str, input_text: str, output_prefix: str) -> str:
    return f"{instruction}\n\n{input_text}\n\n{output_prefix}"


def split_context(context: str) -> tuple[str, str, str]:
    parts = context.rsplit("\n\n", 2)
    if len(parts) != 3:
        raise BackendError("context is not instruction, input and output prefix")
    return parts[0], parts[1], parts[2]


def parse_number(text: str, max_value: int = 10**6) -> int | None:
    m = _LEADING_NUMBER_RE.match(text)
    if not m:
        return None
    value = int(m.group(1))
    return value if value <= max_value else None


def run_controlled_inference(
    tup: InputTuple, backend: PredictorBackend, policy: ErrorPolicy = ErrorPolicy()
) -> InferenceResult:
    markup = tup.markup
    return fill_markup(tup.instruction, markup, backend, policy)


def fill_markup(
    instruction: str, markup: MaskedSentence, backend: PredictorBackend, policy: ErrorPolicy = ErrorPolicy()
) -> InferenceResult:
    text = markup.text
    result = InferenceResult("", [])
    out: list[str] = []
    prev = 0
    for slot in markup.slots:
        out.append(text[prev:slot.offset])
        context = compose_context(instruction, text, "".join(out))
        value = None
        for attempt in range(policy.retries + 1):
            try:
                generated = backend.complete(context, policy.max_new_tokens, STOP)
            except BackendError as e:
                result.filled = "".join(out) + text[slot.offset:]
                raise InferenceAborted(f"backend failed at slot {slot.slot_index}: {e}", result) from e
            result.calls += 1
            value = parse_number(generated, policy.max_value)
            if value is not None:
                break
            msg = f"slot {slot.slot_index}: unusable generation {generated[:20]!r} (attempt {attempt + 1})"
            logger.info(msg)
            result.diagnostics.append(msg)
        if value is None:
            value = max((v for _, v in result.assignments), default=-1) + 1
            msg = f"slot {slot.slot_index}: fell back to new local cluster {value}"
            logger.warning(msg)
            result.diagnostics.append(msg)
        result.assignments.append((slot.slot_index, value))
        out.append(str(value))
        prev = slot.offset + len(MASK)
    out.append(text[prev:])
    result.filled = "".join(out)
    return result


class ReplayBackend:
    """Returns scripted generations in order; shared by all callers."""

    def __init__(self, script: Sequence[str]):
        self.script = list(script)
        self.position = 0
        self._lock = threading.Lock()

    def complete(self, context: str, max_new_tokens: int, stop: Sequence[str]) -> str:
        with self._lock:
            if self.position >= len(self.script):
                raise BackendError("replay script exhausted")
            item = self.script[self.position]
            self.position += 1
            return item


def replay_backend(script: Sequence[str]) -> ReplayBackend:
    return ReplayBackend(script)


class OracleBackend:
    """Answers every slot with the gold number that training targets would carry."""

    def __init__(self, gold: Document, instruction: str, config: FramingConfig = FramingConfig()):
        self._answers: dict[str, tuple[MaskedSentence, list[int]] | None] = {}
        framed = frame_document(gold, instruction, config)
        for t in framed.tuples:
            markup = t.markup
            numbers = gold_local_numbers(markup.slots)
            if markup.text in self._answers and self._answers[markup.text] is not None:
                if self._answers[markup.text][1] != numbers:
                    self._answers[markup.text] = None
                continue
            self._answers[markup.text] = (markup, numbers)

    def complete(self, context: str, max_new_tokens: int, stop: Sequence[str]) -> str:
        _, input_text, prefix = split_context(context)
        if input_text not in self._answers:
            raise BackendError("input not found in the gold document")
        entry = self._answers[input_text]
        if entry is None:
            raise BackendError("input occurs twice in the gold document with different answers")
        markup, numbers = entry
        try:
            k = pending_slot(prefix, markup)
        except MarkupError as e:
            raise BackendError(str(e)) from None
        return str(numbers[k])


def oracle_backend(gold: Document, instruction: str, config: FramingConfig = FramingConfig()) -> OracleBackend:
    return OracleBackend(gold, instruction, config)


class RemoteBackend:
    """Completion client for a JSON endpoint: ``{"prompt", "max_tokens", "stop"}`` in, ``{"text"}`` out."""

    def __init__(
        self,
        endpoint: str,
        token: str | None = None,
        timeout: float = 30.0,
        retries: int = 3,
        backoff: float = 0.5,
        client=None,
    ):
        import httpx

        self.endpoint = endpoint
        self.token = token
        self.retries = retries
        self.backoff = backoff
        self._httpx = httpx
        self._client = client or httpx.Client(timeout=timeout)

    def _request(self, context: str, max_new_tokens: int, stop: Sequence[str]) -> str:
        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        body = {"prompt": context, "max_tokens": max_new_tokens, "stop": list(stop)}
        response = self._client.post(self.endpoint, json=body, headers=headers)
        response.raise_for_status()
        payload = response.json()
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise ValueError(f"malformed response body: {response.text[:80]!r}")
        return payload["text"]

    def complete(self, context: str, max_new_tokens: int, stop: Sequence[str]) -> str:
        last = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                text = self._request(context, max_new_tokens, stop)
                break
            except (self._httpx.HTTPError, self._httpx.InvalidURL, ValueError) as e:
                last = e
                logger.warning("request to %s failed (attempt %d): %s", self.endpoint, attempt + 1, e)
        else:
            raise BackendError(f"{self.endpoint}: {last}")
        return _apply_stop(text, stop)

    def close(self):
        self._client.close()


def _apply_stop(text: str, stop: Sequence[str]) -> str:
    cut = len(text)
    for s in stop:
        i = text.find(s)
        if i != -1:
            cut = min(cut, i)
    return text[:cut]


def remote_backend(endpoint: str, token: str | None = None, **kwargs) -> RemoteBackend:
    return RemoteBackend(endpoint, token, **kwargs)
