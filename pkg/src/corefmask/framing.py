"""Length-budgeted frames and the overlapping two-frame inputs built from them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .conllu import Document, Mention, extract_mentions
from .instructions import InstructionSpec, render_instruction
from .markup import MaskedSentence, MaskSlot, fill_slots, join_markup, render_masked_sentence

MID = "[MID]"
MID_SEP = f" {MID} "

LengthFn = Callable[[str], int]


def whitespace_length(text: str) -> int:
    return len(text.split())


def char_length(text: str) -> int:
    return len(text)


LENGTH_FUNCTIONS: dict[str, LengthFn] = {
    "whitespace": whitespace_length,
    "chars": char_length,
}


class FramingError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    frame_index: int
    sentence_range: range
    markup: MaskedSentence

    @property
    def masked_text(self) -> str:
        return self.markup.text

    @property
    def slots(self) -> tuple[MaskSlot, ...]:
        return self.markup.slots


@dataclass(frozen=True)
class InputTuple:
    instruction: str
    before: Frame
    after: Frame | None = None

    @property
    def frames(self) -> tuple[Frame, ...]:
        return (self.before,) if self.after is None else (self.before, self.after)

    @property
    def markup(self) -> MaskedSentence:
        if self.after is None:
            return self.before.markup
        return join_markup([self.before.markup, self.after.markup], sep=MID_SEP)

    @property
    def joined_text(self) -> str:
        return self.markup.text

    @property
    def slots(self) -> tuple[MaskSlot, ...]:
        return self.markup.slots


@dataclass(frozen=True)
class FramingConfig:
    frame_budget: int = 1600
    tuple_budget: int = 7168
    length: str = "whitespace"

    @property
    def length_fn(self) -> LengthFn:
        try:
            return LENGTH_FUNCTIONS[self.length]
        except KeyError:
            raise FramingError(f"unknown length function {self.length!r}") from None

    def validate(self, instruction: str) -> None:
        """Reject budgets under which a pair of full frames could overflow a tuple."""
        if self.frame_budget <= 0 or self.tuple_budget <= 0:
            raise FramingError("budgets must be positive")
        fn = self.length_fn
        needed = 2 * self.frame_budget + fn(instruction) + fn(MID_SEP)
        if self.tuple_budget < needed:
            raise FramingError(
                f"tuple budget {self.tuple_budget} is below 2 x frame budget + instruction + separator = {needed}"
            )


def tuple_length(instruction: str, text: str, length_fn: LengthFn) -> int:
    return length_fn(instruction) + length_fn(text)


def build_frames(masked: Sequence[MaskedSentence], frame_budget: int, length_fn: LengthFn) -> list[Frame]:
    """Greedily pack whole sentences into frames no longer than ``frame_budget``."""
    if frame_budget <= 0:
        raise FramingError("frame budget must be positive")
    frames: list[Frame] = []
    start = 0
    current: list[MaskedSentence] = []

    def flush(stop):
        frames.append(Frame(len(frames), range(start, stop), join_markup(current)))

    for i, sentence in enumerate(masked):
        if length_fn(sentence.text) > frame_budget:
            raise FramingError(
                f"sentence {i} has length {length_fn(sentence.text)} and cannot fit a frame of {frame_budget}"
            )
        if current and length_fn(join_markup(current + [sentence]).text) > frame_budget:
            flush(i)
            start, current = i, []
        current.append(sentence)
    if current:
        flush(len(masked))
    return frames


def build_tuples(
    frames: Sequence[Frame], instruction: str, tuple_budget: int, length_fn: LengthFn = whitespace_length
) -> list[InputTuple]:
    if not frames:
        raise FramingError("no frames to pair")
    if len(frames) == 1:
        tuples = [InputTuple(instruction, frames[0])]
    else:
        tuples = [InputTuple(instruction, a, b) for a, b in zip(frames, frames[1:])]
    for t in tuples:
        size = tuple_length(instruction, t.joined_text, length_fn)
        if size > tuple_budget:
            pair = ", ".join(str(f.frame_index) for f in t.frames)
            raise FramingError(f"input for frames ({pair}) has length {size} over the tuple budget {tuple_budget}")
    return tuples


@dataclass
class FramedDocument:
    """Everything derived from one document before inference."""

    document: Document
    mentions: list[Mention]
    masked: list[MaskedSentence]
    frames: list[Frame]
    tuples: list[InputTuple]
    diagnostics: list[str] = field(default_factory=list)


def frame_document(
    doc: Document,
    instruction: str,
    config: FramingConfig = FramingConfig(),
    mentions: Iterable[Mention] | None = None,
) -> FramedDocument:
    diagnostics: list[str] = []
    if mentions is None:
        mentions = extract_mentions(doc, diagnostics)
    mentions = list(mentions)
    by_sentence: dict[int, list[Mention]] = {}
    for m in mentions:
        by_sentence.setdefault(m.sentence, []).append(m)
    masked = [render_masked_sentence(s, by_sentence.get(i, [])) for i, s in enumerate(doc.sentences)]
    fn = config.length_fn
    frames = build_frames(masked, config.frame_budget, fn)
    tuples = build_tuples(frames, instruction, config.tuple_budget, fn) if frames else []
    return FramedDocument(doc, mentions, masked, frames, tuples, diagnostics)


def gold_local_numbers(slots: Iterable[MaskSlot]) -> list[int]:
    """Number the entities behind ``slots`` 0, 1, 2, ... in order of first appearance."""
    local: dict[str, int] = {}
    numbers = []
    for slot in slots:
        entity = slot.mention.entity_id
        if entity is None:
            raise FramingError(f"mention {slot.mention} has no gold entity")
        numbers.append(local.setdefault(entity, len(local)))
    return numbers


def export_training_tuples(
    doc: Document, spec: InstructionSpec, config: FramingConfig = FramingConfig()
) -> list[dict[str, str]]:
    instruction = render_instruction(spec)
    framed = frame_document(doc, instruction, config)
    records = []
    for t in framed.tuples:
        markup = t.markup
        records.append({
            "instruction": instruction,
            "input": markup.text,
            "output": fill_slots(markup, gold_local_numbers(markup.slots)),
        })
    return records


def write_records(path, records: Iterable[dict[str, str]]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count
