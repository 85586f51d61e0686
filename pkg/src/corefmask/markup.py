"""Masked mention markup.

Overt mentions are wrapped as ``<m> words </m>#MASK`` and zero mentions are
written as ``</z>@MASK`` where the dropped pronoun sits.  Each ``MASK`` is a
slot the model fills with a cluster number that is local to one input.

Slots remember the character offset of their ``MASK`` so filling and reading
back never has to search the text, which keeps token forms that happen to
look like markup harmless.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .conllu import OVERT, ZERO, Mention, Position, Sentence, find_crossing

MASK = "MASK"
OPEN_TAG = "<m>"
OVERT_CLOSE = "</m>#"
ZERO_CLOSE = "</z>@"

_NUMBER_RE = re.compile(r"[0-9]+")


class MarkupError(ValueError):
    pass


@dataclass(frozen=True)
class MaskSlot:
    slot_index: int
    mention: Mention
    kind: str
    offset: int  # character offset of MASK in the owning text

    @property
    def position(self) -> Position:
        return self.mention.position


@dataclass(frozen=True)
class MaskedSentence:
    text: str
    slots: tuple[MaskSlot, ...] = ()


def join_markup(parts: Sequence[MaskedSentence], sep: str = " ") -> MaskedSentence:
    """Concatenate markup pieces, renumbering slots and shifting their offsets."""
    texts = []
    slots = []
    shift = 0
    for i, part in enumerate(parts):
        if i:
            texts.append(sep)
            shift += len(sep)
        texts.append(part.text)
        for slot in part.slots:
            slots.append(replace(slot, slot_index=len(slots), offset=slot.offset + shift))
        shift += len(part.text)
    return MaskedSentence("".join(texts), tuple(slots))


def render_masked_sentence(sentence: Sentence, mentions: Iterable[Mention]) -> MaskedSentence:
    mentions = list(mentions)
    pair = find_crossing(mentions)
    if pair is not None:
        raise MarkupError(f"crossing mentions {pair[0]} and {pair[1]}")
    opens: dict = {}
    closes: dict = {}
    zeros: dict = {}
    for m in mentions:
        if m.kind == ZERO:
            if m.start != m.end or not m.start.is_empty:
                raise MarkupError(f"zero mention {m} is not a single empty node")
            if m.start in zeros:
                raise MarkupError(f"two zero mentions at {m}")
            zeros[m.start] = m
        else:
            opens.setdefault(m.start, []).append(m)
            closes.setdefault(m.end, []).append(m)

    known = {t.id for t in sentence.tokens}
    for m in mentions:
        if m.start not in known or m.end not in known:
            raise MarkupError(f"mention {m} is outside the sentence")

    pieces: list[str] = []
    slots: list[MaskSlot] = []
    length = 0

    def emit(piece: str, mention: Mention | None = None, kind: str = OVERT):
        nonlocal length
        if pieces:
            length += 1
        if mention is not None:
            offset = length + len(piece) - len(MASK)
            slots.append(MaskSlot(len(slots), mention, kind, offset))
        pieces.append(piece)
        length += len(piece)

    for token in sentence.tokens:
        for m in sorted(opens.get(token.id, ()), key=lambda m: m.end, reverse=True):
            emit(OPEN_TAG)
        if not token.id.is_empty:
            emit(token.form)
        elif token.id in zeros:
            emit(ZERO_CLOSE + MASK, zeros[token.id], ZERO)
        for m in sorted(closes.get(token.id, ()), key=lambda m: m.start, reverse=True):
            emit(OVERT_CLOSE + MASK, m, OVERT)
    return MaskedSentence(" ".join(pieces), tuple(slots))


def fill_slots(reference: MaskedSentence, numbers: Sequence[int]) -> str:
    """Replace each MASK of ``reference`` with the number at the same slot index."""
    if len(numbers) != len(reference.slots):
        raise MarkupError(f"{len(numbers)} numbers for {len(reference.slots)} slots")
    out = []
    prev = 0
    for slot, number in zip(reference.slots, numbers):
        if number is None or int(number) < 0:
            raise MarkupError(f"slot {slot.slot_index} has no cluster number")
        out.append(reference.text[prev:slot.offset])
        out.append(str(int(number)))
        prev = slot.offset + len(MASK)
    out.append(reference.text[prev:])
    return "".join(out)


def render_output_sentence(
    sentence: Sentence, mentions: Iterable[Mention], numbers: Mapping[Position, int]
) -> str:
    masked = render_masked_sentence(sentence, mentions)
    values = []
    for slot in masked.slots:
        if slot.position not in numbers:
            raise MarkupError(f"mention {slot.mention} has no cluster number")
        values.append(numbers[slot.position])
    return fill_slots(masked, values)


def parse_filled_output(filled: str, reference: MaskedSentence) -> list[tuple[int, int]]:
    """Read the number written at every slot of ``reference`` in ``filled``."""
    result = []
    pos = 0
    prev = 0
    for slot in reference.slots:
        segment = reference.text[prev:slot.offset]
        if not filled.startswith(segment, pos):
            raise MarkupError(f"slot {slot.slot_index}: text before the slot differs from the input")
        pos += len(segment)
        m = _NUMBER_RE.match(filled, pos)
        if not m:
            raise MarkupError(f"slot {slot.slot_index}: expected a cluster number, got {filled[pos:pos + 10]!r}")
        result.append((slot.slot_index, int(m.group())))
        pos = m.end()
        prev = slot.offset + len(MASK)
    if filled[pos:] != reference.text[prev:]:
        raise MarkupError("text after the last slot differs from the input")
    return result


def pending_slot(prefix: str, reference: MaskedSentence) -> int:
    """Index of the slot a partially filled ``prefix`` stops at (just before its MASK)."""
    pos = 0
    prev = 0
    for slot in reference.slots:
        segment = reference.text[prev:slot.offset]
        if not prefix.startswith(segment, pos):
            break
        pos += len(segment)
        if pos == len(prefix):
            return slot.slot_index
        m = _NUMBER_RE.match(prefix, pos)
        if not m:
            break
        pos = m.end()
        prev = slot.offset + len(MASK)
    raise MarkupError("prefix does not end at a slot of the reference markup")


def strip_markup(text: str) -> list[str]:
    """Token forms left after removing tags, zero markers and slot contents."""
    words = []
    for piece in text.split(" "):
        if piece == OPEN_TAG or piece.startswith(ZERO_CLOSE) or piece.startswith(OVERT_CLOSE):
            continue
        words.append(piece)
    return words
