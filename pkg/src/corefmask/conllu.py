"""CoNLL-U documents with CorefUD-style ``Entity`` annotations.

Only the FORM and MISC columns are interpreted; every other column, comment
and multiword-token range line is carried verbatim so that an unmodified
document serializes back to the exact bytes it was read from.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

logger = logging.getLogger(__name__)

OVERT = "overt"
ZERO = "zero"

_NEWDOC_RE = re.compile(r"^#\s*newdoc(?:\s+id\s*=\s*(.*?))?\s*$")
_SENT_ID_RE = re.compile(r"^#\s*sent_id\s*=\s*(.*?)\s*$")
_REGULAR_ID_RE = re.compile(r"^[1-9][0-9]*$")
_EMPTY_ID_RE = re.compile(r"^([0-9]+)\.([1-9][0-9]*)$")
_RANGE_ID_RE = re.compile(r"^[1-9][0-9]*-[1-9][0-9]*$")

# (e1-opaque...  (e1)  e1)   with an optional discontinuity marker [k/n]
_ENTITY_ITEM_RE = re.compile(
    r"\((?P<open>[A-Za-z0-9_]+)(?P<opart>\[[0-9]+/[0-9]+\])?(?P<rest>-[^()]*)?(?P<single>\))?"
    r"|(?P<close>[A-Za-z0-9_]+)(?P<cpart>\[[0-9]+/[0-9]+\])?\)"
)


class ConlluError(ValueError):
    """Malformed CoNLL-U input or an entity annotation that cannot be encoded."""


class TokenId(NamedTuple):
    """Node id inside a sentence; ``empty_sub_index`` 0 marks a regular token."""

    word_index: int
    empty_sub_index: int = 0

    @property
    def is_empty(self) -> bool:
        return self.empty_sub_index > 0

    def __str__(self) -> str:
        if self.empty_sub_index:
            return f"{self.word_index}.{self.empty_sub_index}"
        return str(self.word_index)

    @classmethod
    def parse(cls, text: str) -> "TokenId":
        if _REGULAR_ID_RE.match(text):
            return cls(int(text))
        m = _EMPTY_ID_RE.match(text)
        if m:
            return cls(int(m.group(1)), int(m.group(2)))
        raise ValueError(f"not a node id: {text!r}")


@dataclass(frozen=True)
class Token:
    id: TokenId
    columns: tuple[str, ...]

    @property
    def form(self) -> str:
        return self.columns[1]

    @property
    def misc(self) -> tuple[str, ...]:
        value = self.columns[9]
        return () if value == "_" else tuple(value.split("|"))

    @property
    def entity(self) -> str | None:
        for item in self.misc:
            if item.startswith("Entity="):
                return item[len("Entity="):]
        return None

    def with_entity(self, value: str | None) -> "Token":
        """Return a copy whose ``Entity`` MISC value is ``value`` (removed if None)."""
        items = list(self.misc)
        idx = next((i for i, item in enumerate(items) if item.startswith("Entity=")), None)
        if value is None:
            if idx is not None:
                del items[idx]
        elif idx is not None:
            items[idx] = f"Entity={value}"
        else:
            items.append(f"Entity={value}")
        misc = "|".join(items) if items else "_"
        if misc == self.columns[9]:
            return self
        return replace(self, columns=self.columns[:9] + (misc,))

    def line(self) -> str:
        return "\t".join(self.columns)


@dataclass(frozen=True)
class Sentence:
    comments: tuple[str, ...]
    tokens: tuple[Token, ...]
    # multiword range lines, keyed by the index of the token they precede
    ranges: tuple[tuple[int, str], ...] = ()

    @property
    def sent_id(self) -> str:
        for line in self.comments:
            m = _SENT_ID_RE.match(line)
            if m:
                return m.group(1)
        return ""

    @property
    def regular_tokens(self) -> list[Token]:
        return [t for t in self.tokens if not t.id.is_empty]

    def index_of(self, token_id: TokenId) -> int:
        for i, token in enumerate(self.tokens):
            if token.id == token_id:
                return i
        raise KeyError(token_id)

    def lines(self) -> list[str]:
        out = list(self.comments)
        ranges = dict(self.ranges)
        for i, token in enumerate(self.tokens):
            if i in ranges:
                out.append(ranges[i])
            out.append(token.line())
        return out


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...]
    # None: synthesize a "# newdoc" line when no sentence comment carries one
    header: tuple[str, ...] | None = None


Position = tuple[int, TokenId, TokenId]


@dataclass(frozen=True)
class Mention:
    """An overt span or a zero (empty-node) mention inside one sentence."""

    sentence: int
    start: TokenId
    end: TokenId
    kind: str = OVERT
    entity_id: str | None = None

    @property
    def position(self) -> Position:
        return (self.sentence, self.start, self.end)

    @property
    def sort_key(self) -> tuple:
        # enclosing spans precede enclosed ones
        return (self.sentence, self.start, -self.end.word_index, -self.end.empty_sub_index)

    def with_entity(self, entity_id: str | None) -> "Mention":
        return replace(self, entity_id=entity_id)

    def __str__(self) -> str:
        span = str(self.start) if self.start == self.end else f"{self.start}-{self.end}"
        return f"s{self.sentence}:{span}"


def mention_kind(start: TokenId, end: TokenId) -> str:
    return ZERO if start == end and start.is_empty else OVERT


# --------------------------------------------------------------------------
# reading and writing


def parse_document(text: str) -> list[Document]:
    """Parse CoNLL-U text into documents, keeping everything needed for a lossless round trip."""
    docs: list[Document] = []
    doc_id: str | None = None
    sentences: list[Sentence] = []
    comments: list[str] = []
    tokens: list[Token] = []
    ranges: list[tuple[int, str]] = []

    def close_doc():
        nonlocal doc_id, sentences
        if doc_id is not None or sentences:
            docs.append(Document(doc_id or "", tuple(sentences), header=()))
        doc_id, sentences = None, []

    def finish_sentence():
        nonlocal doc_id
        for line in comments:
            m = _NEWDOC_RE.match(line)
            if m:
                close_doc()
                doc_id = m.group(1) or ""
                break
        sentences.append(Sentence(tuple(comments), tuple(tokens), tuple(ranges)))
        comments.clear()
        tokens.clear()
        ranges.clear()

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, 1):
        if line == "":
            if tokens:
                finish_sentence()
            continue
        if line.startswith("#"):
            if tokens:
                raise ConlluError(f"line {lineno}: comment inside a sentence")
            if _NEWDOC_RE.match(line) and any(_NEWDOC_RE.match(c) for c in comments):
                # previous newdoc block had no sentences
                close_doc()
                docs.append(_empty_document(comments))
                comments.clear()
            comments.append(line)
            continue
        columns = tuple(line.split("\t"))
        if len(columns) != 10:
            raise ConlluError(f"line {lineno}: expected 10 tab-separated columns, got {len(columns)}")
        if _RANGE_ID_RE.match(columns[0]):
            ranges.append((len(tokens), line))
            continue
        try:
            token_id = TokenId.parse(columns[0])
        except ValueError:
            raise ConlluError(f"line {lineno}: invalid token id {columns[0]!r}") from None
        if tokens and token_id <= tokens[-1].id:
            raise ConlluError(f"line {lineno}: token id {token_id} does not follow {tokens[-1].id}")
        if not token_id.is_empty and token_id.word_index != (
            max((t.id.word_index for t in tokens if not t.id.is_empty), default=0) + 1
        ):
            raise ConlluError(f"line {lineno}: token id {token_id} out of sequence")
        tokens.append(Token(token_id, columns))
    if tokens:
        finish_sentence()
    close_doc()
    if comments:
        if any(_NEWDOC_RE.match(c) for c in comments):
            docs.append(_empty_document(comments))
        else:
            raise ConlluError("trailing comment lines without a sentence")
    return docs


def _empty_document(comments: Iterable[str]) -> Document:
    header = tuple(comments)
    doc_id = ""
    for line in header:
        m = _NEWDOC_RE.match(line)
        if m:
            doc_id = m.group(1) or ""
    return Document(doc_id, (), header=header)


def serialize_document(doc: Document) -> str:
    lines: list[str] = []
    if doc.header is not None:
        lines.extend(doc.header)
    elif not any(_NEWDOC_RE.match(c) for s in doc.sentences for c in s.comments):
        lines.append(f"# newdoc id = {doc.doc_id}")
    for sentence in doc.sentences:
        lines.extend(sentence.lines())
        lines.append("")
    return "".join(line + "\n" for line in lines)


def serialize_documents(docs: Iterable[Document]) -> str:
    return "".join(serialize_document(doc) for doc in docs)


def read_conllu(path) -> list[Document]:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_document(f.read())


def write_conllu(path, docs: Iterable[Document]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(serialize_documents(docs))


# --------------------------------------------------------------------------
# entity annotations


def parse_entity_value(value: str) -> list[tuple[str, str, str | None]]:
    """Split an ``Entity`` value into ``(kind, eid, part)`` items, kind in open/close/single."""
    items = []
    pos = 0
    while pos < len(value):
        m = _ENTITY_ITEM_RE.match(value, pos)
        if not m:
            raise ConlluError(f"unreadable Entity value {value!r} at offset {pos}")
        if m.group("open"):
            kind = "single" if m.group("single") else "open"
            items.append((kind, m.group("open"), m.group("opart")))
        else:
            items.append(("close", m.group("close"), m.group("cpart")))
        pos = m.end()
    return items


def extract_mentions(doc: Document, diagnostics: list[str] | None = None) -> list[Mention]:
    """Read every mention from the ``Entity`` brackets of ``doc``.

    Discontinuous mentions are reduced to their first part and crossing
    mentions are dropped; both are reported through ``diagnostics`` and the
    module logger.
    """

    def note(msg):
        logger.warning(msg)
        if diagnostics is not None:
            diagnostics.append(msg)

    found: list[Mention] = []
    open_spans: dict[tuple[str, str | None], list[tuple[int, TokenId]]] = {}
    for s_idx, sentence in enumerate(doc.sentences):
        for token in sentence.tokens:
            value = token.entity
            if value is None:
                continue
            try:
                items = parse_entity_value(value)
            except ConlluError as e:
                raise ConlluError(f"sentence {s_idx} token {token.id}: {e}") from None
            for kind, eid, part in items:
                if kind in ("open", "single"):
                    open_spans.setdefault((eid, part), []).append((s_idx, token.id))
                if kind in ("close", "single"):
                    stack = open_spans.get((eid, part))
                    if not stack:
                        raise ConlluError(
                            f"sentence {s_idx} token {token.id}: closing bracket for {eid} before any opening"
                        )
                    start_sent, start = stack.pop()
                    if start_sent != s_idx:
                        raise ConlluError(
                            f"mention of {eid} starting in sentence {start_sent} ends in sentence {s_idx}"
                        )
                    if part is not None:
                        k = part[1:-1].split("/")[0]
                        note(f"discontinuous mention of {eid} part {part} in sentence {s_idx}"
                             + (" reduced to its first part" if k == "1" else " dropped"))
                        if k != "1":
                            continue
                    found.append(Mention(s_idx, start, token.id, mention_kind(start, token.id), eid))
    unmatched = sorted({eid for (eid, _), stack in open_spans.items() if stack})
    if unmatched:
        raise ConlluError(f"unclosed entity brackets for: {', '.join(unmatched)}")

    found.sort(key=lambda m: m.sort_key)
    seen: dict[tuple, Mention] = {}
    for m in found:
        key = (m.kind, m.position)
        if key in seen:
            raise ConlluError(f"duplicate mention at {m} ({seen[key].entity_id} and {m.entity_id})")
        seen[key] = m

    kept: list[Mention] = []
    for m in found:
        clash = next((k for k in kept if k.sentence == m.sentence and _crossing(k, m)), None)
        if clash is not None:
            note(f"crossing mentions {clash} ({clash.entity_id}) and {m} ({m.entity_id}); dropped the latter")
            continue
        kept.append(m)
    return kept


def _crossing(a: Mention, b: Mention) -> bool:
    if a.sentence != b.sentence:
        return False
    if a.start > b.start or (a.start == b.start and a.end < b.end):
        a, b = b, a
    return b.start <= a.end < b.end and a.start < b.start


def find_crossing(mentions: Iterable[Mention]) -> tuple[Mention, Mention] | None:
    by_sentence: dict[int, list[Mention]] = {}
    for m in mentions:
        by_sentence.setdefault(m.sentence, []).append(m)
    for group in by_sentence.values():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if _crossing(a, b):
                    return a, b
    return None


def write_entities(doc: Document, mentions: Iterable[Mention]) -> Document:
    """Replace all ``Entity`` values in ``doc`` with brackets encoding ``mentions``."""
    mentions = list(mentions)
    pair = find_crossing(mentions)
    if pair is not None:
        raise ConlluError(f"crossing mentions cannot be encoded: {pair[0]} and {pair[1]}")

    opens: dict[tuple[int, TokenId], list[Mention]] = {}
    closes: dict[tuple[int, TokenId], list[Mention]] = {}
    for m in mentions:
        if not m.entity_id:
            raise ConlluError(f"mention {m} has no entity id")
        if not 0 <= m.sentence < len(doc.sentences):
            raise ConlluError(f"mention {m} outside the document")
        sentence = doc.sentences[m.sentence]
        try:
            sentence.index_of(m.start)
            sentence.index_of(m.end)
        except KeyError:
            raise ConlluError(f"mention {m} refers to a missing token") from None
        if m.end < m.start:
            raise ConlluError(f"mention {m} ends before it starts")
        opens.setdefault((m.sentence, m.start), []).append(m)
        closes.setdefault((m.sentence, m.end), []).append(m)

    new_sentences = []
    for s_idx, sentence in enumerate(doc.sentences):
        new_tokens = []
        for token in sentence.tokens:
            here_open = sorted(opens.get((s_idx, token.id), []), key=lambda m: m.end, reverse=True)
            here_close = sorted(closes.get((s_idx, token.id), []), key=lambda m: m.start, reverse=True)
            parts = []
            for m in here_open:
                parts.append(f"({m.entity_id}")
            for m in here_close:
                if m.start == m.end and parts and parts[-1] == f"({m.entity_id}":
                    parts[-1] += ")"
                else:
                    parts.append(f"{m.entity_id})")
            new_tokens.append(token.with_entity("".join(parts) if parts else None))
        new_sentences.append(replace(sentence, tokens=tuple(new_tokens)))
    return replace(doc, sentences=tuple(new_sentences))
