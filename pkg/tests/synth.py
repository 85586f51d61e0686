"""Random CoNLL-U documents with coreference annotation for tests."""

from __future__ import annotations

import random

from corefmask.conllu import (
    OVERT,
    ZERO,
    Document,
    Mention,
    Sentence,
    Token,
    TokenId,
    find_crossing,
    write_entities,
)

VOCAB = ["ana", "bo", "ces", "dur", "el", "fin", "ga", "hut", "iri", "jo", "ka", "lum", "mo", ",", "."]


def _token(token_id: TokenId, form: str) -> Token:
    return Token(token_id, (str(token_id), form, "_", "_", "_", "_", "_", "_", "_", "_"))


def random_sentence(rng: random.Random, n_words: int, zero_prob: float = 0.2) -> Sentence:
    tokens = []
    for i in range(1, n_words + 1):
        tokens.append(_token(TokenId(i), rng.choice(VOCAB)))
        sub = 1
        while rng.random() < zero_prob and sub <= 2:
            tokens.append(_token(TokenId(i, sub), rng.choice(["pro", "_"])))
            sub += 1
    return Sentence((), tuple(tokens))


def random_spans(rng: random.Random, sentence: Sentence, s_idx: int, n: int, zero_keep: float = 0.8) -> list[Mention]:
    """Up to ``n`` non-crossing overt spans plus most empty nodes as zeros."""
    regular = [t.id for t in sentence.tokens if not t.id.is_empty]
    ids = [t.id for t in sentence.tokens]
    mentions: list[Mention] = []
    for t in sentence.tokens:
        if t.id.is_empty and rng.random() < zero_keep:
            mentions.append(Mention(s_idx, t.id, t.id, ZERO))
    for _ in range(4 * n):
        if sum(m.kind == OVERT for m in mentions) >= n:
            break
        a = rng.randrange(len(regular))
        b = min(len(regular) - 1, a + rng.choice([0, 0, 1, 2, 3]))
        cand = Mention(s_idx, regular[a], regular[b], OVERT)
        if any(m.position == cand.position for m in mentions):
            continue
        if find_crossing(mentions + [cand]) is None:
            mentions.append(cand)
    mentions.sort(key=lambda m: ids.index(m.start))
    return mentions


def random_document(
    rng: random.Random,
    n_sentences: int,
    words=(3, 9),
    mentions_per_sentence=(1, 4),
    zero_prob: float = 0.2,
    contiguous: bool = False,
    n_entities: int = 4,
    doc_id: str = "doc",
) -> Document:
    """A document with random mentions.

    With ``contiguous`` every entity has a mention in every sentence between
    its first and last one, so no sentence-aligned framing can break its chain.
    """
    sentences = []
    slots: list[list[Mention]] = []
    for s in range(n_sentences):
        sent = random_sentence(rng, rng.randint(*words), zero_prob)
        if s == 0:
            sent = Sentence((f"# newdoc id = {doc_id}", f"# sent_id = {doc_id}-{s + 1}"), sent.tokens)
        else:
            sent = Sentence((f"# sent_id = {doc_id}-{s + 1}",), sent.tokens)
        sentences.append(sent)
        spans = random_spans(rng, sent, s, rng.randint(*mentions_per_sentence))
        if not spans:
            first = sent.tokens[0].id
            spans = [Mention(s, first, first, OVERT)]
        slots.append(spans)

    labelled: list[Mention] = []
    if contiguous:
        active: list[str] = []
        counter = 0
        for spans in slots:
            order = list(range(len(spans)))
            rng.shuffle(order)
            keep = [e for e in active if rng.random() < 0.7][: len(spans)]
            labels: list[str | None] = [None] * len(spans)
            for e, i in zip(keep, order):
                labels[i] = e
            for i in order[len(keep):]:
                if keep and rng.random() < 0.5:
                    labels[i] = rng.choice(keep)
                else:
                    labels[i] = f"x{counter}"
                    counter += 1
            active = sorted(set(labels), key=lambda e: int(e[1:]))
            labelled.extend(m.with_entity(lbl) for m, lbl in zip(spans, labels))
    else:
        for spans in slots:
            labelled.extend(m.with_entity(f"x{rng.randrange(n_entities)}") for m in spans)

    # guarantee at least one coreference link
    if len({m.entity_id for m in labelled}) == len(labelled) and len(labelled) > 1:
        labelled[1] = labelled[1].with_entity(labelled[0].entity_id)
    elif len(labelled) == 1:
        s0 = sentences[0]
        last = s0.regular_tokens[-1].id
        if labelled[0].position != (0, last, last) and find_crossing(labelled + [Mention(0, last, last)]) is None:
            labelled.append(Mention(0, last, last, OVERT, labelled[0].entity_id))

    doc = Document(doc_id, tuple(sentences), header=())
    return write_entities(doc, labelled)
