import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import synth
from corefmask.conllu import OVERT, ZERO, Mention, TokenId, extract_mentions, parse_document, read_conllu
from corefmask.markup import (
    MarkupError,
    fill_slots,
    parse_filled_output,
    pending_slot,
    render_masked_sentence,
    render_output_sentence,
    strip_markup,
)

FIXTURES = Path(__file__).parent / "fixtures"

HU_S1 = (
    "<m> Leges-legkedvesebb napom </m>#MASK az volt, <m> mikor </m>#MASK tavaly június 6.-án mentem a "
    "<m> T. sziklási Sport Klub </m>#MASK nagyobb tagjaival </z>@MASK és <m> Pista bácsival </m>#MASK "
    "<m> az országos váltóbajnokságra </m>#MASK ."
)
HU_S1_OUT = (
    "<m> Leges-legkedvesebb napom </m>#0 az volt, <m> mikor </m>#0 tavaly június 6.-án mentem a "
    "<m> T. sziklási Sport Klub </m>#1 nagyobb tagjaival </z>@1 és <m> Pista bácsival </m>#2 "
    "<m> az országos váltóbajnokságra </m>#3 ."
)


@pytest.fixture(scope="module")
def hungarian():
    [doc] = read_conllu(FIXTURES / "hu_sample.conllu")
    return doc, extract_mentions(doc)


def _sentence(words):
    rows = ["\t".join([str(i), w] + ["_"] * 8) for i, w in enumerate(words, 1)]
    [doc] = parse_document("\n".join(rows) + "\n\n")
    return doc.sentences[0]


def test_no_mentions_plain_text():
    sent = _sentence(["a", "b", "c"])
    masked = render_masked_sentence(sent, [])
    assert masked.text == "a b c" and masked.slots == ()
    assert render_output_sentence(sent, [], {}) == "a b c"
    assert parse_filled_output("a b c", masked) == []


def test_hungarian_sentence(hungarian):
    doc, mentions = hungarian
    masked = render_masked_sentence(doc.sentences[0], [m for m in mentions if m.sentence == 0])
    assert masked.text == HU_S1
    assert [s.kind for s in masked.slots] == [OVERT, OVERT, OVERT, ZERO, OVERT, OVERT]
    assert masked.text.count("#MASK") + masked.text.count("@MASK") == len(masked.slots)


def test_hungarian_output(hungarian):
    doc, mentions = hungarian
    s0 = [m for m in mentions if m.sentence == 0]
    gold = {"c1": 0, "c2": 1, "c3": 2, "c4": 3}
    numbers = {m.position: gold[m.entity_id] for m in s0}
    assert render_output_sentence(doc.sentences[0], s0, numbers) == HU_S1_OUT
    masked = render_masked_sentence(doc.sentences[0], s0)
    assert parse_filled_output(HU_S1_OUT, masked) == [(0, 0), (1, 0), (2, 1), (3, 1), (4, 2), (5, 3)]


def test_nested_inner_slot_first():
    sent = _sentence(["A", "B", "C"])
    outer = Mention(0, TokenId(1), TokenId(3), OVERT)
    inner = Mention(0, TokenId(2), TokenId(2), OVERT)
    masked = render_masked_sentence(sent, [outer, inner])
    assert masked.text == "<m> A <m> B </m>#MASK C </m>#MASK"
    assert [s.mention for s in masked.slots] == [inner, outer]
    assert parse_filled_output(fill_slots(masked, [4, 7]), masked) == [(0, 4), (1, 7)]


def test_shared_boundaries_follow_stack_order():
    sent = _sentence(["A", "B", "C"])
    spans = [Mention(0, TokenId(1), TokenId(3)), Mention(0, TokenId(1), TokenId(1)), Mention(0, TokenId(2), TokenId(3))]
    masked = render_masked_sentence(sent, spans)
    assert masked.text == "<m> <m> A </m>#MASK <m> B C </m>#MASK </m>#MASK"


def test_zeros_at_same_anchor_in_subindex_order():
    rows = ["1\ta" + "\t_" * 8, "1.1\tx" + "\t_" * 8, "1.2\ty" + "\t_" * 8, "2\tb" + "\t_" * 8]
    [doc] = parse_document("\n".join(rows) + "\n\n")
    z1 = Mention(0, TokenId(1, 1), TokenId(1, 1), ZERO)
    z2 = Mention(0, TokenId(1, 2), TokenId(1, 2), ZERO)
    masked = render_masked_sentence(doc.sentences[0], [z2, z1])
    assert masked.text == "a </z>@MASK </z>@MASK b"
    assert [s.mention for s in masked.slots] == [z1, z2]


def test_crossing_rejected():
    sent = _sentence(["A", "B", "C"])
    with pytest.raises(MarkupError):
        render_masked_sentence(sent, [Mention(0, TokenId(1), TokenId(2)), Mention(0, TokenId(2), TokenId(3))])


def test_missing_number_rejected():
    sent = _sentence(["A"])
    m = Mention(0, TokenId(1), TokenId(1))
    with pytest.raises(MarkupError, match="no cluster number"):
        render_output_sentence(sent, [m], {})


def test_non_integer_reports_slot():
    sent = _sentence(["A", "B"])
    masked = render_masked_sentence(sent, [Mention(0, TokenId(1), TokenId(1)), Mention(0, TokenId(2), TokenId(2))])
    with pytest.raises(MarkupError, match="slot 1"):
        parse_filled_output("<m> A </m>#0 <m> B </m>#x", masked)


def test_markup_lookalike_forms_are_harmless():
    sent = _sentence(["</m>#MASK", "B"])
    masked = render_masked_sentence(sent, [Mention(0, TokenId(2), TokenId(2))])
    filled = fill_slots(masked, [3])
    assert filled == "</m>#MASK <m> B </m>#3"
    assert parse_filled_output(filled, masked) == [(0, 3)]


def test_pending_slot():
    sent = _sentence(["A", "B"])
    masked = render_masked_sentence(sent, [Mention(0, TokenId(1), TokenId(1)), Mention(0, TokenId(2), TokenId(2))])
    assert pending_slot("<m> A </m>#", masked) == 0
    assert pending_slot("<m> A </m>#5 <m> B </m>#", masked) == 1
    with pytest.raises(MarkupError):
        pending_slot("<m> A </m>", masked)


def _random_case(seed):
    rng = random.Random(seed)
    sent = synth.random_sentence(rng, rng.randint(1, 12), zero_prob=0.25)
    mentions = synth.random_spans(rng, sent, 0, rng.randint(0, 6))
    return rng, sent, mentions


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_render_parse_inverse(seed):
    rng, sent, mentions = _random_case(seed)
    masked = render_masked_sentence(sent, mentions)
    assert len(masked.slots) == len(mentions)
    offsets = [s.offset for s in masked.slots]
    assert offsets == sorted(offsets)
    numbers = [rng.randrange(10) for _ in masked.slots]
    assert parse_filled_output(fill_slots(masked, numbers), masked) == list(enumerate(numbers))
    assert strip_markup(masked.text) == [t.form for t in sent.tokens if not t.id.is_empty]


def test_render_parse_inverse_500_sentences():
    for seed in range(500):
        rng, sent, mentions = _random_case(seed)
        masked = render_masked_sentence(sent, mentions)
        numbers = {m.position: rng.randrange(10) for m in mentions}
        filled = render_output_sentence(sent, mentions, numbers)
        assert parse_filled_output(filled, masked) == [(s.slot_index, numbers[s.position]) for s in masked.slots]
