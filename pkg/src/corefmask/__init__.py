"""Instruction-style coreference linking harness over CorefUD CoNLL-U files."""

from .conllu import (
    ConlluError,
    Document,
    Mention,
    Sentence,
    Token,
    TokenId,
    extract_mentions,
    parse_document,
    read_conllu,
    serialize_document,
    write_conllu,
    write_entities,
)
from .framing import FramingConfig, build_frames, build_tuples, export_training_tuples
from .inference import oracle_backend, remote_backend, replay_backend, run_controlled_inference
from .instructions import InstructionSpec, render_instruction
from .markup import parse_filled_output, render_masked_sentence, render_output_sentence
from .merge import apply_to_document, merge_document, merge_tuple, seed_global
from .scorer import b_cubed, ceaf_e, conll_score, muc, zero_anaphor_score

__version__ = "0.1.0"
