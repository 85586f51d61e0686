"""The five instruction sets used to prompt the resolver."""

from __future__ import annotations

from dataclasses import dataclass

ZERO_SUFFIX = (
    "Where you see </z>@ there is a zero mention, which is normally not written "
    "but you also need to link them with other mentions."
)

_TEMPLATES = {
    1: (
        "The text is in {language}.\n"
        "You are a coreference resolver.\n"
        "Rewrite the sentence considering these rules:\n"
        "Mentions are in <m>...</m>#MASK format.\n"
        "Group the mentions that refer to same real-world entity.\n"
        "If mentions refer to same thing write the same number instead of MASK.\n"
        "If mentions represent different things write another number."
    ),
    2: (
        "Identify instances of coreference where different mentions refer to the same entity.\n"
        "Rewrite the passage, tagging each term with a unique identifier and indicating "
        "coreferential relationships.\n"
        "Ensure accuracy and consider context.\n"
        "Fill MASK with unique number for every entity. Be sure that they represent exactly "
        "the same entity, not similar.\n"
        "Example output format:\n"
        "... <m>Bertrand Russell </m>#MASK is a good author, I love "
        "<m>The History of Western Philosophy </m>#MASK ...\n"
        "... <m>Bertrand Russell </m>#0 is good author,  I love "
        "<m>The History of Western Philosophy </m>#1 ..."
    ),
    3: (
        "For every mention in <m> </m> tags examine if there is any coreferential/coherent mention.\n"
        "If two mentions represent the same entity write the same number instead of MASK "
        "after closing mention tag </m>.\n"
        "Do not change anything else other than MASK."
    ),
    4: (
        "For every mention in <m> </m> tags examine if there is any coreferential mention.\n"
        "If two mentions represent the same entity write the same number instead of MASK "
        "after closing mention tag </m>.\n"
        "For example: author and book represent different entities.\n"
        "Do not change anything else other than MASK."
    ),
    5: (
        "For every mention in <m> </m> tags examine if there is any coreferential/coherent mention.\n"
        "If two mentions represent the same entity write the same number instead of MASK "
        "after closing mention tag </m>.\n"
        "For example: author and book represent different entities.\n"
        "Do not change anything else other than MASK."
    ),
}


@dataclass(frozen=True)
class InstructionSpec:
    id: int = 5
    language_name: str = "English"
    include_zero_suffix: bool = False


def render_instruction(spec: InstructionSpec) -> str:
    if spec.id not in _TEMPLATES:
        raise ValueError(f"instruction id must be 1..5, got {spec.id}")
    text = _TEMPLATES[spec.id].format(language=spec.language_name)
    if spec.include_zero_suffix:
        text += "\n" + ZERO_SUFFIX
    return text
