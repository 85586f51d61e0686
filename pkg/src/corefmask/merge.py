"""Merge per-input local cluster numbers into document-wide clusters.

Consecutive inputs share a frame.  The shared frame already carries global
numbers from the previous input, which tells us what each local number of the
current input means; local numbers never seen in the shared frame open a new
global cluster.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .conllu import Document, Mention, Position, mention_kind, write_entities

logger = logging.getLogger(__name__)

FrameAssignments = Sequence[tuple[Position, int]]


class ChainIntegrityError(ValueError):
    pass


@dataclass
class GlobalClusterMap:
    clusters: dict[Position, int] = field(default_factory=dict)
    next_fresh: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def copy(self) -> "GlobalClusterMap":
        return GlobalClusterMap(dict(self.clusters), self.next_fresh, list(self.diagnostics))

    def fresh(self) -> int:
        value = self.next_fresh
        self.next_fresh += 1
        return value

    def groups(self) -> list[set[Position]]:
        by_number: dict[int, set[Position]] = {}
        for pos, g in self.clusters.items():
            by_number.setdefault(g, set()).add(pos)
        return [by_number[g] for g in sorted(by_number)]


def seed_global(first_frame: FrameAssignments) -> GlobalClusterMap:
    globals_ = GlobalClusterMap()
    local_to_global: dict[int, int] = {}
    for pos, local in first_frame:
        if pos in globals_.clusters:
            raise ChainIntegrityError(f"duplicate mention position {_fmt(pos)} in the first frame")
        if local not in local_to_global:
            local_to_global[local] = globals_.fresh()
        globals_.clusters[pos] = local_to_global[local]
    return globals_


def merge_tuple(
    globals_: GlobalClusterMap, before: FrameAssignments, after: FrameAssignments | None
) -> GlobalClusterMap:
    merged = globals_.copy()
    mapping: dict[int, int] = {}
    for pos, local in before:
        if pos not in merged.clusters:
            raise ChainIntegrityError(f"mention {_fmt(pos)} of the shared frame has no global cluster")
        g = merged.clusters[pos]
        if local in mapping and mapping[local] != g:
            msg = (f"local cluster {local} covers global clusters {mapping[local]} and {g} "
                   f"in the shared frame; {_fmt(pos)} decides")
            logger.warning(msg)
            merged.diagnostics.append(msg)
        mapping[local] = g
    for pos, local in after or ():
        if local not in mapping:
            mapping[local] = merged.fresh()
        merged.clusters[pos] = mapping[local]
    return merged


def merge_document(
    per_tuple: Sequence[tuple[FrameAssignments, FrameAssignments | None]]
) -> GlobalClusterMap:
    if not per_tuple:
        return GlobalClusterMap()
    globals_ = seed_global(per_tuple[0][0])
    for k, (before, after) in enumerate(per_tuple):
        if k:
            previous_after = per_tuple[k - 1][1] or ()
            if [p for p, _ in before] != [p for p, _ in previous_after]:
                raise ChainIntegrityError(f"input {k} does not start with the frame input {k - 1} ended with")
        globals_ = merge_tuple(globals_, before, after)
    return globals_


def apply_to_document(doc: Document, globals_: GlobalClusterMap) -> Document:
    mentions = [
        Mention(s, start, end, mention_kind(start, end), f"e{g}")
        for (s, start, end), g in globals_.clusters.items()
    ]
    return write_entities(doc, mentions)


@dataclass(frozen=True)
class ChainBreak:
    entity_id: str
    global_clusters: tuple[int, ...]
    gaps: tuple[tuple[int, int], ...]  # (last frame seen, next frame seen) with frames between empty

    def __str__(self) -> str:
        clusters = ", ".join(map(str, self.global_clusters))
        if self.gaps:
            where = "; ".join(f"no mention in frames {a + 1}..{b - 1} between frames {a} and {b}"
                              for a, b in self.gaps)
        else:
            where = "no frame gap, predictions disagree"
        return f"chain break: entity {self.entity_id} split into global clusters {clusters} ({where})"


def find_chain_breaks(
    mentions: Iterable[Mention], globals_: GlobalClusterMap, frame_of: dict[Position, int]
) -> list[ChainBreak]:
    """Entities of the input annotation that ended up in more than one global cluster."""
    by_entity: dict[str, list[Mention]] = {}
    for m in mentions:
        if m.entity_id is not None and m.position in globals_.clusters:
            by_entity.setdefault(m.entity_id, []).append(m)
    breaks = []
    for entity, members in by_entity.items():
        clusters = sorted({globals_.clusters[m.position] for m in members})
        if len(clusters) < 2:
            continue
        frames = sorted({frame_of[m.position] for m in members if m.position in frame_of})
        gaps = tuple((a, b) for a, b in zip(frames, frames[1:]) if b - a > 1)
        breaks.append(ChainBreak(entity, tuple(clusters), gaps))
    return breaks


def _fmt(pos: Position) -> str:
    s, start, end = pos
    return f"s{s}:{start}" if start == end else f"s{s}:{start}-{end}"
