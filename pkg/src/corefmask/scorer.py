"""Coreference metrics over exactly matched mention positions.

Scores are kept as exact fractions (numerator and denominator for precision
and recall) so that documents and datasets can be micro-averaged by summing
counts, and so that perfect output scores exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .conllu import ZERO, Document, extract_mentions, mention_kind

Entity = frozenset
Clustering = list  # list of frozensets of mention positions


@dataclass(frozen=True)
class PRF:
    p_num: Fraction = Fraction(0)
    p_den: Fraction = Fraction(0)
    r_num: Fraction = Fraction(0)
    r_den: Fraction = Fraction(0)

    @property
    def precision(self) -> Fraction:
        return self.p_num / self.p_den if self.p_den else Fraction(0)

    @property
    def recall(self) -> Fraction:
        return self.r_num / self.r_den if self.r_den else Fraction(0)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else Fraction(0)

    def __add__(self, other: "PRF") -> "PRF":
        return PRF(self.p_num + other.p_num, self.p_den + other.p_den,
                   self.r_num + other.r_num, self.r_den + other.r_den)


def clustering_from_mentions(mentions) -> Clustering:
    groups: dict[str, set] = {}
    for m in mentions:
        groups.setdefault(m.entity_id, set()).add(m.position)
    return [frozenset(g) for _, g in sorted(groups.items(), key=lambda kv: min(kv[1]))]


def clustering_from_document(doc: Document, diagnostics: list[str] | None = None) -> Clustering:
    return clustering_from_mentions(extract_mentions(doc, diagnostics))


def _index(clustering: Clustering) -> dict[Hashable, int]:
    return {m: i for i, entity in enumerate(clustering) for m in entity}


@dataclass(frozen=True)
class Alignment:
    matched: frozenset
    missing: frozenset
    spurious: frozenset


def align_mentions(key: Clustering, response: Clustering) -> Alignment:
    k = set().union(*key) if key else set()
    r = set().union(*response) if response else set()
    return Alignment(frozenset(k & r), frozenset(k - r), frozenset(r - k))


def _muc_side(gold: Clustering, other: Clustering) -> tuple[Fraction, Fraction]:
    other_of = _index(other)
    num = den = 0
    for entity in gold:
        # mentions absent from the other side each form their own partition
        parts = {other_of.get(m, ("missing", m)) for m in entity}
        num += len(entity) - len(parts)
        den += len(entity) - 1
    return Fraction(num), Fraction(den)


def muc(key: Clustering, response: Clustering) -> PRF:
    r_num, r_den = _muc_side(key, response)
    p_num, p_den = _muc_side(response, key)
    return PRF(p_num, p_den, r_num, r_den)


def _b3_side(gold: Clustering, other: Clustering) -> tuple[Fraction, Fraction]:
    other_of = _index(other)
    num = Fraction(0)
    den = 0
    for entity in gold:
        for m in entity:
            j = other_of.get(m)
            if j is not None:
                num += Fraction(len(entity & other[j]), len(entity))
            den += 1
    return num, Fraction(den)


def b_cubed(key: Clustering, response: Clustering) -> PRF:
    r_num, r_den = _b3_side(key, response)
    p_num, p_den = _b3_side(response, key)
    return PRF(p_num, p_den, r_num, r_den)


def phi4(k: frozenset, r: frozenset) -> Fraction:
    return Fraction(2 * len(k & r), len(k) + len(r))


def ceaf_e(key: Clustering, response: Clustering) -> PRF:
    total = Fraction(0)
    if key and response:
        weights = np.array([[float(phi4(k, r)) for r in response] for k in key])
        rows, cols = linear_sum_assignment(weights, maximize=True)
        total = sum((phi4(key[i], response[j]) for i, j in zip(rows, cols)), Fraction(0))
    return PRF(total, Fraction(len(response)), total, Fraction(len(key)))


def conll_score(muc_prf: PRF, b3_prf: PRF, ceaf_prf: PRF) -> Fraction:
    return (muc_prf.f1 + b3_prf.f1 + ceaf_prf.f1) / 3


def _zero_correct(z, own: frozenset, other: frozenset) -> bool:
    own_before = {m for m in own if _precedes(m, z)}
    other_before = {m for m in other if _precedes(m, z)}
    if not own_before and not other_before:
        # a zero that opens its entity is right when both sides agree it is new
        return True
    return bool(own_before & other_before)


def _precedes(m, z) -> bool:
    return (m[0], m[1]) < (z[0], z[1])


def zero_anaphor_score(key: Clustering, response: Clustering) -> PRF:
    """Simplified zero score: a response zero is correct when a key zero sits at
    the same node and both entities share a mention preceding it."""
    key_of = _index(key)
    resp_of = _index(response)
    key_zeros = [m for m in key_of if mention_kind(m[1], m[2]) == ZERO]
    resp_zeros = [m for m in resp_of if mention_kind(m[1], m[2]) == ZERO]
    correct = 0
    for z in resp_zeros:
        if z in key_of and _zero_correct(z, response[resp_of[z]], key[key_of[z]]):
            correct += 1
    return PRF(Fraction(correct), Fraction(len(resp_zeros)), Fraction(correct), Fraction(len(key_zeros)))


@dataclass
class ScoreReport:
    muc: PRF
    b3: PRF
    ceaf_e: PRF
    zero: PRF
    matched: int = 0
    missing: int = 0
    spurious: int = 0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def conll(self) -> Fraction:
        return conll_score(self.muc, self.b3, self.ceaf_e)

    def __add__(self, other: "ScoreReport") -> "ScoreReport":
        return ScoreReport(
            self.muc + other.muc, self.b3 + other.b3, self.ceaf_e + other.ceaf_e, self.zero + other.zero,
            self.matched + other.matched, self.missing + other.missing, self.spurious + other.spurious,
            self.diagnostics + other.diagnostics,
        )

    def record(self) -> dict[str, float | int]:
        out: dict[str, float | int] = {}
        for name in ("muc", "b3", "ceaf_e", "zero"):
            prf = getattr(self, name)
            out[f"{name}.p"] = float(prf.precision)
            out[f"{name}.r"] = float(prf.recall)
            out[f"{name}.f1"] = float(prf.f1)
        out["conll"] = float(self.conll)
        out["matched"] = self.matched
        out["missing"] = self.missing
        out["spurious"] = self.spurious
        return out


def score_clusterings(key: Clustering, response: Clustering) -> ScoreReport:
    alignment = align_mentions(key, response)
    report = ScoreReport(
        muc(key, response), b_cubed(key, response), ceaf_e(key, response), zero_anaphor_score(key, response),
        len(alignment.matched), len(alignment.missing), len(alignment.spurious),
    )
    if not report.muc.r_den:
        report.diagnostics.append("muc recall undefined: key has no coreference links")
    if not report.zero.r_den and not report.zero.p_den:
        report.diagnostics.append("zero (simplified) not applicable: no zero mentions")
    return report


def score_documents(key: Sequence[Document], response: Sequence[Document]) -> list[ScoreReport]:
    if len(key) != len(response):
        raise ValueError(f"key has {len(key)} documents, response has {len(response)}")
    reports = []
    for k, r in zip(key, response):
        if k.doc_id != r.doc_id:
            raise ValueError(f"document ids differ: {k.doc_id!r} vs {r.doc_id!r}")
        reports.append(score_clusterings(clustering_from_document(k), clustering_from_document(r)))
    return reports


def micro_average(reports: Iterable[ScoreReport]) -> ScoreReport:
    total = ScoreReport(PRF(), PRF(), PRF(), PRF())
    for report in reports:
        total = total + report
    return total


def macro_average(records: Sequence[Mapping[str, float]]) -> dict[str, float]:
    keys = [k for k, v in records[0].items()
            if k not in ("matched", "missing", "spurious") and isinstance(v, (int, float))] if records else []
    return {k: sum(r[k] for r in records) / len(records) for k in keys}
