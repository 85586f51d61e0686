"""Score tables: a fixed-width text table, TSV rows and JSON lines."""

from __future__ import annotations

import csv
import json
from typing import Mapping, Sequence

COLUMNS = [
    "muc.p", "muc.r", "muc.f1",
    "b3.p", "b3.r", "b3.f1",
    "ceaf_e.p", "ceaf_e.r", "ceaf_e.f1",
    "conll",
    "zero.p", "zero.r", "zero.f1",
    "matched", "missing", "spurious",
]

ZERO_NOTE = "zero = simplified antecedent-recovery score, not the official anaphor-decomposable metric"


def format_table(rows: Sequence[Mapping]) -> str:
    """Rows need ``dataset`` and ``doc`` plus the metric keys; percentages are printed."""
    shown = ["muc.f1", "b3.f1", "ceaf_e.f1", "conll", "zero.f1"]
    headers = ["dataset", "doc", "MUC", "B3", "CEAFe", "CoNLL", "zero*"]
    body = []
    for row in rows:
        cells = [str(row.get("dataset", "")), str(row.get("doc", ""))]
        cells += [f"{100 * row[k]:.2f}" if k in row else "" for k in shown]
        body.append(cells)
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) if i < 2 else h.rjust(w) for i, (h, w) in enumerate(zip(headers, widths)))]
    lines.append("  ".join("-" * w for w in widths))
    for cells in body:
        lines.append("  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))))
    lines.append(f"* {ZERO_NOTE}")
    return "\n".join(lines)


def write_tsv(path, rows: Sequence[Mapping]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["dataset", "doc", *COLUMNS], delimiter="\t",
                                extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


def write_jsonl(path, rows: Sequence[Mapping]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(dict(row), ensure_ascii=False) + "\n")


def _fmt(value):
    return f"{value:.6f}" if isinstance(value, float) else value
