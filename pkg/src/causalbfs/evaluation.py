"""Structural metrics for a predicted digraph against a ground-truth DAG.

Edges are counted direction-sensitively everywhere: a reversed edge is both
a false positive and a false negative.  With n nodes, m true edges, npe
predicted edges, and tp correctly directed predictions:

    precision    = tp / npe
    recall       = tp / m
    f_score      = 2 * tp / (npe + m)
    accuracy     = tp / (npe + m - tp)          (Jaccard over directed edges)
    nhd          = (npe + m - 2 * tp) / n^2     (adjacency disagreements / n^2)
    baseline_nhd = (npe + m) / n^2              (same npe, all edges wrong)
    nhd_ratio    = nhd / baseline_nhd           (equals 1 - f_score)

The baseline NHD is what an adversary predicting the same number of edges,
all of them incorrect, would score; the ratio rewards methods that beat
that adversary and is insensitive to how many edges were predicted.
Predicted graphs may contain cycles (the pairwise baseline's output is not
repaired); evaluation accepts any digraph.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .graph import CausalGraph


class NodeSetMismatchError(ValueError):
    """Predicted and ground-truth graphs cover different node sets."""


@dataclass(frozen=True)
class EvaluationReport:
    n: int
    m_true: int
    npe: int
    tp: int
    accuracy: float
    precision: float
    recall: float
    f_score: float
    nhd: float
    baseline_nhd: float
    nhd_ratio: float | None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def evaluate(predicted: CausalGraph, truth: CausalGraph) -> EvaluationReport:
    """Score a predicted digraph against the true DAG.

    Requires identical node sets.  Reports carry full precision; rounding
    happens only at render time.  When both graphs are empty the prediction
    is trivially perfect (f = 1, nhd = 0) but the ratio has no defined
    baseline and is None.
    """
    if set(predicted.nodes) != set(truth.nodes):
        missing = set(truth.nodes) - set(predicted.nodes)
        extra = set(predicted.nodes) - set(truth.nodes)
        raise NodeSetMismatchError(
            f"node sets differ (missing: {sorted(missing)}, extra: {sorted(extra)})"
        )
    n = len(truth.nodes)
    true_edges = truth.edge_set
    predicted_edges = predicted.edge_set
    m = len(true_edges)
    npe = len(predicted_edges)
    tp = len(predicted_edges & true_edges)
    total = npe + m
    precision = tp / npe if npe else 0.0
    recall = tp / m if m else 0.0
    f_score = 2.0 * tp / total if total else 1.0
    accuracy = tp / (total - tp) if total - tp else 1.0
    nn = n * n
    nhd = (total - 2 * tp) / nn
    baseline_nhd = total / nn
    nhd_ratio = nhd / baseline_nhd if total else None
    return EvaluationReport(
        n=n,
        m_true=m,
        npe=npe,
        tp=tp,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f_score=f_score,
        nhd=nhd,
        baseline_nhd=baseline_nhd,
        nhd_ratio=nhd_ratio,
    )


_COLUMNS = ("Acc.", "Prec.", "Recall", "F Score", "NPE", "NHD", "Ref. NHD", "Ratio")


def _fmt(value: float | None) -> str:
    if value is None:
        return "\u2014"
    if value == 0:
        return "0"
    if abs(value) < 0.0995:
        return f"{value:.2g}"
    return f"{value:.2f}"


def render_report_table(reports: list[tuple[str, EvaluationReport]]) -> str:
    """Aligned text table, one row per labeled report.

    Values print with 2 to 3 significant digits; an undefined ratio (only
    possible when npe + m = 0) prints as an em dash.
    """
    if not reports:
        raise ValueError("nothing to render")
    rows = []
    for label, report in reports:
        rows.append(
            [
                label,
                _fmt(report.accuracy),
                _fmt(report.precision),
                _fmt(report.recall),
                _fmt(report.f_score),
                str(report.npe),
                _fmt(report.nhd),
                _fmt(report.baseline_nhd),
                _fmt(report.nhd_ratio),
            ]
        )
    header = ["Method", *_COLUMNS]
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) for i in range(len(header))
    ]
    def line(cells):
        return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()
    out = [line(header), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"
