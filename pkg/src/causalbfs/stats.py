"""Pearson correlation of observational samples, for prompt augmentation.

Coefficients are computed in double precision from the standard sample
formula r = sum(dx*dy) / sqrt(sum(dx^2) * sum(dy^2)) with dx, dy the
mean-centered series.  A zero-variance series has no defined correlation;
those entries are ``None`` (the prompt layer renders them as "n/a" rather
than implying independence with a 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SampleTable


def pearson(x, y) -> float | None:
    """Sample Pearson correlation coefficient, or None if undefined.

    Requires equal lengths >= 2.  Returns None when either series has zero
    variance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("pearson expects one-dimensional series")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("pearson needs at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    ssx = float(np.dot(dx, dx))
    ssy = float(np.dot(dy, dy))
    if ssx == 0.0 or ssy == 0.0:
        return None
    # sqrt of the product keeps perfectly correlated small-integer series at
    # exactly +/-1; fall back to split square roots if the product underflows.
    denominator = float(np.sqrt(ssx * ssy))
    if denominator == 0.0 or not np.isfinite(denominator):
        denominator = float(np.sqrt(ssx)) * float(np.sqrt(ssy))
    return float(np.dot(dx, dy)) / denominator


@dataclass
class CorrelationMatrix:
    """Symmetric matrix of pairwise coefficients; None marks undefined."""

    variable_names: tuple[str, ...]
    values: list[list[float | None]]

    def index_of(self, name: str) -> int:
        return self.variable_names.index(name)

    def value(self, a: str, b: str) -> float | None:
        return self.values[self.index_of(a)][self.index_of(b)]

    def row(self, name: str) -> list[float | None]:
        return list(self.values[self.index_of(name)])

    def pairs_excluding(self, name: str) -> list[tuple[str, float | None]]:
        """(other variable, coefficient to ``name``) in variable order."""
        i = self.index_of(name)
        return [
            (other, self.values[i][j])
            for j, other in enumerate(self.variable_names)
            if j != i
        ]

    def to_csv_text(self) -> str:
        """CSV rendering for inspection; undefined entries become 'n/a'."""
        lines = ["," + ",".join(self.variable_names)]
        for name, row in zip(self.variable_names, self.values):
            cells = ["n/a" if v is None else repr(v) for v in row]
            lines.append(name + "," + ",".join(cells))
        return "\n".join(lines) + "\n"


def correlation_matrix(samples: SampleTable) -> CorrelationMatrix:
    """All pairwise coefficients of a sample table.

    Entry (i, j) equals ``pearson(col_i, col_j)``; the matrix is symmetric
    and has unit diagonal wherever the column has nonzero variance.
    """
    names = samples.variable_names
    k = len(names)
    values: list[list[float | None]] = [[None] * k for _ in range(k)]
    columns = [samples.rows[:, i] for i in range(k)]
    variances = [float(np.var(col)) for col in columns]
    for i in range(k):
        values[i][i] = 1.0 if variances[i] > 0.0 else None
        for j in range(i + 1, k):
            r = pearson(columns[i], columns[j])
            values[i][j] = r
            values[j][i] = r
    return CorrelationMatrix(variable_names=names, values=values)
