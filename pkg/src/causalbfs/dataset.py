"""Loaders for variable metadata, ground-truth graphs, and sample tables.

Three bundled benchmark problems live under ``causalbfs/fixtures``:

* ``asia``        - 8-node lung-disease network (metadata, edges, samples)
* ``child``       - 20-node congenital-heart-disease network (same trio)
* ``neuropathic`` - 221-node diagnosis network (metadata and edges only)

See ``fixtures/README.md`` for where each file comes from and how the
checked-in sample CSVs were generated.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .graph import CausalGraph


class DatasetError(ValueError):
    """A metadata, edge-list, or sample file failed validation."""


@dataclass(frozen=True)
class Variable:
    name: str
    description: str


@dataclass(frozen=True)
class VariableSet:
    """Ordered variables plus the task-specific opening paragraph.

    Names must be unique (case-insensitively, since answer matching is
    case-insensitive), non-empty, and free of line breaks and commas
    (commas are the edge-list and answer-list separator).
    """

    task_context: str
    variables: tuple[Variable, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for i, var in enumerate(self.variables):
            label = f"variable {i} ({var.name!r})"
            if not var.name or not var.name.strip():
                raise DatasetError(f"{label}: empty name")
            if "\n" in var.name or "\r" in var.name:
                raise DatasetError(f"{label}: name contains a line break")
            if "," in var.name:
                raise DatasetError(f"{label}: name contains a comma")
            key = var.name.casefold()
            if key in seen:
                raise DatasetError(f"{label}: duplicate name")
            seen.add(key)
            if not var.description or not var.description.strip():
                raise DatasetError(f"{label}: empty description")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def description_of(self, name: str) -> str:
        for var in self.variables:
            if var.name == name:
                return var.description
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "task_context": self.task_context,
            "variables": [
                {"name": v.name, "description": v.description} for v in self.variables
            ],
        }


@dataclass
class SampleTable:
    """Numeric observations, one column per variable, one row per sample."""

    variable_names: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.variable_names):
            raise DatasetError(
                f"sample table shape {self.rows.shape} does not match "
                f"{len(self.variable_names)} variables"
            )
        if self.rows.shape[0] < 2:
            raise DatasetError("sample table needs at least 2 rows")
        if not np.all(np.isfinite(self.rows)):
            raise DatasetError("sample table contains non-finite values")

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.variable_names.index(name)]


# -- metadata --------------------------------------------------------------


def load_metadata(path: str | Path) -> VariableSet:
    """Read a metadata JSON file into a validated VariableSet."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise DatasetError(f"{path}: top level must be a JSON object")
    task_context = payload.get("task_context")
    raw_vars = payload.get("variables")
    if not isinstance(task_context, str):
        raise DatasetError(f"{path}: missing or non-string 'task_context'")
    if not isinstance(raw_vars, list) or not raw_vars:
        raise DatasetError(f"{path}: 'variables' must be a non-empty list")
    variables = []
    for i, entry in enumerate(raw_vars):
        if not isinstance(entry, dict):
            raise DatasetError(f"{path}: variable {i}: expected an object")
        name = entry.get("name")
        description = entry.get("description")
        if not isinstance(name, str):
            raise DatasetError(f"{path}: variable {i}: missing 'name'")
        if not isinstance(description, str):
            raise DatasetError(f"{path}: variable {i} ({name!r}): missing 'description'")
        variables.append(Variable(name=name, description=description))
    try:
        return VariableSet(task_context=task_context, variables=tuple(variables))
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def save_metadata(vars: VariableSet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(vars.to_json_dict(), indent=2) + "\n", encoding="utf-8"
    )


# -- ground truth ------------------------------------------------------------


def load_ground_truth(path: str | Path, vars: VariableSet) -> CausalGraph:
    """Read an edge-list file as a DAG over the variable set.

    Fails on endpoints not in ``vars`` and on files that encode a cycle.
    """
    graph = load_digraph(path, vars)
    if not graph.is_dag():
        raise DatasetError(f"{path}: edge list encodes a directed cycle")
    return graph


def load_digraph(path: str | Path, vars: VariableSet) -> CausalGraph:
    """Read an edge-list file as an arbitrary digraph (no cycle check).

    Used for externally produced predictions, which may contain cycles.
    """
    path = Path(path)
    try:
        return CausalGraph.from_edge_list(path.read_text(encoding="utf-8"), vars.names)
    except (ValueError, KeyError) as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def save_graph(graph: CausalGraph, path: str | Path) -> None:
    Path(path).write_text(graph.to_edge_list(), encoding="utf-8")


# -- samples ----------------------------------------------------------------


def load_samples(path: str | Path, vars: VariableSet) -> SampleTable:
    """Read a CSV of numeric observations, reordered to ``vars`` order.

    The header must name a subset of the variable set; unknown columns are
    rejected.  All cells must parse as finite numbers.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        known = set(vars.names)
        unknown = [h for h in header if h not in known]
        if unknown:
            raise DatasetError(f"{path}: header names unknown variables: {unknown}")
        if len(set(header)) != len(header):
            raise DatasetError(f"{path}: duplicate column in header")
        data: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: line {lineno}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                data.append([float(cell) for cell in row])
            except ValueError:
                raise DatasetError(f"{path}: line {lineno}: non-numeric cell") from None
    if len(data) < 2:
        raise DatasetError(f"{path}: need at least 2 data rows, got {len(data)}")
    matrix = np.asarray(data, dtype=float)
    # Reorder columns to the variable-set order, keeping only present columns.
    ordered = [name for name in vars.names if name in header]
    permutation = [header.index(name) for name in ordered]
    return SampleTable(variable_names=tuple(ordered), rows=matrix[:, permutation])


def save_samples(table: SampleTable, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.variable_names)
        for row in table.rows:
            writer.writerow([repr(float(x)) for x in row])


# -- bundled fixtures ---------------------------------------------------------


def fixture_path(filename: str) -> Path:
    """Absolute path of a bundled fixture file."""
    root = resources.files("causalbfs").joinpath("fixtures")
    path = Path(str(root.joinpath(filename)))
    if not path.is_file():
        raise FileNotFoundError(f"no bundled fixture named {filename!r}")
    return path


def list_fixtures() -> list[str]:
    root = Path(str(resources.files("causalbfs").joinpath("fixtures")))
    return sorted(
        p.name
        for p in root.iterdir()
        if p.is_file() and p.suffix in (".json", ".edges", ".csv")
    )
