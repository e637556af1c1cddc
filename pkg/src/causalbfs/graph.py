"""Directed graph over named variables with DAG enforcement.

The graph is the artifact that discovery builds and evaluation scores.
``add_edge_checked`` is the only mutation the breadth-first discovery loop
uses; it refuses any edge that would close a directed cycle, so a graph
built exclusively through it is a DAG by construction.  ``add_edge`` exists
for representing externally produced digraphs (e.g. the pairwise baseline,
which is deliberately not cycle-checked) and for loading prediction files.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Iterator


class UnknownNodeError(KeyError):
    """An edge endpoint does not name a declared node."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown node: {self.name!r}"


class EdgeResult(str, Enum):
    """Outcome of a cycle-checked edge insertion."""

    ADDED = "added"
    REJECTED_CYCLE = "rejected-cycle"
    REJECTED_DUPLICATE = "rejected-duplicate"


class CausalGraph:
    """Directed graph over a fixed, ordered set of node names.

    Nodes are fixed at construction; edges are added later.  Edge storage
    preserves insertion order (for deterministic serialization) while
    membership checks use set semantics.  Self-loops are always rejected.
    """

    def __init__(self, nodes: Iterable[str]):
        self._nodes: list[str] = []
        self._index: dict[str, int] = {}
        for name in nodes:
            if name in self._index:
                raise ValueError(f"duplicate node name: {name!r}")
            self._index[name] = len(self._nodes)
            self._nodes.append(name)
        self._children: dict[str, list[str]] = {n: [] for n in self._nodes}
        self._edges: list[tuple[str, str]] = []
        self._edge_set: set[tuple[str, str]] = set()

    # -- structure queries ------------------------------------------------

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(self._nodes)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        """Edges in insertion order."""
        return tuple(self._edges)

    @property
    def edge_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self._edge_set)

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edge_set == other._edge_set

    def __hash__(self):  # pragma: no cover - graphs are mutable
        raise TypeError("CausalGraph is not hashable")

    def __repr__(self) -> str:
        return f"CausalGraph(nodes={len(self._nodes)}, edges={len(self._edges)})"

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownNodeError(name) from None

    def children(self, name: str) -> tuple[str, ...]:
        self.index_of(name)
        return tuple(self._children[name])

    def parents(self, name: str) -> tuple[str, ...]:
        self.index_of(name)
        return tuple(u for (u, v) in self._edges if v == name)

    def in_degree(self, name: str) -> int:
        self.index_of(name)
        return sum(1 for (_, v) in self._edges if v == name)

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self._edge_set

    def roots(self) -> tuple[str, ...]:
        """Nodes with no incoming edge, in node order."""
        targets = {v for (_, v) in self._edges}
        return tuple(n for n in self._nodes if n not in targets)

    # -- mutation ----------------------------------------------------------

    def add_edge(self, u: str, v: str) -> bool:
        """Insert an edge without a cycle check.

        Still rejects unknown endpoints and self-loops (a causal graph never
        contains them).  Duplicate insertion is a no-op; returns True only
        when the edge was actually added.
        """
        self.index_of(u)
        self.index_of(v)
        if u == v:
            raise ValueError(f"self-loop rejected: {u!r}")
        if (u, v) in self._edge_set:
            return False
        self._edges.append((u, v))
        self._edge_set.add((u, v))
        self._children[u].append(v)
        return True

    def add_edge_checked(self, u: str, v: str) -> EdgeResult:
        """Insert ``u -> v`` only if it keeps the graph acyclic.

        Returns the outcome; the graph is acyclic afterwards in all cases
        (assuming it was acyclic before).  Duplicates are reported, not
        re-inserted.
        """
        self.index_of(u)
        self.index_of(v)
        if (u, v) in self._edge_set:
            return EdgeResult.REJECTED_DUPLICATE
        if self.creates_cycle(u, v):
            return EdgeResult.REJECTED_CYCLE
        self.add_edge(u, v)
        return EdgeResult.ADDED

    # -- cycle machinery ----------------------------------------------------

    def creates_cycle(self, u: str, v: str) -> bool:
        """Would adding ``u -> v`` close a directed cycle?

        True iff ``u`` is reachable from ``v`` through existing edges, or
        ``u == v``.  Pure: the graph is never modified.  Iterative DFS, so
        safe on deep graphs.
        """
        self.index_of(u)
        self.index_of(v)
        if u == v:
            return True
        stack = [v]
        seen = {v}
        while stack:
            node = stack.pop()
            if node == u:
                return True
            for child in self._children[node]:
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return False

    def is_dag(self) -> bool:
        """Acyclicity check independent of construction history.

        Kahn-style topological elimination: the graph is a DAG iff every
        node can be peeled off in in-degree order.
        """
        indegree = {n: 0 for n in self._nodes}
        for _, v in self._edges:
            indegree[v] += 1
        queue = [n for n in self._nodes if indegree[n] == 0]
        removed = 0
        while queue:
            node = queue.pop()
            removed += 1
            for child in self._children[node]:
                indegree[child] -= 1
                if indegree[child] == 0:
                    queue.append(child)
        return removed == len(self._nodes)

    def copy(self) -> CausalGraph:
        clone = CausalGraph(self._nodes)
        for u, v in self._edges:
            clone.add_edge(u, v)
        return clone

    # -- serialization -------------------------------------------------------

    def to_edge_list(self) -> str:
        """Plain text edge list: one ``from,to`` pair per line, LF-terminated."""
        return "".join(f"{u},{v}\n" for u, v in self._edges)

    @classmethod
    def from_edge_list(cls, text: str, nodes: Iterable[str]) -> CausalGraph:
        """Parse the ``from,to`` line format over a known node set.

        No cycle check is performed here; callers that require a DAG must
        verify ``is_dag`` afterwards (ground-truth loading does).
        """
        graph = cls(nodes)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'from,to', got {raw!r}")
            u, v = parts[0].strip(), parts[1].strip()
            if not u or not v:
                raise ValueError(f"line {lineno}: empty endpoint in {raw!r}")
            graph.add_edge(u, v)
        return graph

    def to_dot(self) -> str:
        """GraphViz DOT rendering with quoted node names."""
        lines = ["digraph {"]
        linked = {u for (u, v) in self._edges} | {v for (u, v) in self._edges}
        for node in self._nodes:
            if node not in linked:
                lines.append(f'  "{node}";')
        for u, v in self._edges:
            lines.append(f'  "{u}" -> "{v}";')
        lines.append("}")
        return "\n".join(lines) + "\n"
