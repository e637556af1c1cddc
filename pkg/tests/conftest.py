"""Shared helpers: random DAG generation and scripted backends."""

from __future__ import annotations

import random

from causalbfs import CausalGraph, ChatSession, Variable, VariableSet


def make_vars(names, context="You are a helpful assistant to a domain expert."):
    return VariableSet(
        task_context=context,
        variables=tuple(Variable(n, f"Description of {n}") for n in names),
    )


def random_dag(rng: random.Random, n_nodes: int, edge_prob: float | None = None):
    """Random DAG: random topological order, then random forward edges."""
    names = [f"V{i}" for i in range(n_nodes)]
    order = names[:]
    rng.shuffle(order)
    p = edge_prob if edge_prob is not None else rng.uniform(0.1, 0.5)
    graph = CausalGraph(names)
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < p:
                graph.add_edge(order[i], order[j])
    return graph


def random_digraph(rng: random.Random, names, edge_prob: float = 0.3):
    """Random digraph (cycles allowed, no self-loops)."""
    graph = CausalGraph(names)
    for u in names:
        for v in names:
            if u != v and rng.random() < edge_prob:
                graph.add_edge(u, v)
    return graph


class ScriptedBackend:
    """Replays a fixed list of completions, recording every prompt."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = 0
        self.prompts = []

    def new_session(self):
        return ChatSession(model_id="scripted")

    def complete(self, session, prompt):
        self.prompts.append(prompt)
        if self.calls < len(self.replies):
            reply = self.replies[self.calls]
        else:
            reply = "<Answer>None</Answer>"
        self.calls += 1
        session.append("user", prompt.text)
        session.append("assistant", reply)
        return reply


class FnBackend:
    """Computes each completion from the prompt via a caller-supplied function."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def new_session(self):
        return ChatSession(model_id="scripted")

    def complete(self, session, prompt):
        self.calls += 1
        reply = self.fn(prompt)
        session.append("user", prompt.text)
        session.append("assistant", reply)
        return reply
