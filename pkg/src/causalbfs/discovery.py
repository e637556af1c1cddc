"""The two discovery methods: breadth-first search and the pairwise baseline.

The BFS method runs in three alternating phases inside one multi-turn chat:

1. an opening query asks for the variables unaffected by any other
   variable; the parsed names seed a FIFO frontier,
2. each frontier node is expanded with a query for the variables it causes,
3. every proposed edge is cycle-checked before insertion and every newly
   proposed node is enqueued.

Each node is visited exactly once, so the whole run costs one opening query
plus one expansion per node: n + 1 queries for n variables, against
n * (n - 1) / 2 for the pairwise baseline.  Nodes that the model never
proposes (e.g. sinks unreachable from the identified roots) are swept into
the frontier in variable order once it drains, so the loop terminates only
after every node has been visited.

The pairwise baseline asks the three-option question once per unordered
pair, each in a fresh session, and deliberately applies no cycle check; it
reproduces the prior approach as-is, cycles included.  ``acyclify_edges``
offers an optional post-hoc repair.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .backends import TranscriptError, TranscriptRecord, TranscriptWriter, read_transcript
from .dataset import VariableSet
from .graph import CausalGraph
from .prompting import (
    AnswerParseError,
    EXPANSION_STAGE,
    INIT_STAGE,
    PAIRWISE_STAGE,
    PairwiseVerdict,
    PromptTemplates,
    PromptText,
    build_expansion_prompt,
    build_init_prompt,
    build_pairwise_prompt,
    parse_answer,
    parse_pairwise_answer,
)
from .stats import CorrelationMatrix

logger = logging.getLogger(__name__)

BFS_METHOD = "bfs"
PAIRWISE_METHOD = "pairwise"

RETRY_MESSAGE = (
    "Please answer again using only the exact variable names, inside "
    "<Answer></Answer> tags."
)
PAIRWISE_RETRY_MESSAGE = (
    "Please answer again with a single option letter (A, B, or C), inside "
    "<Answer></Answer> tags."
)


@dataclass
class RunPolicy:
    """Knobs that govern retries, concurrency, and cost guards."""

    max_parse_retries: int = 2
    max_concurrency: int = 1
    cost_confirm_threshold: int = 500
    seed: int = 0
    fuzzy_matching: bool = False
    repeat_descriptions: bool = False

    def __post_init__(self):
        if self.max_parse_retries < 0:
            raise ValueError("max_parse_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.cost_confirm_threshold < 1:
            raise ValueError("cost_confirm_threshold must be positive")


@dataclass
class QueryCounts:
    init: int = 0
    expansion: int = 0
    pairwise: int = 0
    retries: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "init": self.init,
            "expansion": self.expansion,
            "pairwise": self.pairwise,
            "retries": self.retries,
        }


@dataclass
class DiscoveryRun:
    """Everything one discovery run produced."""

    method: str
    graph: CausalGraph
    frontier_trace: list[str]
    query_counts: QueryCounts
    transcript_path: Path | None = None
    parse_failures: list[str] = field(default_factory=list)
    wall_time_s: float = 0.0


class DiscoveryError(RuntimeError):
    """A backend failure aborted the run; the partial result is attached."""

    def __init__(self, message: str, partial: DiscoveryRun):
        super().__init__(message)
        self.partial = partial


def query_budget(method: str, n: int) -> int:
    """Upper bound on backend queries for ``n`` variables."""
    if n < 1:
        raise ValueError("need at least one variable")
    if method == BFS_METHOD:
        return n + 1
    if method == PAIRWISE_METHOD:
        return n * (n - 1) // 2
    raise ValueError(f"unknown method: {method!r}")


class _QueryLog:
    """Shared transcript plumbing with per-query timing."""

    def __init__(self, transcript_path: str | Path | None):
        self.writer = TranscriptWriter(transcript_path) if transcript_path else None
        self.index = 0

    def record(
        self,
        prompt: PromptText,
        completion: str,
        parsed: list[str] | str | None,
        elapsed_s: float,
    ) -> None:
        if self.writer is not None:
            node_or_pair: str | list[str] | None = prompt.node
            if prompt.pair is not None:
                node_or_pair = list(prompt.pair)
            self.writer.write(
                TranscriptRecord(
                    stage=prompt.stage,
                    node_or_pair=node_or_pair,
                    prompt=prompt.text,
                    completion=completion,
                    parsed_result=parsed,
                    query_index=self.index,
                    wall_time_ms=elapsed_s * 1000.0,
                )
            )
        self.index += 1

    def close(self) -> None:
        if self.writer is not None:
            self.writer.close()


def _ask(backend, session, prompt: PromptText) -> tuple[str, float]:
    start = time.monotonic()
    completion = backend.complete(session, prompt)
    return completion, time.monotonic() - start


def _ask_for_names(
    backend,
    session,
    prompt: PromptText,
    vars: VariableSet,
    policy: RunPolicy,
    counts: QueryCounts,
    log: _QueryLog,
):
    """Issue a names query, re-asking on unparseable completions.

    Returns the ParsedAnswer or None once the retry budget is exhausted
    (the caller treats that as an empty answer and records a warning).
    """
    current = prompt
    for attempt in range(policy.max_parse_retries + 1):
        completion, elapsed = _ask(backend, session, current)
        try:
            parsed = parse_answer(completion, vars, fuzzy=policy.fuzzy_matching)
        except AnswerParseError:
            log.record(current, completion, None, elapsed)
            if attempt == policy.max_parse_retries:
                return None
            counts.retries += 1
            current = PromptText(
                text=RETRY_MESSAGE,
                stage=prompt.stage,
                node=prompt.node,
                pair=prompt.pair,
            )
            continue
        log.record(current, completion, list(parsed.names), elapsed)
        if parsed.unmatched:
            logger.warning(
                "%s query for %s: ignoring unknown names %s",
                prompt.stage,
                prompt.node or "roots",
                list(parsed.unmatched),
            )
        return parsed
    return None


def discover_bfs(
    backend,
    vars: VariableSet,
    stats: CorrelationMatrix | None = None,
    policy: RunPolicy | None = None,
    transcript_path: str | Path | None = None,
    templates: PromptTemplates | None = None,
) -> DiscoveryRun:
    """Discover a DAG with the breadth-first query strategy.

    The returned graph is a DAG for any backend behavior: the insertion
    step refuses every edge whose addition would close a cycle.  If the
    backend raises, the transcript written so far survives on disk and the
    partial graph rides along on the DiscoveryError.
    """
    policy = policy or RunPolicy()
    if stats is not None and set(stats.variable_names) != set(vars.names):
        raise ValueError("statistics variable set does not match the metadata")
    started = time.monotonic()
    graph = CausalGraph(vars.names)
    counts = QueryCounts()
    visit_order: list[str] = []
    parse_failures: list[str] = []
    log = _QueryLog(transcript_path)
    session = backend.new_session()

    def partial() -> DiscoveryRun:
        return DiscoveryRun(
            method=BFS_METHOD,
            graph=graph,
            frontier_trace=visit_order,
            query_counts=counts,
            transcript_path=Path(transcript_path) if transcript_path else None,
            parse_failures=parse_failures,
            wall_time_s=time.monotonic() - started,
        )

    try:
        init_prompt = build_init_prompt(vars, templates=templates)
        counts.init += 1
        parsed = _ask_for_names(backend, session, init_prompt, vars, policy, counts, log)
        if parsed is None:
            parse_failures.append("init")
            logger.warning("opening query never parsed; starting from an empty frontier")
            roots: tuple[str, ...] = ()
        else:
            roots = parsed.names

        frontier = deque(roots)
        enqueued = set(roots)
        visited: set[str] = set()
        while True:
            while frontier:
                node = frontier.popleft()
                visited.add(node)
                visit_order.append(node)
                prompt = build_expansion_prompt(
                    graph,
                    roots,
                    node,
                    stats=stats,
                    templates=templates,
                    vars=vars,
                    repeat_descriptions=policy.repeat_descriptions,
                )
                counts.expansion += 1
                parsed = _ask_for_names(backend, session, prompt, vars, policy, counts, log)
                if parsed is None:
                    parse_failures.append(node)
                    logger.warning("expansion of %s never parsed; no edges added", node)
                    continue
                for child in parsed.names:
                    graph.add_edge_checked(node, child)
                    if child not in enqueued and child not in visited:
                        frontier.append(child)
                        enqueued.add(child)
            unvisited = [n for n in vars.names if n not in visited]
            if not unvisited:
                break
            # Sweep: the model never proposed these nodes, so the frontier
            # alone would leave them unexpanded.
            frontier.extend(unvisited)
            enqueued.update(unvisited)
    except (AnswerParseError, ValueError):
        raise
    except Exception as exc:
        log.close()
        raise DiscoveryError(f"backend failure during BFS discovery: {exc}", partial()) from exc
    log.close()
    return partial()


def _pairwise_order(vars: VariableSet) -> list[tuple[str, str]]:
    names = vars.names
    return [
        (names[i], names[j])
        for i in range(len(names))
        for j in range(i + 1, len(names))
    ]


def discover_pairwise(
    backend,
    vars: VariableSet,
    corr: CorrelationMatrix | None = None,
    policy: RunPolicy | None = None,
    transcript_path: str | Path | None = None,
    templates: PromptTemplates | None = None,
) -> DiscoveryRun:
    """Baseline: one three-option query per unordered pair.

    Pairs are independent decisions in fresh sessions, so they may be
    dispatched concurrently (``policy.max_concurrency``); edges and the
    transcript are still assembled in pair order, keeping runs
    deterministic.  The result is not cycle-checked.
    """
    policy = policy or RunPolicy()
    if corr is not None and set(corr.variable_names) != set(vars.names):
        raise ValueError("statistics variable set does not match the metadata")
    started = time.monotonic()
    graph = CausalGraph(vars.names)
    counts = QueryCounts()
    parse_failures: list[str] = []
    log = _QueryLog(transcript_path)
    pairs = _pairwise_order(vars)

    def ask_pair(pair: tuple[str, str]):
        """Returns (records, verdict, retries); records carry timing only."""
        a, b = pair
        prompt = build_pairwise_prompt(
            a,
            vars.description_of(a),
            b,
            vars.description_of(b),
            corr=corr.value(a, b) if corr is not None else None,
            templates=templates,
        )
        session = backend.new_session()
        records: list[tuple[PromptText, str, str | None, float]] = []
        retries = 0
        current = prompt
        for attempt in range(policy.max_parse_retries + 1):
            completion, elapsed = _ask(backend, session, current)
            try:
                verdict = parse_pairwise_answer(completion)
            except AnswerParseError:
                records.append((current, completion, None, elapsed))
                if attempt == policy.max_parse_retries:
                    return records, None, retries
                retries += 1
                current = PromptText(
                    text=PAIRWISE_RETRY_MESSAGE, stage=PAIRWISE_STAGE, pair=(a, b)
                )
                continue
            records.append((current, completion, verdict.value, elapsed))
            return records, verdict, retries
        return records, None, retries

    try:
        if policy.max_concurrency > 1:
            with ThreadPoolExecutor(max_workers=policy.max_concurrency) as pool:
                outcomes = list(pool.map(ask_pair, pairs))
        else:
            outcomes = [ask_pair(pair) for pair in pairs]
    except Exception as exc:
        log.close()
        partial = DiscoveryRun(
            method=PAIRWISE_METHOD,
            graph=graph,
            frontier_trace=[],
            query_counts=counts,
            transcript_path=Path(transcript_path) if transcript_path else None,
            parse_failures=parse_failures,
            wall_time_s=time.monotonic() - started,
        )
        raise DiscoveryError(f"backend failure during pairwise discovery: {exc}", partial) from exc

    for pair, (records, verdict, retries) in zip(pairs, outcomes):
        counts.pairwise += 1
        counts.retries += retries
        for prompt, completion, parsed, elapsed in records:
            log.record(prompt, completion, parsed, elapsed)
        a, b = pair
        if verdict is None:
            parse_failures.append(f"{a}|{b}")
            logger.warning("pairwise query (%s, %s) never parsed; skipped", a, b)
        elif verdict is PairwiseVerdict.A_CAUSES_B:
            graph.add_edge(a, b)
        elif verdict is PairwiseVerdict.B_CAUSES_A:
            graph.add_edge(b, a)
    log.close()
    return DiscoveryRun(
        method=PAIRWISE_METHOD,
        graph=graph,
        frontier_trace=[],
        query_counts=counts,
        transcript_path=Path(transcript_path) if transcript_path else None,
        parse_failures=parse_failures,
        wall_time_s=time.monotonic() - started,
    )


def acyclify_edges(graph: CausalGraph) -> CausalGraph:
    """Greedy cycle repair: keep each edge only if it preserves acyclicity.

    Edges are replayed in discovery order, so in every cycle the
    later-discovered edge is the one dropped.
    """
    repaired = CausalGraph(graph.nodes)
    for u, v in graph.edges:
        repaired.add_edge_checked(u, v)
    return repaired


# -- offline replay -------------------------------------------------------------


def replay_transcript(path: str | Path, vars: VariableSet, fuzzy: bool = False) -> DiscoveryRun:
    """Rebuild the discovered graph from a stored transcript, offline.

    Only the completions matter: they are re-parsed with the current parser
    and re-inserted through the same cycle-checked path, which makes replay
    a regression guard for parser changes (and immune to cosmetic prompt
    edits).
    """
    records = read_transcript(path)
    if not records:
        raise TranscriptError(f"{path}: empty transcript")
    method = (
        PAIRWISE_METHOD
        if all(r.stage == PAIRWISE_STAGE for r in records)
        else BFS_METHOD
    )
    graph = CausalGraph(vars.names)
    known = set(vars.names)
    counts = QueryCounts()
    visit_order: list[str] = []
    seen_pairs: set[tuple[str, str]] = set()
    for record in records:
        if record.stage == INIT_STAGE:
            counts.init += 1
        elif record.stage == EXPANSION_STAGE:
            node = record.node_or_pair
            if not isinstance(node, str):
                raise TranscriptError(f"{path}: expansion record without a node")
            if node not in known:
                raise TranscriptError(
                    f"{path}: transcript visits {node!r}, which is not in the "
                    "given variable set"
                )
            if node not in visit_order:
                visit_order.append(node)
                counts.expansion += 1
            try:
                parsed = parse_answer(record.completion, vars, fuzzy=fuzzy)
            except AnswerParseError:
                continue
            for child in parsed.names:
                graph.add_edge_checked(node, child)
        elif record.stage == PAIRWISE_STAGE:
            pair = record.node_or_pair
            if not isinstance(pair, list) or len(pair) != 2:
                raise TranscriptError(f"{path}: pairwise record without a pair")
            a, b = pair
            if a not in known or b not in known:
                raise TranscriptError(
                    f"{path}: transcript pair ({a!r}, {b!r}) is not in the "
                    "given variable set"
                )
            if (a, b) not in seen_pairs:
                seen_pairs.add((a, b))
                counts.pairwise += 1
            try:
                verdict = parse_pairwise_answer(record.completion)
            except AnswerParseError:
                continue
            if verdict is PairwiseVerdict.A_CAUSES_B:
                graph.add_edge(a, b)
            elif verdict is PairwiseVerdict.B_CAUSES_A:
                graph.add_edge(b, a)
        else:
            raise TranscriptError(f"{path}: unknown stage {record.stage!r}")
    return DiscoveryRun(
        method=method,
        graph=graph,
        frontier_trace=visit_order,
        query_counts=counts,
        transcript_path=Path(path),
    )
