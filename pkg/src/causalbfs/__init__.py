"""Causal DAG discovery by breadth-first natural-language queries.

The package discovers full causal graphs over named variables by asking a
chat-completion backend which variables each node causes, visiting nodes in
breadth-first order so the whole graph costs a linear number of queries.
A quadratic pairwise baseline, observational-correlation prompt
augmentation, deterministic oracle backends, and a structural evaluation
suite round out the toolkit.
"""

from .backends import (
    AuthenticationError,
    BackendError,
    ChatSession,
    HttpChatBackend,
    HttpConfig,
    MalformedResponseError,
    OracleBackend,
    OracleConfig,
    ResponseCache,
    TranscriptError,
    TransportError,
    read_transcript,
)
from .dataset import (
    DatasetError,
    SampleTable,
    Variable,
    VariableSet,
    fixture_path,
    list_fixtures,
    load_ground_truth,
    load_metadata,
    load_samples,
)
from .discovery import (
    DiscoveryError,
    DiscoveryRun,
    QueryCounts,
    RunPolicy,
    acyclify_edges,
    discover_bfs,
    discover_pairwise,
    query_budget,
    replay_transcript,
)
from .evaluation import EvaluationReport, evaluate, render_report_table
from .graph import CausalGraph, EdgeResult, UnknownNodeError
from .prompting import (
    AnswerParseError,
    ParsedAnswer,
    PairwiseVerdict,
    PromptTemplates,
    PromptText,
    build_expansion_prompt,
    build_init_prompt,
    build_pairwise_prompt,
    load_templates,
    parse_answer,
    parse_pairwise_answer,
)
from .stats import CorrelationMatrix, correlation_matrix, pearson

__version__ = "0.1.0"

__all__ = [
    "AnswerParseError",
    "AuthenticationError",
    "BackendError",
    "CausalGraph",
    "ChatSession",
    "CorrelationMatrix",
    "DatasetError",
    "DiscoveryError",
    "DiscoveryRun",
    "EdgeResult",
    "EvaluationReport",
    "HttpChatBackend",
    "HttpConfig",
    "MalformedResponseError",
    "OracleBackend",
    "OracleConfig",
    "ParsedAnswer",
    "PairwiseVerdict",
    "PromptTemplates",
    "PromptText",
    "QueryCounts",
    "ResponseCache",
    "RunPolicy",
    "SampleTable",
    "TranscriptError",
    "TransportError",
    "UnknownNodeError",
    "Variable",
    "VariableSet",
    "acyclify_edges",
    "build_expansion_prompt",
    "build_init_prompt",
    "build_pairwise_prompt",
    "correlation_matrix",
    "discover_bfs",
    "discover_pairwise",
    "evaluate",
    "fixture_path",
    "list_fixtures",
    "load_ground_truth",
    "load_metadata",
    "load_samples",
    "load_templates",
    "parse_answer",
    "parse_pairwise_answer",
    "pearson",
    "query_budget",
    "read_transcript",
    "render_report_table",
    "replay_transcript",
]
