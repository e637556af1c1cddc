"""Prompt construction and completion parsing.

Three prompt stages exist:

* ``init``      - asks which variables are unaffected by any other variable
                  (the graph roots; issued once, seeds the search frontier).
* ``expansion`` - asks which variables are caused by the currently visited
                  node, given the relationships predicted so far.
* ``pairwise``  - the three-option baseline question for a single pair.

Correlation statistics, when available, are injected into expansion prompts
(a per-node coefficient block placed after the relationship list) and into
pairwise prompts (a single-coefficient sentence after the descriptions).
The init prompt never carries statistics.

Templates are plain ``str.format`` strings.  The defaults below are
embedded; a template directory with files ``init.txt``, ``expansion.txt``
and ``pairwise.txt`` can override any subset of them, which is how the
framework is ported to new task domains (the opening paragraph itself
travels with the variable metadata as ``task_context``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .dataset import VariableSet
from .graph import CausalGraph
from .stats import CorrelationMatrix

INIT_STAGE = "init"
EXPANSION_STAGE = "expansion"
PAIRWISE_STAGE = "pairwise"
STAGES = (INIT_STAGE, EXPANSION_STAGE, PAIRWISE_STAGE)

ANSWER_OPEN = "<Answer>"
ANSWER_CLOSE = "</Answer>"

DEFAULT_INIT_TEMPLATE = (
    "{task_context}\n"
    "\n"
    "{variable_lines}\n"
    "\n"
    "Now you are going to use the data to construct a causal graph. "
    "You will start with identifying the variable(s) that are unaffected by "
    "any other variables. Think step by step. Then, provide your final "
    "answer (variable names only) within the tags <Answer>...</Answer>."
)

DEFAULT_EXPANSION_TEMPLATE = (
    "{opening_line}\n"
    "\n"
    "{relationship_lines}\n"
    "\n"
    "{stats_block}\n"
    "\n"
    "Select the variables that are caused by {current}. "
    "Think step by step. Then, provide your final answer (variable names "
    "only) within the tags <Answer>...</Answer>."
)

DEFAULT_PAIRWISE_TEMPLATE = (
    "{a}: {description_a}\n"
    "{b}: {description_b}\n"
    "\n"
    "{correlation_block}\n"
    "\n"
    "Given the above information, which of the following is the most likely:\n"
    "A. Changing {a} causes a change in {b}\n"
    "B. Changing {b} causes a change in {a}\n"
    "C. There is no causal relationship between {a} and {b}"
)

EXPANSION_STATS_HEADER = (
    "Additionally, the Pearson Correlation Coefficients between {current} "
    "and the other variables are as follows:"
)

PAIRWISE_STATS_SENTENCE = (
    "Additionally, the Pearson Correlation Coefficient between {a} and {b} "
    "is {coefficient}."
)


@dataclass(frozen=True)
class PromptText:
    """A rendered prompt plus the metadata a test oracle needs to answer it.

    ``node`` is set for expansion prompts, ``pair`` for pairwise prompts.
    """

    text: str
    stage: str
    node: str | None = None
    pair: tuple[str, str] | None = None

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown prompt stage: {self.stage!r}")
        if not self.text:
            raise ValueError("empty prompt text")


@dataclass(frozen=True)
class ParsedAnswer:
    """Canonical variable names recovered from a completion.

    ``unmatched`` keeps the raw tokens that matched no variable, for
    logging; they are never acted upon.
    """

    names: tuple[str, ...]
    unmatched: tuple[str, ...] = ()


@dataclass(frozen=True)
class PromptTemplates:
    init: str = DEFAULT_INIT_TEMPLATE
    expansion: str = DEFAULT_EXPANSION_TEMPLATE
    pairwise: str = DEFAULT_PAIRWISE_TEMPLATE


class AnswerParseError(ValueError):
    """A completion could not be parsed into an answer."""


def load_templates(directory: str | Path) -> PromptTemplates:
    """Read template overrides from a directory (one file per stage).

    Missing files fall back to the embedded defaults.
    """
    directory = Path(directory)
    kwargs = {}
    for stage in STAGES:
        candidate = directory / f"{stage}.txt"
        if candidate.is_file():
            kwargs[stage] = candidate.read_text(encoding="utf-8")
    return PromptTemplates(**kwargs)


def _tidy(text: str) -> str:
    """Collapse blank runs left by empty optional blocks."""
    text = re.sub(r"[ \t]+\n", "\n", text)
    text = re.sub(r"\n{3,}", "\n\n", text)
    return text.strip("\n")


def format_coefficient(value: float | None) -> str:
    """Prompt rendering of a correlation coefficient: 2 decimals or n/a."""
    return "n/a" if value is None else f"{value:.2f}"


def build_init_prompt(
    vars: VariableSet, templates: PromptTemplates | None = None
) -> PromptText:
    """Opening query: task context, all descriptions, root-finding ask."""
    templates = templates or PromptTemplates()
    variable_lines = "\n".join(f"{v.name}: {v.description}" for v in vars.variables)
    text = templates.init.format(
        task_context=vars.task_context.strip(),
        variable_lines=variable_lines,
    )
    return PromptText(text=_tidy(text), stage=INIT_STAGE)


def _relationship_lines(graph: CausalGraph) -> str:
    lines = []
    order = {name: i for i, name in enumerate(graph.nodes)}
    for source in graph.nodes:
        children = sorted(graph.children(source), key=order.__getitem__)
        if children:
            lines.append(f"{source} causes {', '.join(children)}")
    return "\n".join(lines)


def _expansion_stats_block(
    current: str, stats: CorrelationMatrix
) -> str:
    header = EXPANSION_STATS_HEADER.format(current=current)
    lines = [
        f"{other}: {format_coefficient(value)}"
        for other, value in stats.pairs_excluding(current)
    ]
    return header + "\n" + "\n".join(lines)


def build_expansion_prompt(
    graph: CausalGraph,
    roots: list[str] | tuple[str, ...],
    current: str,
    stats: CorrelationMatrix | None = None,
    templates: PromptTemplates | None = None,
    vars: VariableSet | None = None,
    repeat_descriptions: bool = False,
) -> PromptText:
    """Per-node query: current structure, then 'select the variables caused by'.

    ``roots`` is the init answer and is re-rendered verbatim on every
    expansion.  When ``stats`` is given its row for ``current`` is listed
    after the relationships.  ``repeat_descriptions`` re-includes the
    variable descriptions for stateless backends that do not carry the chat
    history (requires ``vars``).
    """
    graph.index_of(current)
    templates = templates or PromptTemplates()
    relationship_lines = _relationship_lines(graph)
    if roots:
        opening = f"Given {', '.join(roots)} is(are) not affected by any other variable"
        opening += (
            " and the following causal relationships:" if relationship_lines else "."
        )
    else:
        opening = (
            "Given the following causal relationships:"
            if relationship_lines
            else "No causal relationships are known yet."
        )
    stats_block = ""
    if stats is not None:
        if set(stats.variable_names) != set(graph.nodes):
            raise ValueError("statistics cover a different variable set than the graph")
        stats_block = _expansion_stats_block(current, stats)
    text = templates.expansion.format(
        opening_line=opening,
        relationship_lines=relationship_lines,
        stats_block=stats_block,
        current=current,
    )
    if repeat_descriptions:
        if vars is None:
            raise ValueError("repeat_descriptions needs the variable set")
        description_lines = "\n".join(
            f"{v.name}: {v.description}" for v in vars.variables
        )
        text = description_lines + "\n\n" + text
    return PromptText(text=_tidy(text), stage=EXPANSION_STAGE, node=current)


def build_pairwise_prompt(
    a: str,
    description_a: str,
    b: str,
    description_b: str,
    corr: float | None = None,
    templates: PromptTemplates | None = None,
) -> PromptText:
    """Three-option baseline question for one unordered pair."""
    if a == b:
        raise ValueError("pairwise prompt needs two distinct variables")
    templates = templates or PromptTemplates()
    correlation_block = ""
    if corr is not None:
        correlation_block = PAIRWISE_STATS_SENTENCE.format(
            a=a, b=b, coefficient=format_coefficient(corr)
        )
    text = templates.pairwise.format(
        a=a,
        b=b,
        description_a=description_a,
        description_b=description_b,
        correlation_block=correlation_block,
    )
    return PromptText(text=_tidy(text), stage=PAIRWISE_STAGE, pair=(a, b))


# -- completion parsing -------------------------------------------------------

_ANSWER_SPAN = re.compile(r"<Answer>(.*?)</Answer>", re.IGNORECASE | re.DOTALL)
_EMPTY_TOKENS = frozenset({"none", "no variables", "no variable", "n/a", ""})
_TRIM_CHARS = " \t\"'`.,;:!?()[]{}<>*"


def _normalize(token: str) -> str:
    return re.sub(r"\s+", " ", token.strip(_TRIM_CHARS).strip()).casefold()


def parse_answer(
    completion: str, vars: VariableSet, fuzzy: bool = False
) -> ParsedAnswer:
    """Extract variable names from the last <Answer>...</Answer> span.

    The span content is split on commas and line breaks; tokens are matched
    to variable names case-insensitively after trimming whitespace, quotes
    and surrounding punctuation.  Matching is exact by default; false
    matches are worse than dropped answers.  With ``fuzzy=True`` a token
    additionally matches when it is a prefix of exactly one variable name.
    "None"-style tokens and empty spans yield an empty name list.

    Raises AnswerParseError when no answer tags are present.
    """
    spans = _ANSWER_SPAN.findall(completion)
    if not spans:
        raise AnswerParseError("no <Answer>...</Answer> span in completion")
    content = spans[-1]
    # names pass through the same normalization as tokens, so matching
    # survives odd spacing or decorative punctuation on either side
    canonical = {_normalize(name): name for name in vars.names}
    names: list[str] = []
    seen: set[str] = set()
    unmatched: list[str] = []
    for raw in re.split(r"[,\n]", content):
        token = _normalize(raw)
        if token in _EMPTY_TOKENS:
            continue
        match = canonical.get(token)
        if match is None and fuzzy:
            candidates = [
                name for key, name in canonical.items() if key.startswith(token)
            ]
            if len(candidates) == 1:
                match = candidates[0]
        if match is not None:
            if match not in seen:
                seen.add(match)
                names.append(match)
        else:
            stripped = raw.strip()
            if stripped and stripped not in unmatched:
                unmatched.append(stripped)
    return ParsedAnswer(names=tuple(names), unmatched=tuple(unmatched))


class PairwiseVerdict(str, Enum):
    """Outcome of one pairwise query."""

    A_CAUSES_B = "AcausesB"
    B_CAUSES_A = "BcausesA"
    NO_RELATION = "NoRelation"


_VERDICT_BY_LETTER = {
    "A": PairwiseVerdict.A_CAUSES_B,
    "B": PairwiseVerdict.B_CAUSES_A,
    "C": PairwiseVerdict.NO_RELATION,
}

# A capital A/B/C not embedded in a longer word.
_OPTION_LETTER = re.compile(r"(?<![A-Za-z])([ABC])(?![A-Za-z])")


def parse_pairwise_answer(completion: str) -> PairwiseVerdict:
    """Map a pairwise completion to its chosen option.

    Prefers the letter inside the last <Answer> span; without tags, falls
    back to the final standalone option letter anywhere in the text (models
    often end with "the answer is C.").
    """
    spans = _ANSWER_SPAN.findall(completion)
    scope = spans[-1] if spans else completion
    letters = _OPTION_LETTER.findall(scope)
    if spans and letters:
        return _VERDICT_BY_LETTER[letters[0]]
    if letters:
        return _VERDICT_BY_LETTER[letters[-1]]
    raise AnswerParseError("no recognizable option letter in completion")
