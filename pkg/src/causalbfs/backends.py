"""Chat-completion backends: remote HTTP API, ground-truth oracle, cache.

All backends implement one method::

    complete(session, prompt) -> assistant reply text

where ``prompt`` is a :class:`~causalbfs.prompting.PromptText`.  The call
appends both the user message and the reply to the session, so a session
accumulates the whole multi-turn conversation.  Backends also expose a
``calls`` counter (completions actually produced, cache hits excluded)
which the tests and the query accounting rely on.

The HTTP adapter speaks the generic ``POST {base_url}/chat/completions``
wire shape, so any compatible provider works; the model checkpoint is just
configuration.  The oracle answers discovery prompts from a known
ground-truth graph, optionally with seeded noise, and is the deterministic
stand-in for a live model in tests and experiments.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import requests

from .graph import CausalGraph
from .prompting import (
    ANSWER_CLOSE,
    ANSWER_OPEN,
    EXPANSION_STAGE,
    INIT_STAGE,
    PAIRWISE_STAGE,
    PromptText,
)


class BackendError(RuntimeError):
    """Base class for backend failures."""


class AuthenticationError(BackendError):
    """The remote API rejected the credential."""


class TransportError(BackendError):
    """Transient transport failures exhausted the retry budget."""


class MalformedResponseError(BackendError):
    """The remote API returned something that is not a chat completion."""


@dataclass
class ChatSession:
    """Ordered multi-turn conversation state.

    Roles must alternate user/assistant after an optional leading system
    message; ``append`` enforces this.
    """

    model_id: str = "oracle"
    temperature: float = 0.0
    seed: int | None = None
    messages: list[dict[str, str]] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")

    def _last_role(self) -> str | None:
        for message in reversed(self.messages):
            if message["role"] != "system":
                return message["role"]
        return None

    def append(self, role: str, content: str) -> None:
        if role == "system":
            if self.messages:
                raise ValueError("system message must come first")
        elif role == "user":
            if self._last_role() == "user":
                raise ValueError("two user messages in a row")
        elif role == "assistant":
            if self._last_role() != "user":
                raise ValueError("assistant message without a preceding user message")
        else:
            raise ValueError(f"unknown role: {role!r}")
        self.messages.append({"role": role, "content": content})


# -- reply cache ---------------------------------------------------------------


class ResponseCache:
    """Content-addressed replies keyed by the full conversation prefix.

    The key hashes model id, sampling parameters, and every message up to
    and including the new user message; multi-turn context changes answers,
    so a prefix-insensitive key would serve wrong replies.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(session: ChatSession, user_message: str) -> str:
        payload = json.dumps(
            {
                "model_id": session.model_id,
                "temperature": session.temperature,
                "seed": session.seed,
                "messages": session.messages + [{"role": "user", "content": user_message}],
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["completion"]

    def put(self, key: str, completion: str) -> None:
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"completion": completion}), encoding="utf-8")
        tmp.replace(path)


# -- remote HTTP backend -------------------------------------------------------


@dataclass
class HttpConfig:
    """Connection settings for a chat-completions endpoint.

    The API key is read from the environment variable named by
    ``api_key_env`` and never stored in config files or run summaries.
    """

    base_url: str = "https://api.openai.com/v1"
    model_id: str = "gpt-4-0125-preview"
    temperature: float = 0.0
    seed: int | None = None
    api_key_env: str = "LLM_API_KEY"
    max_retries: int = 3
    timeout: float = 60.0
    backoff_base: float = 0.5
    backoff_cap: float = 8.0


class HttpChatBackend:
    """Generic chat-completions client with retries, backoff, and caching.

    ``transport`` is injectable for tests: any callable with the signature
    ``(url, headers, payload, timeout) -> (status_code, body_text)``.
    """

    def __init__(
        self,
        config: HttpConfig,
        cache: ResponseCache | None = None,
        transport: Callable[[str, dict, dict, float], tuple[int, str]] | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.cache = cache
        self.transport = transport or self._requests_transport
        self.sleep = sleep
        self.calls = 0
        self._lock = threading.Lock()

    @staticmethod
    def _requests_transport(
        url: str, headers: dict, payload: dict, timeout: float
    ) -> tuple[int, str]:
        response = requests.post(url, headers=headers, json=payload, timeout=timeout)
        return response.status_code, response.text

    def new_session(self) -> ChatSession:
        return ChatSession(
            model_id=self.config.model_id,
            temperature=self.config.temperature,
            seed=self.config.seed,
        )

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise AuthenticationError(
                f"no API key in environment variable {self.config.api_key_env}"
            )
        return key

    def complete(self, session: ChatSession, prompt: PromptText) -> str:
        user_message = prompt.text
        cache_key = None
        if self.cache is not None:
            cache_key = ResponseCache.key(session, user_message)
            hit = self.cache.get(cache_key)
            if hit is not None:
                session.append("user", user_message)
                session.append("assistant", hit)
                return hit
        reply = self._request(session, user_message)
        if self.cache is not None and cache_key is not None:
            self.cache.put(cache_key, reply)
        session.append("user", user_message)
        session.append("assistant", reply)
        return reply

    def _request(self, session: ChatSession, user_message: str) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {
            "Authorization": f"Bearer {self._api_key()}",
            "Content-Type": "application/json",
        }
        payload: dict[str, Any] = {
            "model": session.model_id,
            "messages": session.messages + [{"role": "user", "content": user_message}],
            "temperature": session.temperature,
        }
        if session.seed is not None:
            payload["seed"] = session.seed
        last_failure = "no attempt made"
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                delay = min(
                    self.config.backoff_base * 2 ** (attempt - 1),
                    self.config.backoff_cap,
                )
                self.sleep(delay)
            try:
                status, body = self.transport(url, headers, payload, self.config.timeout)
            except (requests.RequestException, OSError) as exc:
                last_failure = f"transport error: {exc}"
                continue
            if status in (401, 403):
                raise AuthenticationError(f"HTTP {status}: {body[:200]}")
            if status == 429 or status >= 500:
                last_failure = f"HTTP {status}"
                continue
            if status != 200:
                raise MalformedResponseError(f"HTTP {status}: {body[:200]}")
            with self._lock:
                self.calls += 1
            return self._extract_reply(body)
        raise TransportError(
            f"gave up after {self.config.max_retries + 1} attempts ({last_failure})"
        )

    @staticmethod
    def _extract_reply(body: str) -> str:
        try:
            document = json.loads(body)
            content = document["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected response shape: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponseError("completion content is not a string")
        return content


# -- ground-truth oracle -------------------------------------------------------


@dataclass
class OracleConfig:
    """Noise model for the ground-truth oracle.

    ``false_negative_rate`` drops each true child independently (and flips
    pairwise verdicts); ``false_positive_rate`` adds each non-child
    independently.  Replies are deterministic functions of the seed and the
    identity of the query, so runs replay byte-identically even when
    pairwise queries are dispatched concurrently.
    """

    truth: CausalGraph
    false_negative_rate: float = 0.0
    false_positive_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        for rate in (self.false_negative_rate, self.false_positive_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"noise rate {rate} outside [0, 1]")


class OracleBackend:
    """Answers discovery prompts from a known ground-truth graph.

    Replies carry a short reasoning line before the answer tags so the
    parser is exercised on realistic completions.
    """

    def __init__(self, config: OracleConfig):
        self.config = config
        self.calls = 0
        self._asked: dict[str, int] = {}
        self._lock = threading.Lock()

    def new_session(self) -> ChatSession:
        return ChatSession(model_id="oracle", temperature=0.0, seed=self.config.rng_seed)

    def _rng(self, query_key: str) -> random.Random:
        # Keyed by query identity plus a per-key ask counter: deterministic
        # for a given seed regardless of dispatch order, fresh on re-asks.
        with self._lock:
            self.calls += 1
            attempt = self._asked.get(query_key, 0)
            self._asked[query_key] = attempt + 1
        return random.Random(f"{self.config.rng_seed}|{query_key}|{attempt}")

    def complete(self, session: ChatSession, prompt: PromptText) -> str:
        if prompt.stage == INIT_STAGE:
            reply = self._init_reply()
        elif prompt.stage == EXPANSION_STAGE:
            if prompt.node is None:
                raise ValueError("expansion prompt without a node")
            reply = self._expansion_reply(prompt.node)
        elif prompt.stage == PAIRWISE_STAGE:
            if prompt.pair is None:
                raise ValueError("pairwise prompt without a pair")
            reply = self._pairwise_reply(*prompt.pair)
        else:
            raise ValueError(f"unrecognized prompt stage: {prompt.stage!r}")
        session.append("user", prompt.text)
        session.append("assistant", reply)
        return reply

    @staticmethod
    def _wrap(reasoning: str, answer: str) -> str:
        return f"{reasoning}\n{ANSWER_OPEN}{answer}{ANSWER_CLOSE}"

    def _init_reply(self) -> str:
        self._rng("init")
        roots = self.config.truth.roots()
        answer = ", ".join(roots) if roots else "None"
        return self._wrap(
            "Considering which variables no other variable influences.", answer
        )

    def _expansion_reply(self, node: str) -> str:
        rng = self._rng(f"expansion|{node}")
        truth = self.config.truth
        children = set(truth.children(node))
        selected = []
        for candidate in truth.nodes:
            if candidate == node:
                continue
            if candidate in children:
                if rng.random() >= self.config.false_negative_rate:
                    selected.append(candidate)
            elif rng.random() < self.config.false_positive_rate:
                selected.append(candidate)
        answer = ", ".join(selected) if selected else "None"
        return self._wrap(f"Tracing the direct effects of {node}.", answer)

    def _pairwise_reply(self, a: str, b: str) -> str:
        rng = self._rng(f"pairwise|{a}|{b}")
        truth = self.config.truth
        if truth.has_edge(a, b):
            letter = "A"
        elif truth.has_edge(b, a):
            letter = "B"
        else:
            letter = "C"
        if rng.random() < self.config.false_negative_rate:
            letter = rng.choice(sorted(set("ABC") - {letter}))
        return self._wrap(f"Weighing the relationship between {a} and {b}.", letter)


# -- transcript log ------------------------------------------------------------


@dataclass(frozen=True)
class TranscriptRecord:
    """One query/answer exchange as stored in the JSONL transcript."""

    stage: str
    node_or_pair: str | list[str] | None
    prompt: str
    completion: str
    parsed_result: list[str] | str | None
    query_index: int
    wall_time_ms: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "stage": self.stage,
                "node_or_pair": self.node_or_pair,
                "prompt": self.prompt,
                "completion": self.completion,
                "parsed_result": self.parsed_result,
                "query_index": self.query_index,
                "wall_time_ms": self.wall_time_ms,
            },
            ensure_ascii=False,
        )


class TranscriptWriter:
    """Appends one JSON line per query, flushed immediately.

    Flush-per-record means a crashed or aborted run still leaves a usable
    transcript behind.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", encoding="utf-8")

    def write(self, record: TranscriptRecord) -> None:
        self._fh.write(record.to_json() + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> TranscriptWriter:
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class TranscriptError(ValueError):
    """A transcript file is truncated or otherwise corrupt."""


_RECORD_FIELDS = (
    "stage",
    "node_or_pair",
    "prompt",
    "completion",
    "parsed_result",
    "query_index",
    "wall_time_ms",
)


def read_transcript(path: str | Path) -> list[TranscriptRecord]:
    """Load a JSONL transcript, failing loudly on corrupt records."""
    records = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TranscriptError(f"{path}: line {lineno}: {exc.msg}") from exc
        if not isinstance(payload, dict) or any(
            key not in payload for key in _RECORD_FIELDS
        ):
            raise TranscriptError(f"{path}: line {lineno}: incomplete record")
        records.append(TranscriptRecord(**{k: payload[k] for k in _RECORD_FIELDS}))
    return records
