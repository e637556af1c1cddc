import json

import pytest

from causalbfs import (
    AuthenticationError,
    CausalGraph,
    ChatSession,
    HttpChatBackend,
    HttpConfig,
    MalformedResponseError,
    OracleBackend,
    OracleConfig,
    ResponseCache,
    TranscriptError,
    TransportError,
    parse_answer,
    read_transcript,
)
from causalbfs.backends import TranscriptRecord, TranscriptWriter
from causalbfs.prompting import PromptText

from conftest import make_vars


def chain_truth():
    g = CausalGraph(["A", "B", "C"])
    g.add_edge("A", "B")
    g.add_edge("B", "C")
    return g


def init_prompt():
    return PromptText(text="find the roots", stage="init")


def expansion_prompt(node):
    return PromptText(text=f"expand {node}", stage="expansion", node=node)


def pairwise_prompt(a, b):
    return PromptText(text=f"{a} vs {b}", stage="pairwise", pair=(a, b))


# -- chat session -----------------------------------------------------------------

def test_session_roles_must_alternate():
    session = ChatSession()
    session.append("system", "be terse")
    session.append("user", "hi")
    with pytest.raises(ValueError):
        session.append("user", "hi again")
    session.append("assistant", "hello")
    with pytest.raises(ValueError):
        session.append("assistant", "hello again")
    with pytest.raises(ValueError):
        session.append("system", "too late")


def test_session_rejects_out_of_range_temperature():
    with pytest.raises(ValueError):
        ChatSession(temperature=2.5)


# -- oracle -----------------------------------------------------------------------

def test_oracle_init_names_the_unique_root():
    backend = OracleBackend(OracleConfig(truth=chain_truth()))
    session = backend.new_session()
    reply = backend.complete(session, init_prompt())
    assert "<Answer>A</Answer>" in reply
    assert session.messages[-1]["content"] == reply


def test_oracle_expansion_replies():
    truth = CausalGraph(["A", "B", "C"])
    truth.add_edge("A", "B")
    truth.add_edge("A", "C")
    backend = OracleBackend(OracleConfig(truth=truth))
    assert "<Answer>B, C</Answer>" in backend.complete(
        backend.new_session(), expansion_prompt("A")
    )
    assert "<Answer>None</Answer>" in backend.complete(
        backend.new_session(), expansion_prompt("B")
    )


def test_oracle_full_false_negative_rate_drops_everything():
    truth = chain_truth()
    backend = OracleBackend(OracleConfig(truth=truth, false_negative_rate=1.0))
    reply = backend.complete(backend.new_session(), expansion_prompt("A"))
    assert "<Answer>None</Answer>" in reply


def test_oracle_pairwise_letters():
    backend = OracleBackend(OracleConfig(truth=chain_truth()))
    s = backend.new_session
    assert "<Answer>A</Answer>" in backend.complete(s(), pairwise_prompt("A", "B"))
    assert "<Answer>B</Answer>" in backend.complete(s(), pairwise_prompt("B", "A"))
    assert "<Answer>C</Answer>" in backend.complete(s(), pairwise_prompt("A", "C"))


def test_oracle_replies_carry_reasoning_before_the_tags():
    vars = make_vars(["A", "B", "C"])
    backend = OracleBackend(OracleConfig(truth=chain_truth()))
    reply = backend.complete(backend.new_session(), expansion_prompt("A"))
    assert not reply.startswith("<Answer>")
    assert parse_answer(reply, vars).names == ("B",)


def test_oracle_noise_is_deterministic_per_seed():
    def transcript(seed):
        backend = OracleBackend(
            OracleConfig(
                truth=chain_truth(),
                false_negative_rate=0.4,
                false_positive_rate=0.3,
                rng_seed=seed,
            )
        )
        out = []
        for node in ("A", "B", "C"):
            out.append(backend.complete(backend.new_session(), expansion_prompt(node)))
        out.append(backend.complete(backend.new_session(), pairwise_prompt("A", "C")))
        return out

    assert transcript(5) == transcript(5)
    assert transcript(5) != transcript(6)


def test_oracle_counts_calls():
    backend = OracleBackend(OracleConfig(truth=chain_truth()))
    backend.complete(backend.new_session(), init_prompt())
    backend.complete(backend.new_session(), expansion_prompt("A"))
    assert backend.calls == 2


# -- response cache ----------------------------------------------------------------

def ok_body(content):
    return 200, json.dumps({"choices": [{"message": {"content": content}}]})


def test_cache_hit_skips_the_network(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    transport_calls = []

    def transport(url, headers, payload, timeout):
        transport_calls.append(payload)
        return ok_body("reply one")

    cache = ResponseCache(tmp_path / "cache")
    config = HttpConfig(base_url="http://fake", model_id="m")
    backend = HttpChatBackend(config, cache=cache, transport=transport)
    prompt = PromptText(text="question", stage="init")

    first = backend.complete(backend.new_session(), prompt)
    again = backend.complete(backend.new_session(), prompt)
    assert first == again == "reply one"
    assert len(transport_calls) == 1
    assert backend.calls == 1


def test_cache_keys_are_prefix_sensitive(tmp_path):
    cache = ResponseCache(tmp_path)
    fresh = ChatSession(model_id="m", temperature=0.0)
    deep = ChatSession(model_id="m", temperature=0.0)
    deep.append("user", "earlier question")
    deep.append("assistant", "earlier reply")
    assert ResponseCache.key(fresh, "same ask") != ResponseCache.key(deep, "same ask")
    near = ChatSession(model_id="m", temperature=0.5)
    assert ResponseCache.key(fresh, "same ask") != ResponseCache.key(near, "same ask")
    assert ResponseCache.key(fresh, "same ask") == ResponseCache.key(
        ChatSession(model_id="m", temperature=0.0), "same ask"
    )


def test_cache_never_serves_across_keys(tmp_path):
    cache = ResponseCache(tmp_path)
    a = ChatSession(model_id="m")
    cache.put(ResponseCache.key(a, "ask one"), "answer one")
    assert cache.get(ResponseCache.key(a, "ask one.")) is None
    assert cache.get(ResponseCache.key(a, "ask one")) == "answer one"


# -- http backend -----------------------------------------------------------------

def test_http_backend_happy_path(monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "secret")
    seen = {}

    def transport(url, headers, payload, timeout):
        seen.update(url=url, headers=headers, payload=payload)
        return ok_body("the reply")

    backend = HttpChatBackend(
        HttpConfig(base_url="http://api.test/v1", model_id="model-x", temperature=0.7),
        transport=transport,
    )
    session = backend.new_session()
    reply = backend.complete(session, PromptText(text="ask", stage="init"))
    assert reply == "the reply"
    assert seen["url"] == "http://api.test/v1/chat/completions"
    assert seen["headers"]["Authorization"] == "Bearer secret"
    assert seen["payload"]["model"] == "model-x"
    assert seen["payload"]["messages"][-1] == {"role": "user", "content": "ask"}
    assert session.messages == [
        {"role": "user", "content": "ask"},
        {"role": "assistant", "content": "the reply"},
    ]


def test_http_backend_missing_key_is_an_auth_error(monkeypatch):
    monkeypatch.delenv("LLM_API_KEY", raising=False)
    backend = HttpChatBackend(HttpConfig(), transport=lambda *a: ok_body("x"))
    with pytest.raises(AuthenticationError):
        backend.complete(backend.new_session(), PromptText(text="q", stage="init"))


def test_http_backend_401_is_an_auth_error(monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "bad")
    backend = HttpChatBackend(
        HttpConfig(), transport=lambda *a: (401, "no entry"), sleep=lambda s: None
    )
    with pytest.raises(AuthenticationError):
        backend.complete(backend.new_session(), PromptText(text="q", stage="init"))


def test_http_backend_retries_transient_failures(monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    statuses = iter([(500, "boom"), (429, "slow down"), ok_body("finally")])
    delays = []
    backend = HttpChatBackend(
        HttpConfig(max_retries=3, backoff_base=0.25),
        transport=lambda *a: next(statuses),
        sleep=delays.append,
    )
    reply = backend.complete(backend.new_session(), PromptText(text="q", stage="init"))
    assert reply == "finally"
    assert delays == [0.25, 0.5]


def test_http_backend_exhausts_the_retry_budget(monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    attempts = []
    backend = HttpChatBackend(
        HttpConfig(max_retries=2),
        transport=lambda *a: attempts.append(1) or (503, "down"),
        sleep=lambda s: None,
    )
    with pytest.raises(TransportError):
        backend.complete(backend.new_session(), PromptText(text="q", stage="init"))
    assert len(attempts) == 3  # initial try plus two retries


def test_http_backend_malformed_response(monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    backend = HttpChatBackend(
        HttpConfig(), transport=lambda *a: (200, "this is not json")
    )
    with pytest.raises(MalformedResponseError):
        backend.complete(backend.new_session(), PromptText(text="q", stage="init"))
    backend = HttpChatBackend(
        HttpConfig(), transport=lambda *a: (200, json.dumps({"choices": []}))
    )
    with pytest.raises(MalformedResponseError):
        backend.complete(backend.new_session(), PromptText(text="q", stage="init"))


# -- transcripts -------------------------------------------------------------------

def test_transcript_round_trip(tmp_path):
    path = tmp_path / "t.jsonl"
    records = [
        TranscriptRecord("init", None, "p0", "c0", ["A"], 0, 1.5),
        TranscriptRecord("expansion", "A", "p1", "c1", ["B", "C"], 1, 2.25),
        TranscriptRecord("pairwise", ["A", "B"], "p2", "c2", "AcausesB", 2, 0.5),
    ]
    with TranscriptWriter(path) as writer:
        for record in records:
            writer.write(record)
    assert read_transcript(path) == records


def test_transcript_truncated_record_is_corrupt(tmp_path):
    path = tmp_path / "t.jsonl"
    record = TranscriptRecord("init", None, "p", "c", [], 0, 1.0)
    path.write_text(record.to_json() + "\n" + record.to_json()[: -25] + "\n")
    with pytest.raises(TranscriptError):
        read_transcript(path)


def test_transcript_missing_field_is_corrupt(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text(json.dumps({"stage": "init", "prompt": "p"}) + "\n")
    with pytest.raises(TranscriptError):
        read_transcript(path)
