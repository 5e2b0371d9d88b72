import threading
import time
from types import SimpleNamespace

import httpx
import openai
import pytest

from core.config import EndpointConfig
from core.errors import ConfigError, EndpointError
from core.model_client import (
    CallableClient,
    OpenAIChatClient,
    ReplayClient,
    TranscriptEntry,
    TranscriptLog,
    query_many,
    query_model,
)

REQUEST = httpx.Request("POST", "https://example.invalid/v1/chat/completions")


def _reply(text):
    return SimpleNamespace(choices=[SimpleNamespace(message=SimpleNamespace(content=text))])


class FakeCompletions:
    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.calls = []

    def create(self, **kwargs):
        self.calls.append(kwargs)
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, BaseException):
            raise outcome
        return _reply(outcome)


def _fake(outcomes):
    completions = FakeCompletions(outcomes)
    return SimpleNamespace(chat=SimpleNamespace(completions=completions)), completions


def _item(i):
    return SimpleNamespace(item_id=f"k{i}", system="sys", prompt=f"prompt {i}")


def test_retries_with_exponential_backoff():
    client, completions = _fake([openai.APIConnectionError(request=REQUEST)] * 2 + ["(p | q)"])
    sleeps = []
    c = OpenAIChatClient(EndpointConfig(max_retries=5, backoff=1.0), client=client, sleep=sleeps.append)
    assert c.complete("sys", "chain", "k1") == "(p | q)"
    assert sleeps == [1.0, 2.0]
    assert completions.calls[0]["messages"] == [
        {"role": "system", "content": "sys"},
        {"role": "user", "content": "chain"},
    ]
    assert completions.calls[0]["temperature"] == 0.0


def test_gives_up_after_max_retries():
    client, _ = _fake([openai.APIConnectionError(request=REQUEST)] * 3)
    c = OpenAIChatClient(EndpointConfig(max_retries=3), client=client, sleep=lambda s: None)
    with pytest.raises(EndpointError) as e:
        c.complete("", "x")
    assert e.value.attempts == 3


def test_timeouts_surface_as_timeout_error():
    client, _ = _fake([openai.APITimeoutError(request=REQUEST)] * 2)
    c = OpenAIChatClient(EndpointConfig(max_retries=2), client=client, sleep=lambda s: None)
    with pytest.raises(TimeoutError):
        c.complete("", "x")


def test_permanent_errors_are_not_retried():
    client, completions = _fake([openai.OpenAIError("bad request"), "never"])
    c = OpenAIChatClient(EndpointConfig(max_retries=5), client=client, sleep=lambda s: None)
    with pytest.raises(EndpointError):
        c.complete("", "x")
    assert len(completions.calls) == 1


def test_missing_api_key(monkeypatch):
    monkeypatch.delenv("FOLTRACE_TEST_KEY", raising=False)
    with pytest.raises(ConfigError):
        OpenAIChatClient(EndpointConfig(api_key_env="FOLTRACE_TEST_KEY"))


def test_query_many_keeps_item_order():
    seen = []
    lock = threading.Lock()

    def answer(system, prompt, key):
        time.sleep(0.01 * (5 - int(key[1:]) % 5))
        with lock:
            seen.append(key)
        return prompt.upper()

    items = [_item(i) for i in range(10)]
    out = query_many(CallableClient(answer), items, max_in_flight=4, progress=False)
    assert out == [f"PROMPT {i}" for i in range(10)]
    assert sorted(seen) == sorted(it.item_id for it in items)


def test_query_many_rejects_zero_in_flight():
    with pytest.raises(ValueError):
        query_many(CallableClient(lambda s, p, k: ""), [], max_in_flight=0)


def test_transcript_record_and_replay(tmp_path):
    log = TranscriptLog(tmp_path / "t.jsonl", config_digest="d1")
    items = [_item(i) for i in range(3)]
    first = query_many(CallableClient(lambda s, p, k: p[::-1], model="m"), items, transcript=log, progress=False)

    entries = log.entries()
    assert [e.key for e in entries] == ["k0", "k1", "k2"]
    assert all(e.config_digest == "d1" and e.model == "m" for e in entries)

    replayed = query_many(ReplayClient(log), items, progress=False)
    assert replayed == first


def test_transcript_is_append_only(tmp_path):
    log = TranscriptLog(tmp_path / "t.jsonl")
    log.append([TranscriptEntry("k", "m", "", "p", "old")])
    log.append([TranscriptEntry("k", "m", "", "p", "new")])
    assert len(log.entries()) == 2
    assert log.responses() == {"k": "new"}


def test_replay_of_unknown_key(tmp_path):
    with pytest.raises(EndpointError):
        ReplayClient(tmp_path / "missing.jsonl").complete("", "", "nope")


def test_query_model_logs_one_request(tmp_path):
    log = TranscriptLog(tmp_path / "t.jsonl")
    client = CallableClient(lambda s, p, k: "True", model="m")
    assert query_model(EndpointConfig(), "<bos> True ⇔ __", key="k1", client=client, transcript=log) == "True"
    (entry,) = log.entries()
    assert (entry.key, entry.prompt, entry.response) == ("k1", "<bos> True ⇔ __", "True")
