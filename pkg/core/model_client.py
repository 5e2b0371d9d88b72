"""
model_client.py
---------------
Chat-completion clients used by the diagnostic harness, plus the
append-only transcript every request/response pair is written to.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import openai
from tqdm import tqdm

from core.config import EndpointConfig
from core.errors import ConfigError, EndpointError
from core.logger import get_logger

log = get_logger(__name__)

TRANSIENT_ERRORS = (
    openai.RateLimitError,
    openai.APITimeoutError,
    openai.APIConnectionError,
    openai.InternalServerError,
)


class ChatClient(Protocol):
    model: str

    def complete(self, system: str, prompt: str, key: str = "") -> str: ...


@dataclass
class TranscriptEntry:
    key: str
    model: str
    system: str
    prompt: str
    response: str
    config_digest: str = ""


class TranscriptLog:
    """Line-delimited request/response pairs; only ever appended to."""

    def __init__(self, path: str | Path, config_digest: str = ""):
        self.path = Path(path)
        self.config_digest = config_digest

    def append(self, entries: Iterable[TranscriptEntry]) -> int:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        n = 0
        with open(self.path, "a", encoding="utf-8", newline="\n") as f:
            for e in entries:
                e.config_digest = e.config_digest or self.config_digest
                f.write(json.dumps(e.__dict__, ensure_ascii=False) + "\n")
                n += 1
        return n

    def entries(self) -> list[TranscriptEntry]:
        if not self.path.exists():
            return []
        with open(self.path, "r", encoding="utf-8") as f:
            return [TranscriptEntry(**json.loads(line)) for line in f if line.strip()]

    def responses(self) -> dict[str, str]:
        """Latest response per key."""
        return {e.key: e.response for e in self.entries()}


# ============================================================
# Clients
# ============================================================
class OpenAIChatClient:
    def __init__(self, cfg: EndpointConfig, client=None, sleep: Callable[[float], None] = time.sleep):
        self.cfg = cfg
        self.model = cfg.model
        self._sleep = sleep
        if client is None:
            api_key = os.environ.get(cfg.api_key_env, "").strip()
            if not api_key:
                raise ConfigError(f"environment variable {cfg.api_key_env} is not set")
            client = openai.OpenAI(api_key=api_key, base_url=cfg.base_url, timeout=cfg.timeout, max_retries=0)
        self._client = client

    def complete(self, system: str, prompt: str, key: str = "") -> str:
        messages = [{"role": "user", "content": prompt}]
        if system:
            messages.insert(0, {"role": "system", "content": system})
        backoff = self.cfg.backoff
        last: BaseException | None = None
        for attempt in range(1, self.cfg.max_retries + 1):
            try:
                resp = self._client.chat.completions.create(
                    model=self.model, messages=messages, temperature=self.cfg.temperature
                )
                return resp.choices[0].message.content or ""
            except TRANSIENT_ERRORS as e:
                last = e
                if attempt == self.cfg.max_retries:
                    break
                log.warning("request %s failed (%s); retrying in %.1fs", key or "-", type(e).__name__, backoff)
                self._sleep(backoff)
                backoff *= 2
            except openai.OpenAIError as e:
                log.error("request %s rejected: %r", key or "-", e)
                raise EndpointError(attempt, e) from e
        if isinstance(last, openai.APITimeoutError):
            raise TimeoutError(f"request {key or '-'} timed out after {self.cfg.max_retries} attempt(s)") from last
        raise EndpointError(self.cfg.max_retries, last)


class CallableClient:
    """Wraps ``fn(system, prompt, key) -> str``; used for stub endpoints."""

    def __init__(self, fn: Callable[[str, str, str], str], model: str = "stub"):
        self.fn = fn
        self.model = model

    def complete(self, system: str, prompt: str, key: str = "") -> str:
        return self.fn(system, prompt, key)


class ReplayClient:
    """Plays back a transcript; an unknown key is an endpoint failure."""

    def __init__(self, transcript: TranscriptLog | str | Path, model: str = "replay"):
        log_ = transcript if isinstance(transcript, TranscriptLog) else TranscriptLog(transcript)
        self._responses = log_.responses()
        self.model = model

    def complete(self, system: str, prompt: str, key: str = "") -> str:
        try:
            return self._responses[key]
        except KeyError:
            raise EndpointError(0, KeyError(key)) from None


def build_client(cfg: EndpointConfig, replay: str | Path | None = None) -> ChatClient:
    return ReplayClient(replay, model=cfg.model) if replay else OpenAIChatClient(cfg)


def query_model(
    cfg: EndpointConfig,
    prompt: str,
    system: str = "",
    key: str = "",
    client: ChatClient | None = None,
    transcript: TranscriptLog | None = None,
) -> str:
    """One request; logged to ``transcript`` when given."""
    client = client or build_client(cfg)
    response = client.complete(system, prompt, key)
    if transcript is not None:
        transcript.append([TranscriptEntry(key, client.model, system, prompt, response)])
    return response


# ============================================================
# Batch querying
# ============================================================
def query_many(
    client: ChatClient,
    items: Sequence,
    max_in_flight: int = 4,
    transcript: TranscriptLog | None = None,
    progress: bool = True,
) -> list[str]:
    """Query every item (``item_id``, ``system``, ``prompt``); responses come back in item order."""
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be >= 1")

    def ask(item) -> str:
        return client.complete(item.system, item.prompt, item.item_id)

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        futures = [pool.submit(ask, it) for it in items]
        responses = [f.result() for f in tqdm(futures, desc="query", disable=not progress, unit="item")]

    if transcript is not None:
        transcript.append(
            TranscriptEntry(it.item_id, client.model, it.system, it.prompt, r) for it, r in zip(items, responses)
        )
    log.info("queried %d item(s) with %s", len(items), client.model)
    return responses
