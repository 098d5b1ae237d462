"""Chat-completion backends: a remote HTTP client plus deterministic mocks.

The mocks exist so the whole evaluation pipeline is testable offline: the
oracle always answers with the canonical ground truth, the corruptor flips
a seeded fraction of answers to guaranteed-wrong ones, and transcript
replay reproduces a recorded session byte for byte.
"""

from __future__ import annotations

import json
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import requests

from .errors import AuthError, BackendError, RetryExhaustedError
from .model import find_room_labels
from .planner import render_path
from .seeds import derive_seed

DEFAULT_TEMPERATURE = 0.2
DEFAULT_MAX_TOKENS = 512
API_KEY_ENV = "OSMAG_BENCH_API_KEY"


@dataclass
class ChatRequest:
    prompt: str
    model: str = ""
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")


@dataclass
class ChatResponse:
    text: str
    model: str = ""
    usage: dict = field(default_factory=dict)
    latency_s: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class Backend:
    """One chat completion per call; batch execution is layered on top."""

    name = "backend"

    def complete(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError


class MockOracleBackend(Backend):
    """Answers every known prompt with its canonical ground truth."""

    name = "mock-oracle"

    def __init__(self, items: Iterable):
        self._answers = {item.prompt: item.ground_truth[0] for item in items}

    def complete(self, request: ChatRequest) -> ChatResponse:
        answer = self._answers.get(request.prompt)
        if answer is None:
            raise BackendError("prompt not in the oracle's answer set")
        return ChatResponse(text=answer, model=self.name)


class MockCorruptorBackend(Backend):
    """Returns a deliberately wrong answer with probability p per item.

    The corruption coin is derived from (seed, item id), not from call
    order, so parallel and serial runs corrupt the same items.
    """

    name = "mock-corruptor"

    def __init__(self, items: Iterable, p: float, seed: int):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"corruption probability {p} outside [0, 1]")
        self.p = p
        self.seed = seed
        self._items = {item.prompt: item for item in items}

    def complete(self, request: ChatRequest) -> ChatResponse:
        item = self._items.get(request.prompt)
        if item is None:
            raise BackendError("prompt not in the corruptor's item set")
        coin = random.Random(derive_seed(self.seed, "corrupt", item.item_id)).random()
        text = self._wrong_answer(item) if coin < self.p else item.ground_truth[0]
        return ChatResponse(text=text, model=self.name)

    @staticmethod
    def _wrong_answer(item) -> str:
        kind = item.kind.value if hasattr(item.kind, "value") else str(item.kind)
        if kind == "topological":
            # Reversed sequence: starts at the goal, so it can never equal
            # any ground-truth alternative (they all start at the start).
            rooms = find_room_labels(item.ground_truth[0])
            return render_path(list(reversed(rooms)))
        if kind == "hierarchical":
            buildings = item.metadata.get("buildings", ["SIST_1", "SIST_2"])
            others = [b for b in buildings if b != item.ground_truth[0]]
            return others[0] if others else "nowhere"
        return "NO ANSWER"


class TranscriptReplayBackend(Backend):
    """Replays responses recorded by a previous run, keyed by prompt."""

    name = "replay"

    def __init__(self, path: str | Path):
        self._responses: dict[str, str] = {}
        source = Path(path)
        if not source.exists():
            raise BackendError(f"transcript not found: {source}")
        for line in source.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            self._responses[row["prompt"]] = row["response"]

    def complete(self, request: ChatRequest) -> ChatResponse:
        try:
            return ChatResponse(text=self._responses[request.prompt], model=self.name)
        except KeyError:
            raise BackendError("prompt missing from transcript") from None


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    base_delay: float = 0.5
    max_delay: float = 8.0
    retry_statuses: frozenset = frozenset({429, 500, 502, 503, 504})

    def delay(self, attempt: int) -> float:
        return min(self.base_delay * (2**attempt), self.max_delay)


class RemoteBackend(Backend):
    """Chat-completions HTTP client with exponential-backoff retries.

    Auth and other 4xx validation failures are terminal immediately;
    timeouts, connection drops, 429 and 5xx are retried up to the policy's
    attempt cap.
    """

    name = "remote"

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        api_key: str | None = None,
        api_key_env: str = API_KEY_ENV,
        timeout: float = 60.0,
        retry: RetryPolicy | None = None,
        session=None,
        sleep=time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        key = api_key if api_key is not None else os.environ.get(api_key_env, "")
        if not key:
            raise AuthError(f"no API key: set {api_key_env} or pass api_key")
        self._key = key
        self.timeout = timeout
        self.retry = retry or RetryPolicy()
        self._session = session or requests.Session()
        self._sleep = sleep

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload = {
            "model": request.model or self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {
            "Authorization": f"Bearer {self._key}",
            "Content-Type": "application/json",
        }
        last_cause: Exception | None = None
        for attempt in range(self.retry.max_attempts):
            started = time.monotonic()
            try:
                response = self._session.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last_cause = exc
                self._sleep(self.retry.delay(attempt))
                continue
            latency = time.monotonic() - started
            if response.status_code in (401, 403):
                raise AuthError(f"authentication failed ({response.status_code})")
            if response.status_code in self.retry.retry_statuses:
                last_cause = BackendError(f"HTTP {response.status_code}")
                self._sleep(self.retry.delay(attempt))
                continue
            if response.status_code >= 400:
                raise BackendError(f"HTTP {response.status_code}: {response.text[:200]}")
            body = response.json()
            try:
                text = body["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"unexpected response shape: {body!r:.200}") from exc
            return ChatResponse(
                text=text,
                model=body.get("model", payload["model"]),
                usage=body.get("usage", {}) or {},
                latency_s=latency,
            )
        raise RetryExhaustedError(
            f"gave up after {self.retry.max_attempts} attempts: {last_cause}",
            last_cause=last_cause,
        )


def complete_batch(
    backend: Backend, requests_: Sequence[ChatRequest], max_in_flight: int = 1
) -> list[ChatResponse]:
    """Run requests with bounded concurrency, preserving input order.

    Per-item failures come back as error responses; one bad item never
    aborts the rest of the batch.
    """
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be >= 1")

    def run(request: ChatRequest) -> ChatResponse:
        try:
            return backend.complete(request)
        except Exception as exc:  # noqa: BLE001 - isolation contract
            return ChatResponse(text="", model=backend.name, error=f"{type(exc).__name__}: {exc}")

    if max_in_flight == 1:
        return [run(r) for r in requests_]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(run, requests_))


def write_transcript(
    path: str | Path, requests_: Sequence[ChatRequest], responses: Sequence[ChatResponse]
) -> None:
    """One request/response pair per line, in item order."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fp:
        for request, response in zip(requests_, responses):
            fp.write(
                json.dumps(
                    {
                        "prompt": request.prompt,
                        "response": response.text,
                        "model": response.model,
                        "usage": response.usage,
                        "error": response.error,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
