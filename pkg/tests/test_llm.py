"""Backends: mocks, batching, retries and transcripts."""

import json
import threading
import time

import pytest

from osmag_bench.datasetgen import gen_topological, load_general, load_template
from osmag_bench.errors import AuthError, BackendError, RetryExhaustedError
from osmag_bench.llm import (
    ChatRequest,
    MockCorruptorBackend,
    MockOracleBackend,
    RemoteBackend,
    RetryPolicy,
    TranscriptReplayBackend,
    complete_batch,
    write_transcript,
)


@pytest.fixture(scope="module")
def topo_items():
    return gen_topological([load_template("a")], 1, seed=77)


class TestRequests:
    def test_defaults(self):
        request = ChatRequest(prompt="hi")
        assert request.temperature == 0.2
        assert request.max_tokens == 512

    def test_temperature_bounds(self):
        with pytest.raises(ValueError):
            ChatRequest(prompt="hi", temperature=2.5)


class TestMockOracle:
    def test_returns_canonical_answer(self, topo_items):
        backend = MockOracleBackend(topo_items)
        item = topo_items[3]
        assert backend.complete(ChatRequest(prompt=item.prompt)).text == item.ground_truth[0]

    def test_unknown_prompt_is_terminal(self, topo_items):
        backend = MockOracleBackend(topo_items)
        with pytest.raises(BackendError):
            backend.complete(ChatRequest(prompt="who?"))


class TestMockCorruptor:
    def test_p1_always_wrong(self, topo_items):
        backend = MockCorruptorBackend(topo_items, p=1.0, seed=5)
        for item in topo_items[:20]:
            text = backend.complete(ChatRequest(prompt=item.prompt)).text
            assert text not in item.ground_truth
            # Wrong answer is a permutation: same rooms, reversed.
            from osmag_bench.model import find_room_labels

            assert find_room_labels(text) == list(
                reversed(find_room_labels(item.ground_truth[0]))
            )

    def test_p0_equals_oracle(self, topo_items):
        corruptor = MockCorruptorBackend(topo_items, p=0.0, seed=5)
        oracle = MockOracleBackend(topo_items)
        for item in topo_items[:10]:
            request = ChatRequest(prompt=item.prompt)
            assert corruptor.complete(request).text == oracle.complete(request).text

    def test_deterministic_under_seed_and_order(self, topo_items):
        backend = MockCorruptorBackend(topo_items, p=0.5, seed=9)
        forward = [backend.complete(ChatRequest(prompt=i.prompt)).text for i in topo_items[:30]]
        backward = [
            backend.complete(ChatRequest(prompt=i.prompt)).text
            for i in reversed(topo_items[:30])
        ]
        assert forward == list(reversed(backward))

    def test_hierarchical_corruption_names_other_building(self):
        from osmag_bench.datasetgen import build_hierarchy_pool, gen_hierarchical

        pool = build_hierarchy_pool({"templates": ["a", "b"], "maps_per_template": 2}, seed=2)
        items = gen_hierarchical(pool, 5, seed=2)
        backend = MockCorruptorBackend(items, p=1.0, seed=1)
        for item in items:
            text = backend.complete(ChatRequest(prompt=item.prompt)).text
            assert text in ("SIST_1", "SIST_2")
            assert text != item.ground_truth[0]

    def test_general_corruption_avoids_answers(self):
        items = load_general()
        backend = MockCorruptorBackend(items, p=1.0, seed=1)
        for item in items:
            text = backend.complete(ChatRequest(prompt=item.prompt)).text
            assert all(ans.lower() not in text.lower() for ans in item.ground_truth)


class TestBatch:
    def test_serial_order_preserved(self, topo_items):
        backend = MockOracleBackend(topo_items)
        requests = [ChatRequest(prompt=i.prompt) for i in topo_items[:25]]
        responses = complete_batch(backend, requests, max_in_flight=1)
        assert [r.text for r in responses] == [i.ground_truth[0] for i in topo_items[:25]]

    def test_parallel_order_preserved_and_bounded(self, topo_items):
        limit = 8

        class Instrumented(MockOracleBackend):
            def __init__(self, items):
                super().__init__(items)
                self.lock = threading.Lock()
                self.in_flight = 0
                self.peak = 0

            def complete(self, request):
                with self.lock:
                    self.in_flight += 1
                    self.peak = max(self.peak, self.in_flight)
                time.sleep(0.002)
                try:
                    return super().complete(request)
                finally:
                    with self.lock:
                        self.in_flight -= 1

        backend = Instrumented(topo_items)
        requests = [ChatRequest(prompt=i.prompt) for i in topo_items[:100]]
        responses = complete_batch(backend, requests, max_in_flight=limit)
        assert [r.text for r in responses] == [i.ground_truth[0] for i in topo_items[:100]]
        assert backend.peak <= limit

    def test_one_failure_does_not_abort_batch(self, topo_items):
        backend = MockOracleBackend(topo_items[:99])
        requests = [ChatRequest(prompt=i.prompt) for i in topo_items[:100]]
        responses = complete_batch(backend, requests, max_in_flight=4)
        assert sum(1 for r in responses if r.ok) == 99
        assert not responses[99].ok

    def test_zero_in_flight_rejected(self, topo_items):
        with pytest.raises(ValueError):
            complete_batch(MockOracleBackend(topo_items), [], max_in_flight=0)


class FakeResponse:
    def __init__(self, status_code, body=None, text=""):
        self.status_code = status_code
        self._body = body or {}
        self.text = text

    def json(self):
        return self._body


class FakeSession:
    def __init__(self, script):
        self.script = list(script)
        self.calls = 0

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls += 1
        outcome = self.script.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def ok_body(text="fine"):
    return {
        "choices": [{"message": {"content": text}}],
        "model": "test-model",
        "usage": {"prompt_tokens": 10, "completion_tokens": 3},
    }


class TestRemote:
    def make(self, script, attempts=3):
        sleeps = []
        backend = RemoteBackend(
            "https://example.invalid/v1",
            "test-model",
            api_key="k",
            retry=RetryPolicy(max_attempts=attempts, base_delay=0.01),
            session=FakeSession(script),
            sleep=sleeps.append,
        )
        return backend, sleeps

    def test_success_records_usage_and_latency(self):
        backend, _ = self.make([FakeResponse(200, ok_body("hello"))])
        response = backend.complete(ChatRequest(prompt="q"))
        assert response.text == "hello"
        assert response.usage["prompt_tokens"] == 10
        assert response.latency_s >= 0

    def test_retries_on_429_then_succeeds(self):
        backend, sleeps = self.make(
            [FakeResponse(429), FakeResponse(503), FakeResponse(200, ok_body())]
        )
        assert backend.complete(ChatRequest(prompt="q")).ok
        assert len(sleeps) == 2
        assert sleeps[1] > sleeps[0]  # exponential backoff

    def test_auth_failure_never_retried(self):
        backend, sleeps = self.make([FakeResponse(401)])
        with pytest.raises(AuthError):
            backend.complete(ChatRequest(prompt="q"))
        assert backend._session.calls == 1
        assert not sleeps

    def test_validation_4xx_terminal(self):
        backend, _ = self.make([FakeResponse(400, text="bad request")])
        with pytest.raises(BackendError):
            backend.complete(ChatRequest(prompt="q"))
        assert backend._session.calls == 1

    def test_retry_budget_exhausted_carries_cause(self):
        backend, _ = self.make([FakeResponse(503)] * 3)
        with pytest.raises(RetryExhaustedError) as err:
            backend.complete(ChatRequest(prompt="q"))
        assert "503" in str(err.value)

    def test_missing_key_is_terminal(self, monkeypatch):
        monkeypatch.delenv("OSMAG_BENCH_API_KEY", raising=False)
        with pytest.raises(AuthError):
            RemoteBackend("https://example.invalid", "m")


class TestTranscripts:
    def test_write_and_replay_round_trip(self, topo_items, tmp_path):
        backend = MockOracleBackend(topo_items)
        requests = [ChatRequest(prompt=i.prompt) for i in topo_items[:10]]
        responses = complete_batch(backend, requests)
        path = tmp_path / "session.jsonl"
        write_transcript(path, requests, responses)

        replay = TranscriptReplayBackend(path)
        again = complete_batch(replay, requests)
        assert [r.text for r in again] == [r.text for r in responses]

    def test_replay_deterministic_bytes(self, topo_items, tmp_path):
        backend = MockOracleBackend(topo_items)
        requests = [ChatRequest(prompt=i.prompt) for i in topo_items[:10]]
        responses = complete_batch(backend, requests)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_transcript(p1, requests, responses)
        write_transcript(p2, requests, responses)
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_prompt_in_transcript(self, topo_items, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(
            json.dumps({"prompt": "other", "response": "x"}) + "\n", encoding="utf-8"
        )
        replay = TranscriptReplayBackend(path)
        with pytest.raises(BackendError):
            replay.complete(ChatRequest(prompt="not recorded"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(BackendError):
            TranscriptReplayBackend(tmp_path / "none.jsonl")
