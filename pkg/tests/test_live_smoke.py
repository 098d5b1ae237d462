"""Optional live-API smoke run: 10 items against a real endpoint.

Excluded from normal runs; enable with
  OSMAG_BENCH_LIVE=1 OSMAG_BENCH_API_KEY=... pytest tests/test_live_smoke.py -s
and optionally OSMAG_BENCH_LIVE_MODEL / OSMAG_BENCH_LIVE_URL.
"""

import os

import pytest

from osmag_bench.datasetgen import gen_topological, load_template
from osmag_bench.grading import evaluate
from osmag_bench.llm import RemoteBackend

pytestmark = pytest.mark.skipif(
    os.environ.get("OSMAG_BENCH_LIVE") != "1",
    reason="live smoke run disabled (set OSMAG_BENCH_LIVE=1)",
)


def test_live_ten_items():
    backend = RemoteBackend(
        base_url=os.environ.get("OSMAG_BENCH_LIVE_URL", "https://api.openai.com/v1"),
        model=os.environ.get("OSMAG_BENCH_LIVE_MODEL", "gpt-4o-mini"),
    )
    items = gen_topological([load_template("a")], 1, seed=1)[:10]
    report, _, responses = evaluate(items, backend, max_in_flight=2)
    assert all(r.ok for r in responses)
    print(f"\nlive success rate on 10 items: {report.success_rate:.2f}")
