"""Command-line behavior and exit codes."""

import json
import shutil

import pytest

from osmag_bench.cli import main
from osmag_bench.osmio import load_map

from conftest import resource_path


@pytest.fixture()
def campus_path(tmp_path):
    target = tmp_path / "campus_floor.osm"
    shutil.copyfile(str(resource_path("maps", "campus_floor.osm")), target)
    return target


class TestValidate:
    def test_good_map(self, campus_path, capsys):
        assert main(["validate", "--map", str(campus_path)]) == 0
        out = capsys.readouterr().out
        assert "13 areas" in out

    def test_integrity_error_exits_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.osm"
        bad.write_text(
            '<osm><way id="1"><tag k="osmAG:type" v="area"/><tag k="name" v="A"/></way>'
            '<way id="2"><tag k="osmAG:type" v="area"/><tag k="name" v="A"/></way></osm>',
            encoding="utf-8",
        )
        assert main(["validate", "--map", str(bad)]) == 3
        assert "error" in capsys.readouterr().err

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["validate"])
        assert err.value.code == 2


class TestPlan:
    def test_prints_bracketed_path(self, campus_path, capsys):
        assert main(["plan", "--map", str(campus_path), "--from", "1e-101", "--to", "1e-107"]) == 0
        out = capsys.readouterr().out.strip()
        assert out == "['1e-101','corridor_1','elevator_1','corridor_4','1e-107']"

    def test_blocked_elevator_detour(self, campus_path, capsys):
        assert (
            main(
                [
                    "plan", "--map", str(campus_path),
                    "--from", "1e-101", "--to", "1e-107",
                    "--blocked", "elevator_1",
                ]
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "elevator_1" not in out
        assert (
            out.splitlines()[0]
            == "['1e-101','corridor_1','corridor_2','corridor_3','corridor_4','1e-107']"
        )

    def test_unknown_area_exits_3(self, campus_path):
        assert main(["plan", "--map", str(campus_path), "--from", "zz", "--to", "1e-107"]) == 3


class TestVariantCommand:
    def test_chained_transforms(self, campus_path, tmp_path, capsys):
        out = tmp_path / "v2.osm"
        code = main(
            [
                "variant", "--map", str(campus_path), "--out", str(out),
                "--kind", "v2,strip,prune", "--keep", "1e-101,1e-107",
            ]
        )
        assert code == 0
        g = load_map(out)
        assert not g.nodes
        assert "1e-103" not in g.areas
        assert "elevator_2" in g.areas

    def test_output_reparses_and_plans(self, campus_path, tmp_path):
        out = tmp_path / "v1.osm"
        main(["variant", "--map", str(campus_path), "--out", str(out), "--kind", "v1"])
        assert main(["plan", "--map", str(out), "--from", "1e-101", "--to", "1e-107"]) == 0


class TestGeneration:
    def test_gen_topo_440_lines(self, tmp_path, capsys):
        out = tmp_path / "ds1.jsonl"
        code = main(
            ["gen-topo", "--template", "a", "--maps", "4", "--seed", "7", "--out", str(out)]
        )
        assert code == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 440
        assert (tmp_path / "ds1.meta.jsonl").exists()

    def test_gen_determinism_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            main(["gen-topo", "--template", "b", "--maps", "1", "--seed", "3", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_gen_hier(self, tmp_path):
        out = tmp_path / "h.jsonl"
        code = main(
            [
                "gen-hier", "--count", "6", "--pool-template", "a,b",
                "--pool-maps", "2", "--seed", "5", "--out", str(out),
            ]
        )
        assert code == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 6

    def test_gen_general(self, tmp_path):
        out = tmp_path / "g.jsonl"
        assert main(["gen-general", "--out", str(out)]) == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 20

    def test_missing_seed_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["gen-topo", "--template", "a", "--maps", "1", "--out", str(tmp_path / "x.jsonl")])
        assert err.value.code == 2

    def test_usage_error_does_not_touch_output(self, tmp_path):
        out = tmp_path / "precious.jsonl"
        out.write_text("keep me\n", encoding="utf-8")
        with pytest.raises(SystemExit):
            main(["gen-topo", "--out", str(out)])  # no --seed, parse fails first
        assert out.read_text(encoding="utf-8") == "keep me\n"


class TestPromptCommand:
    def test_path_prompt_printed(self, campus_path, capsys):
        code = main(
            [
                "prompt", "--map", str(campus_path), "--task", "path",
                "--from", "1e-101", "--to", "1e-107", "--level", "3",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "osmAG" in out
        assert "1e-101" in out and "1e-107" in out
        assert out.count("_directly_connected_room") > 2

    def test_hierarchy_prompt_needs_person(self, campus_path):
        assert main(["prompt", "--map", str(campus_path), "--task", "hierarchy"]) == 3


class TestEvalAndGrade:
    @pytest.fixture()
    def dataset(self, tmp_path):
        out = tmp_path / "ds.jsonl"
        main(["gen-topo", "--template", "a", "--maps", "1", "--seed", "13", "--out", str(out)])
        return out

    def test_eval_oracle_writes_reports(self, dataset, tmp_path, capsys):
        prefix = tmp_path / "rep" / "oracle"
        code = main(
            [
                "eval", "--dataset", str(dataset), "--backend", "mock-oracle",
                "--report", str(prefix), "--transcript-out", str(tmp_path / "t.jsonl"),
            ]
        )
        assert code == 0
        assert "success_rate=1.0000" in capsys.readouterr().out
        summary = json.loads((tmp_path / "rep" / "oracle.summary.json").read_text())
        assert summary["success_rate"] == 1.0
        assert (tmp_path / "rep" / "oracle.png").exists()
        assert (tmp_path / "rep" / "oracle.items.jsonl").exists()

    def test_grade_reproduces_eval_report(self, dataset, tmp_path):
        prefix1 = tmp_path / "one"
        transcript = tmp_path / "t.jsonl"
        main(
            [
                "eval", "--dataset", str(dataset), "--backend", "mock-corruptor",
                "--p", "0.4", "--seed", "2",
                "--report", str(prefix1), "--transcript-out", str(transcript),
            ]
        )
        prefix2 = tmp_path / "two"
        assert (
            main(
                [
                    "grade", "--dataset", str(dataset),
                    "--transcript", str(transcript), "--report", str(prefix2),
                ]
            )
            == 0
        )
        for suffix in (".items.jsonl", ".summary.json", ".png"):
            a = (tmp_path / ("one" + suffix)).read_bytes()
            b = (tmp_path / ("two" + suffix)).read_bytes()
            assert a == b

    def test_eval_deterministic_across_runs(self, dataset, tmp_path):
        for prefix in ("r1", "r2"):
            main(
                [
                    "eval", "--dataset", str(dataset), "--backend", "mock-oracle",
                    "--report", str(tmp_path / prefix),
                ]
            )
        for suffix in (".items.jsonl", ".summary.json", ".png"):
            assert (tmp_path / ("r1" + suffix)).read_bytes() == (
                tmp_path / ("r2" + suffix)
            ).read_bytes()

    def test_remote_without_key_exits_4(self, dataset, tmp_path, monkeypatch):
        monkeypatch.delenv("OSMAG_BENCH_API_KEY", raising=False)
        code = main(
            [
                "eval", "--dataset", str(dataset), "--backend", "remote",
                "--model", "m", "--report", str(tmp_path / "r"),
            ]
        )
        assert code == 4

    def test_replay_missing_transcript_flag_exits_3(self, dataset, tmp_path):
        code = main(
            [
                "eval", "--dataset", str(dataset), "--backend", "replay",
                "--report", str(tmp_path / "r"),
            ]
        )
        assert code == 3

    def test_config_file_supplies_endpoint_defaults(self, dataset, tmp_path, monkeypatch):
        monkeypatch.delenv("OSMAG_BENCH_API_KEY", raising=False)
        config = tmp_path / "conf.json"
        config.write_text(
            json.dumps(
                {
                    "base_url": "https://example.invalid/v1",
                    "model": "from-config",
                    "retry": {"max_attempts": 2, "base_delay": 0.01},
                }
            ),
            encoding="utf-8",
        )
        code = main(
            [
                "eval", "--dataset", str(dataset), "--backend", "remote",
                "--config", str(config), "--report", str(tmp_path / "r"),
            ]
        )
        assert code == 4  # config parsed; key still missing

    def test_unknown_backend_usage_error(self, dataset, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(
                [
                    "eval", "--dataset", str(dataset), "--backend", "quantum",
                    "--report", str(tmp_path / "r"),
                ]
            )
        assert err.value.code == 2
