from __future__ import annotations

import json

import pytest

from explan import fixture_path
from explan.bench import (
    BenchRecord,
    SuiteConfig,
    SuiteEntry,
    emit_table,
    run_suite,
)
from explan.cli import cli_main


def _fx(name: str) -> str:
    return str(fixture_path(name))


@pytest.fixture(scope="module")
def small_records():
    return run_suite(SuiteConfig.from_json(_fx("suite-small.json")))


def test_suite_runs_every_method(small_records):
    assert len(small_records) == 5 * 5
    assert all(r.error is None for r in small_records)
    assert all(r.verified for r in small_records)


def test_minirover2_pp_record_values(small_records):
    record = next(r for r in small_records
                  if r.problem_id == "minirover2" and r.method == "oeg-pp")
    assert record.total_features == 2
    assert record.avg_part_size == 1.0
    assert record.distance == 0.0
    assert record.oracle_verified is True


def test_reshuffle_na_distance_positive(small_records):
    record = next(r for r in small_records
                  if r.problem_id == "reshuffle" and r.method == "oeg-na")
    assert record.distance > 0
    assert record.verified


def test_avg_part_size_bounds(small_records):
    for r in small_records:
        if r.num_parts:
            assert r.avg_part_size >= 1
            assert r.avg_part_size <= r.total_features
            # equality exactly when there is a single part
            if r.num_parts == 1:
                assert r.avg_part_size == r.total_features
            else:
                assert r.avg_part_size < r.total_features


def test_emit_empty_table_is_header_only():
    assert emit_table([]) == "problem,method,total_features,num_parts," \
                             "avg_part_size,distance,time_s,verified\n"


def test_emit_single_record_two_lines():
    record = BenchRecord(problem_id="p", method="mce", total_features=1,
                         num_parts=1, avg_part_size=1.0, distance=0.0,
                         time_s=0.5, verified=True)
    assert emit_table([record]).count("\n") == 2


def test_markdown_has_body_row_per_record(small_records):
    rows = [r for r in small_records if r.problem_id == "minirover"]
    text = emit_table(rows, format="markdown")
    assert text.count("\n") == 2 + len(rows)


def test_json_table_carries_oracle_column(small_records):
    doc = json.loads(emit_table(small_records, format="json"))
    assert {row["problem"] for row in doc} == \
        {"minirover", "minirover2", "tieworld", "reshuffle", "depot"}
    assert all("oracle_verified" in row for row in doc)


def test_suite_reproducible_modulo_time():
    config = SuiteConfig.from_json(_fx("suite-small.json"))

    def stripped():
        rows = emit_table(run_suite(config)).splitlines()
        return ["," .join(c for i, c in enumerate(row.split(",")) if i != 6)
                for row in rows]

    assert stripped() == stripped()


def test_entry_validation():
    with pytest.raises(ValueError):
        SuiteEntry(problem_id="x", domain=fixture_path("minirover-domain.pddl"),
                   problem=fixture_path("minirover-problem.pddl"))


def test_bad_method_rejected():
    with pytest.raises(ValueError):
        SuiteConfig(entries=(), methods=("warp",))


# -- command line ---------------------------------------------------------------


def test_cli_plan(capsys):
    code = cli_main(["plan", "--domain", _fx("minirover-domain.pddl"),
                     "--problem", _fx("minirover-problem.pddl")])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"actions": ["calibrate", "take-image", "communicate"], "cost": 3}


def test_cli_explain_mce(capsys):
    code = cli_main(["explain", "--method", "mce",
                     "--domain", _fx("minirover-domain.pddl"),
                     "--problem", _fx("minirover-problem.pddl"),
                     "--human-domain", _fx("minirover-human.pddl")])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["variant"] == "mce"
    assert doc["total_features"] == 1
    assert doc["verified"] is True


def test_cli_explain_rejects_extra_features(tmp_path, capsys):
    human = fixture_path("minirover-human.pddl").read_text().replace(
        ":effect (have-image)", ":effect (and (have-image) (communicated))")
    path = tmp_path / "human.pddl"
    path.write_text(human)
    code = cli_main(["explain", "--method", "oeg-pp",
                     "--domain", _fx("minirover-domain.pddl"),
                     "--problem", _fx("minirover-problem.pddl"),
                     "--human-domain", str(path)])
    assert code == 3


def test_cli_bench_missing_config_exits_two(capsys):
    assert cli_main(["bench", "--config", "/nonexistent/suite.json"]) == 2


def test_cli_diff_output(capsys):
    code = cli_main(["diff", "--domain", _fx("minirover2-domain.pddl"),
                     "--problem", _fx("minirover2-problem.pddl"),
                     "--remove-features", _fx("minirover2-removals.txt")])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["missing"] == ["drill-sample-has-precondition-warmed",
                              "take-image-has-precondition-calibrated"]
    assert doc["extra"] == []


def test_cli_trace_verify_round_trip(tmp_path, capsys):
    trace = tmp_path / "trace.json"
    code = cli_main(["explain", "--method", "oeg-pp",
                     "--domain", _fx("minirover2-domain.pddl"),
                     "--problem", _fx("minirover2-problem.pddl"),
                     "--remove-features", _fx("minirover2-removals.txt"),
                     "--out", str(trace)])
    assert code == 0
    code = cli_main(["verify", "--trace", str(trace),
                     "--domain", _fx("minirover2-domain.pddl"),
                     "--problem", _fx("minirover2-problem.pddl"),
                     "--remove-features", _fx("minirover2-removals.txt")])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["verified"] is True


def test_cli_plan_file_only_for_any_prefix(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"actions": ["walk"], "cost": 2}))
    code = cli_main(["explain", "--method", "oeg-pp",
                     "--domain", _fx("tieworld-domain.pddl"),
                     "--problem", _fx("tieworld-problem.pddl"),
                     "--human-domain", _fx("tieworld-human.pddl"),
                     "--plan-file", str(plan)])
    assert code == 2


def test_cli_plan_file_supplies_any_prefix_plan(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"actions": ["walk"], "cost": 2}))
    code = cli_main(["explain", "--method", "oeg-ap",
                     "--domain", _fx("tieworld-domain.pddl"),
                     "--problem", _fx("tieworld-problem.pddl"),
                     "--human-domain", _fx("tieworld-human.pddl"),
                     "--plan-file", str(plan)])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["parts"] == []
    assert doc["verified"] is True


def test_cli_bench_csv(tmp_path, capsys):
    out = tmp_path / "table.csv"
    code = cli_main(["bench", "--config", _fx("suite-small.json"),
                     "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("problem,method")
    assert len(lines) == 1 + 25
