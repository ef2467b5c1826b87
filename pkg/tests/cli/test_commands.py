import csv
import io
import json

import pytest

from src.cli import commands
from src.cli.commands import EXIT_INPUT, EXIT_OK, EXIT_USAGE, parse_assigner
from src.cli.main import build_config, build_parser, main
from src.utils.errors import UsageError


def run(argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(path.read_text())


# Test assigner parsing
def test_parse_assigner():
    spec = parse_assigner("fixed:IoU:preset=rpn")
    assert (spec.kind, spec.measure.value, spec.tau_pos) == ("fixed", "iou", 0.7)
    assert parse_assigner("atss:maiou:k=5").k == 5


@pytest.mark.parametrize("text", ["atss", "paa:iou", "atss:iou:depth=3", "fixed:iou:tau_neg=0.9:tau_pos=0.5"])
def test_parse_assigner_rejects(text):
    with pytest.raises(UsageError):
        parse_assigner(text)


# Test the assign command
def test_assign_writes_outputs(tmp_path, mini_instances_path, capsys):
    out = tmp_path / "out"
    code = run(["assign", "--dataset", mini_instances_path, "--out", out,
                "--assigner", "atss:maiou", "--assigner", "fixed:iou:preset=yolact"])
    assert code == EXIT_OK
    report = read_json(out / "assign.json")
    assert report["schema_version"] == 1
    assert report["scenes"] == 3 and report["gts"] == 7
    assert [a["name"] for a in report["assigners"]] == ["atss-maiou-k9", "fixed-iou-0.40-0.50"]
    totals = report["assigners"][0]["totals"]
    assert totals["positive"] + totals["negative"] + totals["ignore"] == totals["anchors"]
    assert read_json(out / "run_config.json")["workers"] == 1
    assert "atss-maiou-k9" in capsys.readouterr().out


def test_assign_is_independent_of_workers(tmp_path, mini_instances_path):
    for workers in (1, 4):
        assert run(["assign", "--dataset", mini_instances_path, "--out", tmp_path / str(workers),
                    "--workers", workers]) == EXIT_OK
    assert (tmp_path / "1" / "assign.json").read_bytes() == (tmp_path / "4" / "assign.json").read_bytes()


def test_missing_dataset_writes_nothing(tmp_path, capsys):
    out = tmp_path / "out"
    code = run(["assign", "--dataset", tmp_path / "missing.json", "--out", out])
    assert code == EXIT_INPUT
    assert not out.exists()
    assert "missing.json" in capsys.readouterr().err


def test_assign_without_dataset_is_usage_error(tmp_path):
    assert run(["assign", "--out", tmp_path / "out"]) == EXIT_USAGE


def test_unknown_measure_lists_valid_names(tmp_path, mini_instances_path, capsys):
    code = run(["assign", "--dataset", mini_instances_path, "--out", tmp_path, "--assigner", "atss:ciou"])
    assert code == EXIT_USAGE
    assert "iou, giou, diou, maiou" in capsys.readouterr().err


# Test the stats command
def test_stats_golden_histogram(tmp_path, mini_instances_path):
    out = tmp_path / "out"
    assert run(["stats", "--dataset", mini_instances_path, "--out", out]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO((out / "mob_histogram.csv").open(newline="").read())))
    assert len(rows) == 20
    assert sum(int(r["count"]) for r in rows) == 7
    assert int(rows[19]["count"]) == 2
    stats = read_json(out / "stats.json")
    assert stats["mob"]["below_half"] == 2
    assert (out / "joint_histogram.csv").exists()


def test_stats_bins_flag(tmp_path, mini_instances_path):
    out = tmp_path / "out"
    assert run(["stats", "--dataset", mini_instances_path, "--out", out, "--bins", 2, "--skip-joint"]) == EXIT_OK
    stats = read_json(out / "stats.json")
    assert stats["mob"]["counts"] == [2, 5]
    assert "joint" not in stats
    assert not (out / "joint_histogram.csv").exists()


def test_stats_with_nothing_to_do(tmp_path, mini_instances_path):
    code = run(["stats", "--dataset", mini_instances_path, "--out", tmp_path / "out", "--skip-mob", "--skip-joint"])
    assert code == EXIT_USAGE


def test_stats_rejects_zero_bins(tmp_path, mini_instances_path):
    assert run(["stats", "--dataset", mini_instances_path, "--out", tmp_path, "--bins", 0]) == EXIT_USAGE


# Test the bench command
def test_bench_small_case(tmp_path):
    out = tmp_path / "out"
    code = run(["bench", "--grid", 8, "--anchors", 1, "--gts", 1, "--repetitions", 1, "--out", out])
    assert code == EXIT_OK
    (result,) = read_json(out / "bench.json")["results"]
    assert result["identical"]
    assert result["low_confidence"]


def test_bench_flags_broadcast(tmp_path):
    args = build_parser().parse_args(["bench", "--grid", "8", "--grid", "16", "--gts", "2"])
    cfg = build_config(args)
    assert cfg.bench.grids == [8, 16]
    assert cfg.bench.gts == [2, 2]
    assert cfg.bench.anchors == [5, 8]


# Test the compare command
def test_compare_needs_two_assigners(tmp_path, mini_instances_path):
    assert run(["compare", "--dataset", mini_instances_path, "--out", tmp_path]) == EXIT_USAGE


def test_compare_writes_transitions(tmp_path, mini_instances_path):
    out = tmp_path / "out"
    code = run(["compare", "--dataset", mini_instances_path, "--out", out,
                "--assigner", "fixed:iou", "--assigner", "atss:maiou"])
    assert code == EXIT_OK
    report = read_json(out / "compare.json")
    (diff,) = report["diffs"]
    assert (diff["a"], diff["b"]) == ("fixed-iou-0.40-0.50", "atss-maiou-k9")
    assert sum(diff["transitions"].values()) == report["assigners"][0]["anchors"]


# Test config handling
def test_config_file_and_flags(tmp_path, mini_instances_path):
    config = tmp_path / "run.toml"
    config.write_text(
        f'dataset = "{mini_instances_path.as_posix()}"\n'
        '[analysis]\nbins = 4\njoint = false\n'
    )
    out = tmp_path / "out"
    assert run(["stats", "--config", config, "--out", out, "--bins", 5]) == EXIT_OK
    assert len(read_json(out / "stats.json")["mob"]["counts"]) == 5
    assert read_json(out / "run_config.json")["analysis"]["bins"] == 5


def test_validate_config(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"workers": 2}))
    assert run(["validate-config", good]) == EXIT_OK
    assert "Configuration is valid" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"workers": 0}))
    assert run(["validate-config", bad]) == EXIT_USAGE
    assert run(["validate-config", tmp_path / "none.json"]) == EXIT_INPUT


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_USAGE
    assert "assign" in capsys.readouterr().out


def test_bad_flag_exits_with_usage_code():
    with pytest.raises(SystemExit) as exc:
        main(["assign", "--workers", "many"])
    assert exc.value.code == 2


def test_write_failure_is_an_io_error(tmp_path, mini_instances_path, mocker, capsys):
    mocker.patch("src.cli.commands.write_outputs", side_effect=OSError("disk full"))
    code = run(["assign", "--dataset", mini_instances_path, "--out", tmp_path / "out"])
    assert code == EXIT_INPUT
    assert "disk full" in capsys.readouterr().err


def test_bench_uses_configured_cases(tmp_path, mocker):
    spy = mocker.spy(commands, "bench_maiou")
    code = run(["bench", "--grid", 8, "--grid", 16, "--anchors", 2, "--gts", 1,
                "--repetitions", 1, "--seed", 4, "--out", tmp_path])
    assert code == EXIT_OK
    spy.assert_called_once_with([8, 16], [2, 2], [1, 1], repetitions=1, seed=4)
