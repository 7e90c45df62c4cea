import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from src import __version__
from src.checks import CHECKS, get_check_names
from src.main import build_parser, main, run_family
from src.schema import CSV_COLUMNS

ROOT = Path(__file__).resolve().parent.parent


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "src.main", *args],
        cwd=ROOT,
        capture_output=True,
        text=True,
    )


def test_help_lists_every_family():
    result = run_cli("--help")
    assert result.returncode == 0
    for name in get_check_names() + ["all"]:
        assert name in result.stdout


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_parser_accepts_common_flags():
    args = build_parser().parse_args(["scaling", "--grid", "16", "--lambda", "0.5,1,2", "--p", "3", "--quick"])
    assert args.command == "scaling"
    assert args.lambdas == "0.5,1,2"
    assert args.quick is True


def test_balance_run_writes_results(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["balance", "--quick", "--out", str(out)])
    printed = capsys.readouterr().out
    assert code == 0
    assert "Running balance..." in printed
    assert "  OK symmetric_case" in printed

    with open(out / "results.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS
    assert all(row[0] == "balance" for row in rows[1:])

    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["failed"] == 0
    assert summary["total"] == len(rows) - 1
    assert {"config", "bump", "r_schedule", "failures", "version"} <= set(summary)


def test_malformed_config_exits_with_two(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("# settings\ngrid 32\n", encoding="utf-8")
    result = run_cli("verify-group", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert result.returncode == 2
    assert result.stderr.startswith("Error:")
    assert f"{cfg}:2:" in result.stderr
    assert not (tmp_path / "out").exists()


def test_bad_flag_value_exits_with_two(tmp_path, capsys):
    assert main(["balance", "--grid", "four", "--out", str(tmp_path)]) == 2
    assert "Error:" in capsys.readouterr().err


def boom(cfg):
    raise RuntimeError("solver diverged")


def test_raising_family_becomes_failed_report(monkeypatch, quick_cfg):
    monkeypatch.setitem(CHECKS, "balance", boom)
    reports = run_family("balance", quick_cfg)
    assert len(reports) == 1
    assert not reports[0].passed
    assert reports[0].note == "RuntimeError: solver diverged"


def test_failing_family_exits_with_one(monkeypatch, tmp_path, capsys):
    monkeypatch.setitem(CHECKS, "balance", boom)
    assert main(["balance", "--quick", "--out", str(tmp_path)]) == 1
    assert "  FAIL run: RuntimeError: solver diverged" in capsys.readouterr().out
