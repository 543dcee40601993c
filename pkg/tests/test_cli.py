"""
Unit tests for the command-line entry point.

Tests cover:
- Exit status 0 with reports on stdout or in a file
- Command-line overrides of the job document
- Exit status 2 for unreadable, malformed or mismatched documents
- Exit status 1 passed through from a failed job
"""

import json
import logging
from unittest.mock import patch

import pytest

from config.logging_config import LOG_FORMAT
from src.cli import apply_overrides, build_parser, main
from src.job_config import ConfigError
from src.jobs import JobResult


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    # Log files land under the working directory
    monkeypatch.chdir(tmp_path)
    yield tmp_path
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.formatter is not None and handler.formatter._fmt == LOG_FORMAT:
            root.removeHandler(handler)
            handler.close()


def write_config(directory, document, name="job.json"):
    path = directory / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


class TestMain:
    """Tests for main."""

    def test_report_on_stdout(self, workdir, capsys):
        """Test exit 0 with the report on stdout when no path is given."""
        config = write_config(workdir, {"command": "pair-odd"})
        assert main(["pair-odd", "--config", config]) == 0
        out = capsys.readouterr().out
        assert out.startswith("# command: pair-odd")
        assert out.rstrip().endswith("# result: pass")

    def test_report_file(self, workdir, capsys):
        """Test that --out writes the report instead of printing it."""
        config = write_config(workdir, {"command": "summability", "parameters": {"W": 4.0}})
        target = workdir / "reports" / "summability.dsv"
        assert main(["summability", "--config", config, "--out", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert "# summary.verdict: summable" in target.read_text(encoding="utf-8")

    def test_format_and_seed_overrides(self, workdir):
        """Test that --format and --seed override the document."""
        config = write_config(workdir, {"command": "k0", "parameters": {"depth": 2}, "seed": 1})
        target = workdir / "k0.json"
        assert main(["k0", "--config", config, "--out", str(target), "--format", "doc", "--seed", "7"]) == 0
        document = json.loads(target.read_text(encoding="utf-8"))
        assert document["seed"] == 7

    def test_command_from_argument(self, workdir, capsys):
        """Test that a document without a command takes the one on the command line."""
        config = write_config(workdir, {"parameters": {"level": 1}})
        assert main(["gm-demo", "--config", config]) == 0
        assert capsys.readouterr().out.startswith("# command: gm-demo")

    def test_mismatched_command(self, workdir, capsys):
        """Test exit 2 when the document names another command."""
        config = write_config(workdir, {"command": "k0"})
        assert main(["pair-odd", "--config", config]) == 2
        err = capsys.readouterr().err
        assert '"config_error"' in err
        assert "document is a 'k0' job, not 'pair-odd'" in err

    def test_invalid_parameters(self, workdir, capsys):
        """Test exit 2 for parameters out of range."""
        config = write_config(workdir, {"command": "gm-demo", "parameters": {"level": 0}})
        assert main(["gm-demo", "--config", config]) == 2
        assert "parameters.level" in capsys.readouterr().err

    def test_malformed_document(self, workdir, capsys):
        """Test exit 2 for unparsable JSON."""
        path = workdir / "broken.json"
        path.write_text('{"command": ', encoding="utf-8")
        assert main(["k0", "--config", str(path)]) == 2
        assert "malformed document" in capsys.readouterr().err

    def test_missing_file(self, workdir, capsys):
        """Test exit 2 for a config path that does not exist."""
        assert main(["k0", "--config", str(workdir / "absent.json")]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_failed_job_status(self, workdir, capsys):
        """Test that a failed job returns 1 and prints its diagnostic."""
        config = write_config(workdir, {"command": "k0"})
        failed = JobResult(status=1, content="# result: fail\n", diagnostic={"error": "invariant_violation"})
        with patch("src.cli.execute", return_value=failed):
            assert main(["k0", "--config", config]) == 1
        captured = capsys.readouterr()
        assert captured.out == "# result: fail\n"
        assert '"invariant_violation"' in captured.err

    def test_unknown_command(self, workdir):
        """Test that argparse rejects commands outside the list."""
        with pytest.raises(SystemExit) as info:
            main(["integrate", "--config", "job.json"])
        assert info.value.code == 2


class TestApplyOverrides:
    """Tests for apply_overrides."""

    def test_tolerance_and_output(self):
        """Test that options are merged into a copy of the document."""
        document = {"command": "trace", "output": {"path": "a.dsv"}}
        args = build_parser().parse_args(["trace", "--config", "x", "--tolerance", "1e-6", "--format", "doc"])
        merged = apply_overrides(document, args)
        assert merged["tolerance"] == 1e-6
        assert merged["output"] == {"path": "a.dsv", "format": "doc"}
        assert document == {"command": "trace", "output": {"path": "a.dsv"}}

    def test_mismatch_raises(self):
        """Test that a different command raises ConfigError."""
        args = build_parser().parse_args(["trace", "--config", "x"])
        with pytest.raises(ConfigError):
            apply_overrides({"command": "crossed"}, args)
