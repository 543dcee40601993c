"""
Unit tests for job document validation.

Tests cover:
- Defaults of a minimal document
- Range and consistency checks of command parameters
- Collection of every violation in one ConfigError
- Malformed JSON and unknown keys
- The canonical config hash
"""

import json

import pytest
from pydantic import ValidationError

from config.settings import settings
from src.job_config import (
    ConfigError,
    JobCommand,
    OutputFormat,
    PairOddParams,
    config_hash,
    parse_config,
)
from src.models import ChoiceRule


def violations_of(document):
    with pytest.raises(ConfigError) as info:
        parse_config(document)
    return info.value.violations


class TestParseConfig:
    """Tests for parse_config on valid documents."""

    def test_minimal_pair_odd(self):
        """Test that a bare command gets default parameters and run settings."""
        cfg = parse_config({"command": "pair-odd"})
        assert cfg.command == JobCommand.PAIR_ODD
        assert isinstance(cfg.parameters, PairOddParams)
        assert cfg.parameters.powers == [1]
        assert cfg.parameters.resolved_window == 3
        assert cfg.output.format == OutputFormat.DSV
        assert cfg.output.path is None
        assert cfg.tolerance == settings.MATRIX_TOLERANCE
        assert cfg.seed == settings.DEFAULT_SEED

    def test_json_text(self):
        """Test that JSON text and the decoded object give the same config."""
        document = {"command": "summability", "parameters": {"W": 3.0, "p": 1.0}, "seed": 4}
        assert parse_config(json.dumps(document)) == parse_config(document)

    def test_alias_for_word_set(self):
        """Test that the word set is given under the key N."""
        cfg = parse_config({"command": "pair-odd", "parameters": {"N": ["0", "1"], "powers": [2]}})
        assert cfg.parameters.words == ["0", "1"]
        assert cfg.parameters.resolved_window == 4

    def test_overrides(self):
        """Test that tolerance and seed in the document win over the settings."""
        cfg = parse_config({"command": "k0", "tolerance": 1e-6, "seed": 9})
        assert cfg.tolerance == 1e-6
        assert cfg.seed == 9

    def test_sample_rule_defaults(self):
        """Test constant-tail sampling on a full shift and admissible elsewhere."""
        full = parse_config({"command": "pair-even", "parameters": {"samples": 5}})
        golden = parse_config({"command": "pair-even", "parameters": {"space": {"kind": "golden-mean"}, "samples": 5}})
        assert full.parameters.resolved_sample_rule == ChoiceRule.CONSTANT_TAIL
        assert golden.parameters.resolved_sample_rule == ChoiceRule.ADMISSIBLE

    def test_frozen(self):
        """Test that a parsed config cannot be modified."""
        cfg = parse_config({"command": "gm-demo"})
        with pytest.raises(ValidationError):
            cfg.seed = 3


class TestViolations:
    """Tests for parse_config on invalid documents."""

    def test_alphabet_size_one(self):
        """Test that an alphabet of one symbol is rejected."""
        violations = violations_of({"command": "space", "parameters": {"space": {"alphabet": ["0"]}}})
        assert len(violations) == 1
        assert "size must be >= 2" in violations[0]
        assert violations[0].startswith("parameters.space")

    def test_gm_demo_level_zero(self):
        """Test that w_0 is rejected."""
        violations = violations_of({"command": "gm-demo", "parameters": {"level": 0}})
        assert violations[0].startswith("parameters.level")

    def test_marker_sampling_rejected(self):
        """Test that sampled pairs cannot use the marker rule."""
        violations = violations_of({"command": "pair-even", "parameters": {"samples": 5, "sample_rule": "marker"}})
        assert violations[0].startswith("parameters.sample_rule")

    def test_constant_tail_sampling_needs_full_shift(self):
        """Test that constant-tail sampling on the golden-mean shift is rejected."""
        violations = violations_of({
            "command": "pair-even",
            "parameters": {"space": {"kind": "golden-mean"}, "samples": 5, "sample_rule": "constant-tail"},
        })
        assert any("constant-tail sampling needs a full shift" in v for v in violations)

    def test_all_violations_collected(self):
        """Test that envelope and parameter violations are reported together."""
        violations = violations_of({
            "command": "summability",
            "parameters": {"W": 0.5, "p": -1.0},
            "tolerance": 2.0,
        })
        assert len(violations) == 3
        assert any(v.startswith("tolerance") for v in violations)
        assert any(v.startswith("parameters.W") for v in violations)
        assert any(v.startswith("parameters.p") for v in violations)

    def test_malformed_json(self):
        """Test that unparsable text is a config error."""
        violations = violations_of('{"command": "k0",')
        assert violations[0].startswith("malformed document")

    def test_not_an_object(self):
        """Test that a JSON array is rejected."""
        assert violations_of("[1, 2]") == ["document must be a JSON object"]

    def test_unknown_envelope_key(self):
        """Test that unknown top-level keys are rejected."""
        violations = violations_of({"command": "k0", "verbose": True})
        assert violations[0].startswith("verbose")

    def test_unknown_parameter(self):
        """Test that unknown parameter keys are rejected."""
        violations = violations_of({"command": "gm-demo", "parameters": {"level": 1, "depth": 3}})
        assert violations[0].startswith("parameters.depth")

    def test_unknown_command(self):
        """Test that an unknown command is reported once."""
        violations = violations_of({"command": "integrate", "parameters": {"x": 1}})
        assert len(violations) == 1
        assert violations[0].startswith("command")

    def test_even_order_for_odd_pairing(self):
        """Test that the odd trace formula needs an odd order."""
        violations = violations_of({"command": "pair-odd", "parameters": {"order": 2}})
        assert "odd trace order must be odd" in violations[0]

    def test_window_below_bandwidth(self):
        """Test that the window must exceed the largest power."""
        violations = violations_of({"command": "pair-odd", "parameters": {"powers": [3], "window": 3}})
        assert "must exceed the largest power" in violations[0]

    def test_truncation_below_words(self):
        """Test that the rank route cannot truncate below the words."""
        violations = violations_of({"command": "pair-even", "parameters": {"words": ["010"], "truncation": 2}})
        assert "below the word level" in violations[0]

    def test_two_growth_sources(self):
        """Test that summability takes one growth source."""
        violations = violations_of({"command": "summability", "parameters": {"alphabet_size": 2, "counts": [1, 2]}})
        assert "either alphabet_size or counts" in violations[0]

    def test_message_joins_violations(self):
        """Test that the exception text lists every violation."""
        error = ConfigError(["a: bad", "b: worse"])
        assert str(error) == "a: bad; b: worse"


class TestConfigHash:
    """Tests for config_hash."""

    def test_key_order_irrelevant(self):
        """Test that the hash ignores key order."""
        assert config_hash({"command": "k0", "seed": 1}) == config_hash({"seed": 1, "command": "k0"})

    def test_value_changes_hash(self):
        """Test that changing a value changes the hash."""
        assert config_hash({"command": "k0", "seed": 1}) != config_hash({"command": "k0", "seed": 2})

    def test_parsed_config_carries_hash(self):
        """Test that the parsed config stores the document hash."""
        document = {"command": "dynamics", "parameters": {"depth": 4}}
        cfg = parse_config(document)
        assert cfg.config_hash == config_hash(document)
        assert len(cfg.config_hash) == 64
