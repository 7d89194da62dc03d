"""Tests for MedexcConfig and logging setup."""

from unittest.mock import patch

import pytest
from pydantic import ValidationError

import medexc.config
from medexc.config import MedexcConfig, setup_logging
from medexc.exceptions import ConfigurationError


def test_defaults():
    """Test the default numerical settings."""
    config = MedexcConfig()
    assert config.clip == 0.01
    assert config.threads == 1
    assert config.log_level == "WARNING"


def test_config_is_frozen():
    """Test that settings cannot be changed after creation."""
    config = MedexcConfig()
    with pytest.raises(ValidationError):
        config.clip = 0.1


def test_unknown_fields_are_rejected():
    """Test that misspelled settings fail loudly."""
    with pytest.raises(ValidationError):
        MedexcConfig(threds=2)


def test_clip_bounds():
    """Test that the clip must lie in (0, 0.5)."""
    with pytest.raises(ValidationError):
        MedexcConfig(clip=0.5)


def test_from_env():
    """Test environment variables and explicit overrides."""
    env = {"MEDEXC_THREADS": "4", "MEDEXC_LOG_LEVEL": "DEBUG"}
    with patch.dict("os.environ", env):
        config = MedexcConfig.from_env(threads=None, clip=0.05)
    assert config.threads == 4
    assert config.log_level == "DEBUG"
    assert config.clip == 0.05
    with patch.dict("os.environ", env):
        assert MedexcConfig.from_env(threads=2).threads == 2


def test_from_env_rejects_bad_threads():
    """Test that a non-integer thread count is a configuration error."""
    with (
        patch.dict("os.environ", {"MEDEXC_THREADS": "many"}),
        pytest.raises(ConfigurationError, match="MEDEXC_THREADS"),
    ):
        MedexcConfig.from_env()


def test_setup_logging_configures_once():
    """Test that logging is configured a single time per process."""
    with (
        patch.object(medexc.config, "_logging_configured", False),
        patch("logging.basicConfig") as basic,
    ):
        setup_logging("debug")
        setup_logging("INFO")
    basic.assert_called_once()
    assert basic.call_args.kwargs["level"] == "DEBUG"


def test_setup_logging_none_is_a_no_op():
    """Test that None leaves logging to the caller."""
    with (
        patch.object(medexc.config, "_logging_configured", False),
        patch("logging.basicConfig") as basic,
    ):
        setup_logging(None)
    basic.assert_not_called()
