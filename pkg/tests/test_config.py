"""
Tests for settings: defaults, YAML files and key=value overrides.
"""

import pytest
import sys
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from euclidprefs.config import ALL_LANES, Settings, load_settings, parse_override, settings_summary
from euclidprefs.errors import ConfigError


SAMPLE_CONFIG = """
ilp:
  solver: highs
  max_iterations: 5
qcp:
  eps_star: 2
portfolio:
  lanes: [pattern38, embed]
seed: 7
"""


def test_defaults():
    s = load_settings()
    assert s == Settings()
    assert s.ilp.max_iterations == 20
    assert s.qcp.eps_star == 1.0
    assert s.hull.max_subset_size == 6
    assert s.portfolio.lanes == list(ALL_LANES)


def test_yaml_file(tmp_path):
    path = tmp_path / "search.yaml"
    path.write_text(SAMPLE_CONFIG, encoding="utf-8")
    s = load_settings(path)
    assert s.ilp.solver == "highs"
    assert s.ilp.max_iterations == 5
    assert s.qcp.eps_star == 2.0 and isinstance(s.qcp.eps_star, float)
    assert s.portfolio.lanes == ["pattern38", "embed"]
    assert s.seed == 7


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "search.yaml"
    path.write_text(SAMPLE_CONFIG, encoding="utf-8")
    s = load_settings(path, ["ilp.solver=builtin", "portfolio.lanes=closure,hull", "qcp.full_pairs=true"])
    assert s.ilp.solver == "builtin"
    assert s.portfolio.lanes == ["closure", "hull"]
    assert s.qcp.full_pairs is True


def test_parse_override():
    assert parse_override("qcp.restarts=50") == ("qcp.restarts", 50)
    assert parse_override("ilp.solver = external:highs") == ("ilp.solver", "external:highs")
    with pytest.raises(ConfigError):
        parse_override("no-equals-sign")
    with pytest.raises(ConfigError):
        parse_override("=3")


@pytest.mark.parametrize("override", [
    "bogus=1",
    "ilp.bogus=1",
    "nowhere.solver=highs",
    "ilp.max_iterations=many",
    "ilp.enable_six_cycles=1",
    "portfolio.lanes=pattern38,oracle",
    "portfolio.budget=-1",
    "qcp.eps_star=0",
    "hull.max_subset_size=3",
])
def test_bad_overrides(override):
    with pytest.raises(ConfigError):
        load_settings(overrides=[override])


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "missing.yaml")
    path = tmp_path / "list.yaml"
    path.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(path)


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        load_settings(overrides=["seed=x"])


def test_settings_summary():
    flat = settings_summary(load_settings(overrides=["seed=3"]))
    assert flat["seed"] == 3
    assert flat["ilp.solver"] == "builtin"
    assert flat["qcp.restarts"] == 200


if __name__ == "__main__":
    # Run tests
    pytest.main([__file__, "-v"])
