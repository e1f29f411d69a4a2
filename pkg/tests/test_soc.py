"""
Tests for PrefLib .soc ingestion and export.
"""

import pytest
import sys
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from euclidprefs.election import Election
from euclidprefs.errors import Malformed, SocFormatError, TieOrIncomplete
from euclidprefs.soc import dump_soc, load_soc, parse_soc, save_soc


SAMPLE_SOC = """# FILE NAME: 00004-00000001.soc
# TITLE: Sample
# DATA TYPE: soc
# NUMBER ALTERNATIVES: 3
# NUMBER VOTERS: 5
# NUMBER UNIQUE ORDERS: 2
# ALTERNATIVE NAME 1: Alice
# ALTERNATIVE NAME 2: Bob
# ALTERNATIVE NAME 3: Carol
3: 1,2,3
2: 3,1,2
"""


def test_parse_sample():
    e = parse_soc(SAMPLE_SOC)
    assert e.candidates == ("Alice", "Bob", "Carol")
    assert e.counts == (3, 2)
    assert e.votes[1].ranking == (2, 0, 1)
    assert e.total_voters == 5


def test_repeated_orders_are_merged():
    e = parse_soc("# NUMBER ALTERNATIVES: 2\n1: 1,2\n4: 2,1\n2: 1,2\n")
    assert e.n == 2
    assert e.counts == (3, 4)


def test_missing_names_default_to_ids():
    e = parse_soc("1: 2,1\n")
    assert e.candidates == ("1", "2")


def test_ties_rejected_with_line_number():
    text = "# NUMBER ALTERNATIVES: 3\n1: 1,2,3\n1: 1,{2,3}\n"
    with pytest.raises(TieOrIncomplete) as exc:
        parse_soc(text)
    assert exc.value.line == 3
    assert "line 3" in str(exc.value)


def test_incomplete_and_repeated_rankings_rejected():
    with pytest.raises(TieOrIncomplete):
        parse_soc("# NUMBER ALTERNATIVES: 3\n1: 1,2\n")
    with pytest.raises(TieOrIncomplete):
        parse_soc("# NUMBER ALTERNATIVES: 3\n1: 1,1,2\n")


def test_malformed_lines():
    with pytest.raises(Malformed):
        parse_soc("# NUMBER ALTERNATIVES: 2\nhello world\n")
    with pytest.raises(Malformed):
        parse_soc("")
    # one type for callers that only care that input was bad
    with pytest.raises(ValueError):
        parse_soc("1 - 1,2\n")
    assert issubclass(Malformed, SocFormatError)


def test_dump_reads_back(tmp_path):
    e = Election.from_rankings(["x", "y", "z w"], [["x", "y", "z w"], ["z w", "y", "x"], ["z w", "y", "x"]])
    path = tmp_path / "e.soc"
    save_soc(e, path, title="round trip")
    assert "# TITLE: round trip" in path.read_text(encoding="utf-8")
    assert load_soc(path) == e
    assert parse_soc(dump_soc(e)) == e


if __name__ == "__main__":
    # Run tests
    pytest.main([__file__, "-v"])
