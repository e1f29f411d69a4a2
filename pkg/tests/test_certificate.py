"""
Tests for certificate files and their re-verification.
"""

import json
import pytest
import sys
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from euclidprefs.certificate import (
    certificate_to_dict,
    load_certificate,
    save_certificate,
    verify_certificate,
)
from euclidprefs.embedder import rescale_to_margin
from euclidprefs.errors import CorruptCertificate
from euclidprefs.fixtures import closure_example, closure_with_dummy, pattern38, synthetic_election
from euclidprefs.lanes import EUCLIDEAN, NOT_EUCLIDEAN, UNKNOWN
from euclidprefs.portfolio import Verdict, run_portfolio


def _pattern_verdict():
    return run_portfolio(pattern38(), lanes=["pattern38"], budget=10)


def test_saved_certificate_verifies(tmp_path):
    e = pattern38()
    path = tmp_path / "pattern38.json"
    save_certificate(_pattern_verdict(), path)
    data = load_certificate(path)
    assert data["tool"] == "euclidprefs"
    assert data["status"] == NOT_EUCLIDEAN
    assert data["election_digest"] == e.digest()
    result = verify_certificate(e, data)
    assert result.accepted
    assert result.reasons == []


def test_missing_witness_rejected():
    e = pattern38()
    data = certificate_to_dict(_pattern_verdict())
    del data["payload"]["witnesses"]["123"]
    result = verify_certificate(e, data)
    assert not result
    assert any("123" in r for r in result.reasons)


def _embedding_verdict(seed=5):
    e, emb = synthetic_election(5, 4, seed=seed)
    emb = rescale_to_margin(e, emb, 1.0)
    verdict = Verdict(
        EUCLIDEAN, "embedding", {"embedding": emb.to_dict()},
        lane="embed", reduced=e, election_digest=e.digest(),
    )
    return e, emb, verdict


def test_embedding_certificate():
    e, _, verdict = _embedding_verdict()
    assert verify_certificate(e, verdict)


def test_moved_candidate_rejected():
    e, emb, verdict = _embedding_verdict()
    top = e.name(e.votes[0].ranking[0])
    data = certificate_to_dict(verdict)
    data["payload"]["embedding"]["candidates"][top] = [1e6, 1e6]
    result = verify_certificate(e, data)
    assert not result
    assert result.reasons


def test_embedding_missing_a_candidate_rejected():
    e, emb, verdict = _embedding_verdict()
    data = certificate_to_dict(verdict)
    del data["payload"]["embedding"]["candidates"][e.candidates[0]]
    assert not verify_certificate(e, data)


def test_false_trivial_rule_rejected():
    e = pattern38()
    verdict = Verdict(EUCLIDEAN, "trivial", {"rule": "|C| <= 3"}, lane="screen", reduced=e, election_digest=e.digest())
    result = verify_certificate(e, verdict)
    assert not result
    assert "does not hold" in result.reasons[0]

    verdict.payload = {"rule": "|C| <= 40"}
    assert not verify_certificate(e, verdict)


def test_status_must_match_kind():
    e = pattern38()
    data = certificate_to_dict(_pattern_verdict())
    data["status"] = EUCLIDEAN
    assert not verify_certificate(e, data)


def test_unknown_verdict_rejected():
    e = pattern38()
    verdict = Verdict(UNKNOWN, reduced=e, election_digest=e.digest())
    assert not verify_certificate(e, verdict)


def test_structurally_broken_certificates():
    e = pattern38()
    data = certificate_to_dict(_pattern_verdict())
    with pytest.raises(CorruptCertificate):
        verify_certificate(e, {k: v for k, v in data.items() if k != "payload"})
    with pytest.raises(CorruptCertificate):
        verify_certificate(e, dict(data, kind="astrology"))
    with pytest.raises(CorruptCertificate):
        verify_certificate(e, dict(data, payload={}))


def test_tampered_trace_rejected():
    e = closure_with_dummy()
    verdict = run_portfolio(e, lanes=["closure"], budget=30)
    data = certificate_to_dict(verdict)
    assert verify_certificate(e, data)
    data["trace"][0]["removed"] = ["a"]
    data["trace"][0]["copy_map"] = {"a": "b"}
    result = verify_certificate(e, data)
    assert not result
    assert result.reasons[0].startswith("reduction trace")


def test_certificate_for_other_election_rejected():
    data = certificate_to_dict(run_portfolio(closure_example(), lanes=["closure"], budget=30))
    result = verify_certificate(closure_with_dummy(), data)
    assert not result
    assert "different election" in result.reasons[0]


def test_load_rejects_non_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("not json at all", encoding="utf-8")
    with pytest.raises(CorruptCertificate):
        load_certificate(path)
    path.write_text(json.dumps([1, 2, 3]), encoding="utf-8")
    with pytest.raises(CorruptCertificate):
        load_certificate(path)


if __name__ == "__main__":
    # Run tests
    pytest.main([__file__, "-v"])
