"""
Certificate files and their independent re-verification.

A certificate is a JSON object:

    {
      "tool": "euclidprefs", "version": "0.1.0",
      "status": "NotEuclidean", "kind": "pattern38", "lane": "pattern38",
      "election_digest": "...", "reduced_digest": "...",
      "trace": [...], "payload": {...}, "timings": {...}
    }

verify_certificate replays the trace with every rule precondition checked,
then hands the payload to the checker of its kind. No search is re-run.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

from . import __version__
from .detectors import HullCertificate, Pattern38Certificate, verify_hull, verify_pattern38
from .election import Election
from .embedder import Embedding, verify_embedding
from .errors import CorruptCertificate, ElectionError, MissingPoint
from .ilp import ClosureWitness, IlpCertificate, verify_closure, verify_ilp_certificate
from .lanes import EUCLIDEAN, NOT_EUCLIDEAN, UNKNOWN
from .portfolio import Verdict
from .reducer import ReductionTrace

logger = logging.getLogger(__name__)

TOOL = "euclidprefs"

# certificate kind → the status it can support
KIND_STATUS = {
    "trivial": EUCLIDEAN,
    "embedding": EUCLIDEAN,
    "pattern38": NOT_EUCLIDEAN,
    "hull": NOT_EUCLIDEAN,
    "closure": NOT_EUCLIDEAN,
    "ilp": NOT_EUCLIDEAN,
}

TRIVIAL_RULES: Dict[str, Callable[[Election], bool]] = {
    "|C| <= 3": lambda e: e.m <= 3,
    "|V| <= 2": lambda e: e.n <= 2,
    "|V| <= 3 and |C| <= 7": lambda e: e.n <= 3 and e.m <= 7,
}


@dataclass
class CheckResult:
    """Accept (no reasons) or Reject with reasons."""
    accepted: bool
    reasons: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.accepted

    @classmethod
    def reject(cls, *reasons: str) -> "CheckResult":
        return cls(False, list(reasons))


# =============================================================================
# SERIALISATION
# =============================================================================

def certificate_to_dict(verdict: Verdict) -> dict:
    """JSON-ready form of a verdict."""
    return {
        "tool": TOOL,
        "version": __version__,
        "status": verdict.status,
        "kind": verdict.kind,
        "lane": verdict.lane,
        "election_digest": verdict.election_digest,
        "reduced_digest": verdict.reduced.digest() if verdict.reduced is not None else None,
        "trace": verdict.trace.to_list(),
        "payload": verdict.payload,
        "timings": {k: round(v, 6) for k, v in verdict.timings.items()},
    }


def save_certificate(verdict: Verdict, path: Union[str, Path]) -> None:
    """Save a verdict's certificate to a JSON file."""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(certificate_to_dict(verdict), f, indent=2, ensure_ascii=False)


def load_certificate(path: Union[str, Path]) -> dict:
    """
    Load a certificate file.

    Raises:
        CorruptCertificate: Not JSON, or not a certificate object
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise CorruptCertificate(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict) or "status" not in data:
        raise CorruptCertificate(f"{path} is not a certificate object")
    return data


# =============================================================================
# VERIFICATION
# =============================================================================

def _check_payload(kind: str, reduced: Election, payload: dict, tolerance: float) -> List[str]:
    if kind == "trivial":
        rule = payload.get("rule")
        if rule not in TRIVIAL_RULES:
            return [f"Unknown trivial rule: {rule}. Available: {', '.join(TRIVIAL_RULES)}"]
        if not TRIVIAL_RULES[rule](reduced):
            return [f"rule {rule} does not hold: {reduced.m} candidates, {reduced.n} distinct votes"]
        return []
    if kind == "pattern38":
        return verify_pattern38(reduced, Pattern38Certificate.from_dict(payload))
    if kind == "hull":
        return verify_hull(reduced, HullCertificate.from_dict(payload))
    if kind == "closure":
        return verify_closure(reduced, ClosureWitness.from_dict(payload, reduced))
    if kind == "ilp":
        return verify_ilp_certificate(reduced, IlpCertificate.from_dict(payload))
    # embedding
    check = verify_embedding(reduced, Embedding.from_dict(payload["embedding"]), tolerance)
    return check.violations


def verify_certificate(
    e: Election,
    certificate: Union[Verdict, dict],
    tolerance: float = 1e-6,
) -> CheckResult:
    """
    Re-verify a certificate against the original election.

    Args:
        e: The election the certificate claims to decide
        certificate: A Verdict, or a dict read by load_certificate
        tolerance: Minimum squared gap for embedding certificates

    Returns:
        CheckResult; rejected with reasons when any check fails

    Raises:
        CorruptCertificate: Missing fields or an unknown kind
    """
    data = certificate_to_dict(certificate) if isinstance(certificate, Verdict) else certificate
    try:
        status, kind, payload = data["status"], data["kind"], data["payload"]
        trace = ReductionTrace.from_list(data.get("trace") or [])
        reduced_digest = data["reduced_digest"]
    except (KeyError, TypeError) as err:
        raise CorruptCertificate(f"certificate is missing {err}") from err

    if status == UNKNOWN:
        return CheckResult.reject("Unknown verdicts carry no certificate")
    if kind not in KIND_STATUS:
        raise CorruptCertificate(f"Unknown certificate kind: {kind}. Available: {', '.join(KIND_STATUS)}")
    if KIND_STATUS[kind] != status:
        return CheckResult.reject(f"a {kind} certificate cannot support status {status}")
    if not isinstance(payload, dict):
        raise CorruptCertificate("certificate payload must be an object")

    claimed = data.get("election_digest")
    if claimed and claimed != e.digest():
        return CheckResult.reject("certificate was issued for a different election")

    try:
        reduced = trace.replay(e, check=True)
    except CorruptCertificate as err:
        return CheckResult.reject(f"reduction trace: {err}")
    if reduced.digest() != reduced_digest:
        return CheckResult.reject("reduced election does not match the recorded digest")

    try:
        problems = _check_payload(kind, reduced, payload, tolerance)
    except MissingPoint as err:
        return CheckResult.reject(f"{kind} payload: {err}")
    except KeyError as err:
        raise CorruptCertificate(f"{kind} payload is missing {err}") from err
    except (ElectionError, CorruptCertificate, TypeError, ValueError) as err:
        logger.debug("payload check raised %r", err)
        return CheckResult.reject(f"{kind} payload: {err}")
    if problems:
        return CheckResult(False, problems)
    return CheckResult(True)
