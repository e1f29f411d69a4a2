"""
Refutation detectors that produce checkable certificates.

Two families are available:
1. 3-8 pattern (fast, needs ≥ 8 candidates and ≥ 3 voters)
2. Controversity graph / convex hull (quad and full subset search)

Both return None when they find nothing; that is never evidence of
2-Euclideanness.
"""

from .pattern38 import (
    SUBSET_LABELS,
    Pattern38Certificate,
    find_38,
    verify_pattern38,
)
from .hull import (
    ControversityGraph,
    DisconnectedCycle,
    HullCertificate,
    MaxDegree,
    build_controversity_graph,
    check_controversity,
    controversial_subsets,
    hull_refute,
    verify_hull,
)


def get_available_detectors() -> dict:
    """Detector name → short description."""
    return {
        "pattern38": "3-8 forbidden pattern scan",
        "hull": "controversity graph over 4-voter subsets",
        "hull-full": "controversity graph over all small voter subsets",
    }


__all__ = [
    # 3-8 pattern
    "find_38",
    "verify_pattern38",
    "Pattern38Certificate",
    "SUBSET_LABELS",
    # Controversity graph
    "ControversityGraph",
    "MaxDegree",
    "DisconnectedCycle",
    "HullCertificate",
    "build_controversity_graph",
    "check_controversity",
    "controversial_subsets",
    "hull_refute",
    "verify_hull",
    # Utilities
    "get_available_detectors",
]
