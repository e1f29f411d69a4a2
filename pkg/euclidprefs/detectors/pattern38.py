"""
The 3-8 pattern: three voters and eight candidates that no planar
embedding can realise.

A center candidate c plus seven others c_I, one for every nonempty
I ⊆ {1,2,3}, such that voter i prefers c_I over c exactly when i ∈ I.
Scanning every (center, voter triple) and bucketing the other candidates
by their 3-bit preference pattern finds the pattern in O(|V|³|C|²).
"""

import threading
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from ..election import Election


def subset_label(pattern: int) -> str:
    """Bit pattern 1..7 → label such as '13' (voters 1 and 3)."""
    return "".join(str(i + 1) for i in range(3) if pattern >> i & 1)


SUBSET_LABELS = tuple(subset_label(p) for p in range(1, 8))


@dataclass
class Pattern38Certificate:
    """Three voters, the center and the seven witnesses c_I."""
    voters: Tuple[int, int, int]  # distinct-vote indices
    center: int                   # candidate playing c_∅
    witnesses: Dict[str, int]     # subset label → candidate playing c_I

    def to_dict(self, e: Optional[Election] = None) -> dict:
        data = {
            "voters": list(self.voters),
            "center": self.center,
            "witnesses": dict(self.witnesses),
        }
        if e is not None:
            data["center_name"] = e.name(self.center)
            data["witness_names"] = {k: e.name(c) for k, c in self.witnesses.items()}
            data["voter_rankings"] = [e.names_of(e.votes[i]) for i in self.voters]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Pattern38Certificate":
        return cls(
            voters=tuple(int(i) for i in data["voters"]),
            center=int(data["center"]),
            witnesses={str(k): int(c) for k, c in data["witnesses"].items()},
        )


def find_38(e: Election, stop: Optional[threading.Event] = None) -> Optional[Pattern38Certificate]:
    """
    Find a 3-8 pattern.

    Centers are tried in candidate order and voter triples in lexicographic
    order; the first complete family wins and each slot keeps the smallest
    candidate id that fits it.

    Args:
        e: Election to scan
        stop: Polled per center and per voter triple; the scan gives up when set

    Returns:
        Pattern38Certificate, or None when the election has no such pattern
        (or the scan was stopped)
    """
    if e.m < 8 or e.n < 3:
        return None

    # above[i][c]: bitmask of candidates vote i ranks above c
    above = []
    for v in e.votes:
        row = [0] * e.m
        seen = 0
        for c in v.ranking:
            row[c] = seen
            seen |= 1 << c
        above.append(row)

    for center in range(e.m):
        if stop is not None and stop.is_set():
            return None
        for triple in combinations(range(e.n), 3):
            if stop is not None and stop.is_set():
                return None
            a0, a1, a2 = (above[i][center] for i in triple)
            slots: List[Optional[int]] = [None] * 8
            filled = 0
            for d in range(e.m):
                if d == center:
                    continue
                bit = 1 << d
                pattern = (1 if a0 & bit else 0) | (2 if a1 & bit else 0) | (4 if a2 & bit else 0)
                if pattern and slots[pattern] is None:
                    slots[pattern] = d
                    filled += 1
                    if filled == 7:
                        break
            if filled == 7:
                return Pattern38Certificate(
                    voters=triple,
                    center=center,
                    witnesses={subset_label(p): slots[p] for p in range(1, 8)},
                )
    return None


def verify_pattern38(e: Election, cert: Pattern38Certificate) -> List[str]:
    """
    Re-check a certificate against the election alone.

    Returns:
        List of problems; empty when the certificate is valid
    """
    problems = []
    voters = list(cert.voters)
    if len(voters) != 3 or len(set(voters)) != 3:
        return [f"need three distinct voters, got {voters}"]
    if any(not 0 <= i < e.n for i in voters):
        return [f"voter index out of range in {voters}"]
    if not 0 <= cert.center < e.m:
        return [f"center {cert.center} out of range"]

    missing = sorted(set(SUBSET_LABELS) - set(cert.witnesses))
    if missing:
        problems.append(f"witness subsets missing: {', '.join(missing)}")
    extra = sorted(set(cert.witnesses) - set(SUBSET_LABELS))
    if extra:
        problems.append(f"unknown witness subsets: {', '.join(extra)}")

    used = list(cert.witnesses.values())
    if len(set(used)) != len(used):
        problems.append("witnesses are not distinct")
    if cert.center in used:
        problems.append("center is also used as a witness")

    for label, c in cert.witnesses.items():
        if not 0 <= c < e.m:
            problems.append(f"witness {label} out of range")
            continue
        for pos, i in enumerate(voters):
            expected = str(pos + 1) in label
            if e.votes[i].prefers(c, cert.center) != expected:
                problems.append(
                    f"witness {label} ({e.name(c)}) vs center {e.name(cert.center)} "
                    f"has the wrong order in voter {i}"
                )
    return problems
