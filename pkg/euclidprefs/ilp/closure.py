"""
Counting bound on realisable rankings and the forced-neighbour closure.

If u and v are both realised regions, some neighbour of u on a shortest
swap path towards v is realised too. When that neighbour is unique it is
forced; closing V under forced neighbours and exceeding ub(|C|) refutes
the election outright.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import List, Optional, Set, Tuple

from ..election import Election, Vote, swap_adjacent
from ..errors import EqualVotes, MismatchedUniverse

logger = logging.getLogger(__name__)


def ub(m: int) -> int:
    """
    Maximum number of rankings m candidates in the plane can realise.

    Example:
        >>> ub(4)
        18
    """
    if m < 1:
        raise ValueError(f"ub needs m >= 1, got {m}")
    return m * (3 * m - 10) * (m + 1) * (m - 1) // 24 + m * (m - 1) + 1


def implied_neighbor_step(u: Vote, v: Vote) -> Set[Vote]:
    """Neighbours w of u with swap_distance(w, v) = swap_distance(u, v) - 1."""
    if len(u) != len(v):
        raise MismatchedUniverse(f"votes rank {len(u)} and {len(v)} candidates")
    if u == v:
        raise EqualVotes(f"implied neighbours need two different votes, got {u.key()} twice")
    # swapping an adjacent pair that v orders the other way fixes one discordance
    r = u.ranking
    return {swap_adjacent(u, i) for i in range(len(r) - 1) if v.prefers(r[i + 1], r[i])}


def forced_neighbor(u: Vote, v: Vote) -> Optional[Vote]:
    """The unique implied neighbour, or None when there are several."""
    r = u.ranking
    found = None
    for i in range(len(r) - 1):
        if v.prefers(r[i + 1], r[i]):
            if found is not None:
                return None
            found = i
    return swap_adjacent(u, found) if found is not None else None


@dataclass
class ClosureWitness:
    """V plus every forced vote, each with the pair that forced it."""
    initial: List[Vote]
    derivation: List[Tuple[Vote, Vote, Vote]] = field(default_factory=list)  # (u, v, forced)
    bound: int = 0

    @property
    def votes(self) -> List[Vote]:
        return self.initial + [w for _, _, w in self.derivation]

    def __len__(self) -> int:
        return len(self.initial) + len(self.derivation)

    def to_dict(self, e: Optional[Election] = None) -> dict:
        def show(v: Vote):
            return e.names_of(v) if e is not None else list(v.ranking)
        return {
            "initial": [show(v) for v in self.initial],
            "derivation": [[show(u), show(v), show(w)] for u, v, w in self.derivation],
            "size": len(self),
            "bound": self.bound,
        }

    @classmethod
    def from_dict(cls, data: dict, e: Election) -> "ClosureWitness":
        def read(names) -> Vote:
            return e.vote_from_names([str(n) for n in names])
        return cls(
            initial=[read(v) for v in data["initial"]],
            derivation=[(read(u), read(v), read(w)) for u, v, w in data["derivation"]],
            bound=int(data.get("bound", 0)),
        )


def forced_closure(
    e: Election,
    limit: Optional[int] = None,
    stop: Optional[threading.Event] = None,
) -> Optional[ClosureWitness]:
    """
    Close V under forced neighbours.

    Args:
        e: Election
        limit: Stop after the round in which the closure exceeds this size;
            None runs to the fixpoint
        stop: Polled once per vote of each round

    Returns:
        ClosureWitness whose votes are the closure, or None when stopped
    """
    witness = ClosureWitness(initial=list(e.votes), bound=ub(e.m) if e.m else 0)
    members = list(e.votes)
    seen = set(members)
    new = list(members)

    while new:
        if stop is not None and stop.is_set():
            return None
        start = len(members)
        for u in new:
            if stop is not None and stop.is_set():
                return None
            # snapshot: votes forced this round are paired up next round
            for v in members[:start]:
                if u == v:
                    continue
                for a, b in ((u, v), (v, u)):
                    w = forced_neighbor(a, b)
                    if w is not None and w not in seen:
                        seen.add(w)
                        members.append(w)
                        witness.derivation.append((a, b, w))
        new = members[start:]
        logger.debug("closure round: %d votes", len(members))
        if limit is not None and len(members) > limit:
            break
    return witness


def closure_refute(
    e: Election,
    exhaustive: bool = False,
    stop: Optional[threading.Event] = None,
) -> Optional[ClosureWitness]:
    """
    Close V under forced neighbours and compare with ub(|C|).

    Args:
        e: Election
        exhaustive: Keep closing after the bound is exceeded, up to the fixpoint
        stop: Polled once per vote of each round

    Returns:
        ClosureWitness when the closure outgrows ub(|C|), else None
    """
    if e.m < 2 or not e.votes:
        return None
    bound = ub(e.m)
    witness = forced_closure(e, None if exhaustive else bound, stop)
    if witness is not None and len(witness) > bound:
        logger.info("closure reached %d votes > ub(%d) = %d", len(witness), e.m, bound)
        return witness
    return None


def verify_closure(e: Election, witness: ClosureWitness) -> List[str]:
    """
    Replay the derivation on the election.

    Returns:
        List of problems; empty when the witness is valid
    """
    if set(witness.initial) != set(e.votes) or len(witness.initial) != e.n:
        return ["initial votes differ from the election"]
    current = set(witness.initial)
    for n, (u, v, w) in enumerate(witness.derivation, start=1):
        if u not in current or v not in current:
            return [f"derivation step {n} uses a vote not derived yet"]
        if u == v or implied_neighbor_step(u, v) != {w}:
            return [f"derivation step {n}: {w.key()} is not the unique implied neighbour"]
        if w in current:
            return [f"derivation step {n} repeats vote {w.key()}"]
        current.add(w)
    if len(current) <= ub(e.m):
        return [f"closure has {len(current)} votes, not more than ub({e.m}) = {ub(e.m)}"]
    return []
