"""
Elections and votes.

The data model every other module consumes:
- Vote: a strict ranking of candidate ids with O(1) position lookup
- Election: ordered candidates (display names) plus distinct votes with counts
- Restriction to a candidate subset and selection of a voter subset
- Swap distance, adjacent votes and reversal on permutations
- Controversial voter subsets, read off per-pair preference bitmasks

Candidate ids are dense integers 0..m-1 (the index into Election.candidates).
Positions reported by Vote.position() are 1-based, as in the literature.
Duplicate rankings are collapsed into one Vote with a multiplicity count;
every algorithm works on distinct votes only.
"""

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import (
    ElectionError,
    EmptyKeep,
    EmptySubset,
    MismatchedUniverse,
    TieOrIncomplete,
)


@dataclass(frozen=True)
class Vote:
    """A strict ranking, most preferred candidate first."""
    ranking: Tuple[int, ...]
    _pos: Tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        ranking = tuple(self.ranking)
        pos = [-1] * len(ranking)
        for i, c in enumerate(ranking):
            if not 0 <= c < len(ranking) or pos[c] != -1:
                raise TieOrIncomplete(f"ranking {list(ranking)} is not a permutation of 0..{len(ranking) - 1}")
            pos[c] = i
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "_pos", tuple(pos))

    def __len__(self) -> int:
        return len(self.ranking)

    def __iter__(self):
        return iter(self.ranking)

    def __getitem__(self, i):
        return self.ranking[i]

    def position(self, c: int) -> int:
        """1-based rank of candidate c."""
        return self._pos[c] + 1

    def index(self, c: int) -> int:
        """0-based rank of candidate c."""
        return self._pos[c]

    def prefers(self, a: int, b: int) -> bool:
        return self._pos[a] < self._pos[b]

    def key(self) -> str:
        """Compact textual key, e.g. '0-2-1-3'."""
        return "-".join(str(c) for c in self.ranking)

    @classmethod
    def from_key(cls, key: str) -> "Vote":
        return cls(tuple(int(t) for t in key.split("-")))


@dataclass(frozen=True)
class Election:
    """
    Candidates with display names plus the distinct votes cast over them.

    counts[i] is the multiplicity of votes[i]. Votes are kept in order of
    first appearance, so distinct-ranking indices are stable.
    """
    candidates: Tuple[str, ...]
    votes: Tuple[Vote, ...]
    counts: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "votes", tuple(self.votes))
        counts = tuple(self.counts) if self.counts else (1,) * len(self.votes)
        object.__setattr__(self, "counts", counts)

        if len(set(self.candidates)) != len(self.candidates):
            raise ElectionError(f"candidate names must be unique: {list(self.candidates)}")
        if len(counts) != len(self.votes):
            raise ElectionError("counts and votes differ in length")
        if any(c < 1 for c in counts):
            raise ElectionError("vote multiplicities must be positive")
        m = len(self.candidates)
        seen = set()
        for v in self.votes:
            if len(v) != m:
                raise MismatchedUniverse(f"vote {v.ranking} does not rank all {m} candidates")
            if v.ranking in seen:
                raise ElectionError(f"duplicate distinct vote {v.ranking}; use counts")
            seen.add(v.ranking)

    # -------------------------------------------------------------------------
    # Construction
    # -------------------------------------------------------------------------

    @classmethod
    def from_rankings(
        cls,
        candidates: Sequence[str],
        rankings: Iterable[Sequence[Union[int, str]]],
        counts: Optional[Sequence[int]] = None,
    ) -> "Election":
        """
        Build an election, collapsing equal rankings.

        Rankings may list candidate ids or candidate names. A string
        ranking such as "abcd" is read character by character when every
        candidate name is a single character.

        Example:
            >>> e = Election.from_rankings("abcd", ["abcd", "dcba", "abcd"])
            >>> e.counts
            (2, 1)
        """
        names = tuple(candidates)
        lookup = {name: i for i, name in enumerate(names)}
        rankings = list(rankings)
        counts = list(counts) if counts is not None else [1] * len(rankings)
        if len(counts) != len(rankings):
            raise ElectionError("counts and rankings differ in length")

        order: Dict[Tuple[int, ...], int] = {}
        for ranking, count in zip(rankings, counts):
            ids = []
            for token in ranking:
                if isinstance(token, str):
                    if token not in lookup:
                        raise ElectionError(f"unknown candidate {token!r}")
                    ids.append(lookup[token])
                else:
                    ids.append(int(token))
            key = tuple(ids)
            if len(key) != len(names):
                raise TieOrIncomplete(f"ranking {list(ranking)} does not rank all {len(names)} candidates")
            order[key] = order.get(key, 0) + count

        return cls(names, tuple(Vote(k) for k in order), tuple(order.values()))

    # -------------------------------------------------------------------------
    # Accessors
    # -------------------------------------------------------------------------

    @property
    def m(self) -> int:
        """Number of candidates."""
        return len(self.candidates)

    @property
    def n(self) -> int:
        """Number of distinct votes."""
        return len(self.votes)

    @property
    def total_voters(self) -> int:
        return sum(self.counts)

    def name(self, c: int) -> str:
        return self.candidates[c]

    def id_of(self, name: str) -> int:
        try:
            return self.candidates.index(name)
        except ValueError:
            raise ElectionError(f"unknown candidate {name!r}. Available: {', '.join(self.candidates)}") from None

    def names_of(self, v: Vote) -> List[str]:
        return [self.candidates[c] for c in v.ranking]

    def vote_from_names(self, names: Sequence[str]) -> Vote:
        return Vote(tuple(self.id_of(n) for n in names))

    def format_vote(self, v: Vote, sep: str = "") -> str:
        if sep == "" and any(len(name) != 1 for name in self.candidates):
            sep = " "
        return sep.join(self.names_of(v))

    def to_dict(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "votes": [self.names_of(v) for v in self.votes],
            "counts": list(self.counts),
        }

    def digest(self) -> str:
        """SHA-256 over candidate names and distinct rankings, in order."""
        canonical = json.dumps(
            {"candidates": list(self.candidates), "votes": [list(v.ranking) for v in self.votes]},
            separators=(",", ":"),
            ensure_ascii=False,
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class SubelectionMap:
    """Injective maps from a subelection's candidates and votes into a larger election."""
    candidate_map: Dict[int, int]  # sub candidate id → sup candidate id
    vote_map: Dict[int, int]       # sub distinct-vote index → sup distinct-vote index

    def check(self, sub: Election, sup: Election) -> bool:
        """True when the maps are injective and preserve every pairwise order."""
        if len(set(self.candidate_map.values())) != len(self.candidate_map):
            return False
        if len(set(self.vote_map.values())) != len(self.vote_map):
            return False
        for j, i in self.vote_map.items():
            sv, bv = sub.votes[j], sup.votes[i]
            for a in self.candidate_map:
                for b in self.candidate_map:
                    if a != b and sv.prefers(a, b) != bv.prefers(self.candidate_map[a], self.candidate_map[b]):
                        return False
        return True


# =============================================================================
# RESTRICTION AND SELECTION
# =============================================================================

def restrict_with_map(e: Election, keep: Iterable[int]) -> Tuple[Election, SubelectionMap]:
    """Project every vote onto `keep`, relabel densely, collapse equal rankings."""
    keep = sorted(set(keep))
    if not keep:
        raise EmptyKeep("cannot restrict an election to an empty candidate set")
    if keep[0] < 0 or keep[-1] >= e.m:
        raise ElectionError(f"candidate ids {keep} are not all in 0..{e.m - 1}")

    relabel = {c: i for i, c in enumerate(keep)}
    order: Dict[Tuple[int, ...], int] = {}
    first: Dict[Tuple[int, ...], int] = {}
    for idx, (v, count) in enumerate(zip(e.votes, e.counts)):
        projected = tuple(relabel[c] for c in v.ranking if c in relabel)
        order[projected] = order.get(projected, 0) + count
        first.setdefault(projected, idx)

    sub = Election(
        tuple(e.candidates[c] for c in keep),
        tuple(Vote(k) for k in order),
        tuple(order.values()),
    )
    mapping = SubelectionMap(
        candidate_map={i: c for i, c in enumerate(keep)},
        vote_map={j: first[k] for j, k in enumerate(order)},
    )
    return sub, mapping


def restrict(e: Election, keep: Iterable[int]) -> Election:
    """
    Subelection induced by a candidate subset.

    Example:
        >>> e = Election.from_rankings("abc", ["abc", "acb"])
        >>> restrict(e, [0]).counts
        (2,)
    """
    return restrict_with_map(e, keep)[0]


def restrict_names(e: Election, keep: Iterable[str]) -> Election:
    return restrict(e, [e.id_of(name) for name in keep])


def select_voters(e: Election, indices: Iterable[int]) -> Election:
    """Keep only the distinct votes at `indices` (in ascending order)."""
    indices = sorted(set(indices))
    if not indices:
        raise EmptySubset("voter subset is empty")
    if indices[0] < 0 or indices[-1] >= e.n:
        raise ElectionError(f"vote indices {indices} are not all in 0..{e.n - 1}")
    return Election(e.candidates, tuple(e.votes[i] for i in indices), tuple(e.counts[i] for i in indices))


# =============================================================================
# PERMUTATIONS
# =============================================================================

def swap_distance(u: Vote, v: Vote) -> int:
    """Number of candidate pairs ordered oppositely in u and v."""
    if len(u) != len(v):
        raise MismatchedUniverse(f"votes rank {len(u)} and {len(v)} candidates")
    seq = [v.index(c) for c in u.ranking]
    inversions = 0
    for i in range(len(seq)):
        si = seq[i]
        for j in range(i + 1, len(seq)):
            if si > seq[j]:
                inversions += 1
    return inversions


def swap_adjacent(v: Vote, i: int) -> Vote:
    """Swap the candidates at 0-based positions i and i+1."""
    r = list(v.ranking)
    r[i], r[i + 1] = r[i + 1], r[i]
    return Vote(tuple(r))


def adjacent_votes(v: Vote) -> List[Vote]:
    """The |C|-1 votes one adjacent transposition away from v."""
    return [swap_adjacent(v, i) for i in range(len(v) - 1)]


def reverse(v: Vote) -> Vote:
    return Vote(tuple(reversed(v.ranking)))


# =============================================================================
# CONTROVERSIAL SUBSETS
# =============================================================================

@lru_cache(maxsize=512)
def preference_masks(e: Election) -> Tuple[Tuple[int, ...], ...]:
    """
    masks[a][b] has bit i set iff distinct vote i prefers a over b.

    A voter subset S (as a bitmask) is controversial for a over b within a
    voter set T exactly when masks[a][b] & T == S.
    """
    m = e.m
    masks = [[0] * m for _ in range(m)]
    for i, v in enumerate(e.votes):
        bit = 1 << i
        r = v.ranking
        for x in range(m):
            a = r[x]
            row = masks[a]
            for y in range(x + 1, m):
                row[r[y]] |= bit
    return tuple(tuple(row) for row in masks)


def to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def mask_members(mask: int) -> List[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def controversial_witness(e: Election, subset: Iterable[int]) -> Optional[Tuple[int, int]]:
    """
    First pair (a, b) in candidate order such that every vote in `subset`
    prefers a over b and every other vote prefers b over a.

    The full voter set is never controversial.
    """
    subset = set(subset)
    if not subset:
        raise EmptySubset("controversial_witness needs a nonempty voter subset")
    if min(subset) < 0 or max(subset) >= e.n:
        raise ElectionError(f"vote indices {sorted(subset)} are not all in 0..{e.n - 1}")
    if len(subset) == e.n:
        return None
    target = to_mask(subset)
    masks = preference_masks(e)
    for a in range(e.m):
        row = masks[a]
        for b in range(e.m):
            if a != b and row[b] == target:
                return (a, b)
    return None
