"""
Bundled elections with known answers, plus a synthetic generator.

The named instances are small textbook cases: the 3-8 pattern and its
7-candidate remainder, two controversity-graph examples, a copy-free
instance, a tail-block instance, the closure example and an embeddable
7-voter election. synthetic_election() draws candidates and voters as
points in the unit square, so its elections are 2-Euclidean by
construction.
"""

import logging
import string
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .election import Election
from .embedder import Embedding
from .lanes import EUCLIDEAN, NOT_EUCLIDEAN

logger = logging.getLogger(__name__)


@dataclass
class Fixture:
    name: str
    election: Election
    expected: str                         # EUCLIDEAN or NOT_EUCLIDEAN
    embedding: Optional[Embedding] = None  # known points, synthetic only


def _split(rows: List[str]) -> List[List[str]]:
    return [row.split() for row in rows]


# =============================================================================
# NAMED INSTANCES
# =============================================================================

# c0 plays the center; cI is preferred over c0 exactly by the voters in I
PATTERN38_CANDIDATES = ["c0", "c1", "c2", "c3", "c12", "c13", "c23", "c123"]
PATTERN38_VOTES = [
    "c1 c12 c13 c123 c0 c2 c23 c3",
    "c2 c23 c12 c123 c0 c13 c1 c3",
    "c13 c3 c23 c123 c0 c1 c2 c12",
]


def pattern38() -> Election:
    return Election.from_rankings(PATTERN38_CANDIDATES, _split(PATTERN38_VOTES))


def pattern38_minus_c123() -> Election:
    names = [c for c in PATTERN38_CANDIDATES if c != "c123"]
    votes = [[c for c in row if c != "c123"] for row in _split(PATTERN38_VOTES)]
    return Election.from_rankings(names, votes)


EXAMPLE_GRAPH_VOTES = ["dgcfaeb", "gcbaedf", "cbadfge", "dbaegcf"]
EXAMPLE_GRAPH_EXTRA = ["dcbgfea", "cdbaegf", "dgcabef"]


def controversity_four() -> Election:
    """Four voters; the controversity graph has a vertex of degree 3."""
    return Election.from_rankings("abcdefg", EXAMPLE_GRAPH_VOTES)


def controversity_seven() -> Election:
    """The four voters above plus three more; only 4-voter subsets expose it."""
    return Election.from_rankings("abcdefg", EXAMPLE_GRAPH_VOTES + EXAMPLE_GRAPH_EXTRA)


NO_COPY_VOTES = [
    "c2 c1 c3 c4 c5 c6 c8 c7 c10 c9 c11 c12 c13 c14",
    "c1 c2 c4 c3 c5 c6 c8 c7 c9 c10 c12 c11 c13 c14",
    "c1 c2 c3 c4 c6 c5 c7 c8 c10 c9 c12 c11 c13 c14",
    "c1 c2 c3 c4 c5 c6 c7 c8 c9 c10 c11 c12 c14 c13",
]


def no_copy() -> Election:
    """Seven 2-blocks, each flipped by a different voter set; no block has a copy."""
    return Election.from_rankings([f"c{i}" for i in range(1, 15)], _split(NO_COPY_VOTES))


TAIL_BLOCK_HALVES = [
    "c6 c4 c1 c0 c2 c3 c5",
    "c5 c4 c2 c0 c1 c3 c6",
    "c6 c5 c3 c0 c1 c2 c4",
]


def tail_block() -> Election:
    """Two 7-candidate halves, the second ordered like the first in every vote."""
    names = [f"c{i}" for i in range(7)] + [f"c{i}'" for i in range(7)]
    votes = [row + [c + "'" for c in row] for row in _split(TAIL_BLOCK_HALVES)]
    return Election.from_rankings(names, votes)


CLOSURE_VOTES = ["abcd", "dcba", "bdca", "cabd", "dabc", "cdab"]


def closure_example() -> Election:
    """Forced neighbours grow the six votes to all 24 orders of abcd."""
    return Election.from_rankings("abcd", CLOSURE_VOTES)


def closure_with_dummy() -> Election:
    """The closure example with a fifth candidate ranked last everywhere."""
    return Election.from_rankings("abcde", [v + "e" for v in CLOSURE_VOTES])


EMBEDDABLE_VOTES = ["bdac", "bacd", "adcb", "acdb", "dacb", "cadb", "bcad"]


def embeddable_seven() -> Election:
    return Election.from_rankings("abcd", EMBEDDABLE_VOTES)


def two_candidates() -> Election:
    return Election.from_rankings("ab", ["ab"] * 30 + ["ba"] * 20)


def three_voters_seven_candidates() -> Election:
    return Election.from_rankings("abcdefg", ["abcdefg", "gfedcba", "dcebfag"])


FIXTURES: Dict[str, Tuple[Callable[[], Election], str]] = {
    "pattern38": (pattern38, NOT_EUCLIDEAN),
    "pattern38-minus-c123": (pattern38_minus_c123, EUCLIDEAN),
    "controversity-four": (controversity_four, NOT_EUCLIDEAN),
    "controversity-seven": (controversity_seven, NOT_EUCLIDEAN),
    "no-copy": (no_copy, NOT_EUCLIDEAN),
    "tail-block": (tail_block, NOT_EUCLIDEAN),
    "closure": (closure_example, NOT_EUCLIDEAN),
    "closure-dummy": (closure_with_dummy, NOT_EUCLIDEAN),
    "embeddable-seven": (embeddable_seven, EUCLIDEAN),
    "two-candidates": (two_candidates, EUCLIDEAN),
    "three-voters": (three_voters_seven_candidates, EUCLIDEAN),
}


def get_fixture(name: str) -> Fixture:
    """Get a named fixture."""
    if name not in FIXTURES:
        raise ValueError(f"Unknown fixture: {name}. Available: {', '.join(FIXTURES.keys())}")
    factory, expected = FIXTURES[name]
    return Fixture(name, factory(), expected)


# =============================================================================
# SYNTHETIC ELECTIONS
# =============================================================================

def _candidate_names(m: int) -> List[str]:
    if m <= 26:
        return list(string.ascii_lowercase[:m])
    return [f"c{i}" for i in range(m)]


def synthetic_election(
    m: int,
    n: int,
    seed: int = 0,
    min_gap: float = 1e-6,
    max_tries: int = 1000,
) -> Tuple[Election, Embedding]:
    """
    Draw m candidates and n voters uniformly in the unit square.

    Placements where some voter is (nearly) equidistant from two candidates,
    or two points coincide, are redrawn.

    Returns:
        The election (equal rankings collapsed) and the points that realise
        it, one voter point per distinct vote

    Raises:
        RuntimeError: No placement in general position within max_tries
    """
    if m < 1 or n < 1:
        raise ValueError(f"need at least one candidate and one voter, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    names = _candidate_names(m)
    for _ in range(max_tries):
        cand = rng.uniform(0.0, 1.0, size=(m, 2))
        voters = rng.uniform(0.0, 1.0, size=(n, 2))
        points = np.vstack([cand, voters])
        if len(np.unique(points, axis=0)) != len(points):
            continue
        dist = ((voters[:, None, :] - cand[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(dist, axis=1, kind="stable")
        gaps = np.diff(np.take_along_axis(dist, order, axis=1), axis=1)
        if m > 1 and gaps.min() < min_gap:
            continue
        break
    else:
        raise RuntimeError(f"no placement in general position after {max_tries} tries")

    rankings = [tuple(int(c) for c in row) for row in order]
    e = Election.from_rankings(names, rankings)
    first: Dict[Tuple[int, ...], int] = {}
    for i, r in enumerate(rankings):
        first.setdefault(r, i)
    emb = Embedding(
        candidates={names[k]: (float(cand[k, 0]), float(cand[k, 1])) for k in range(m)},
        voters=[(float(voters[first[v.ranking], 0]), float(voters[first[v.ranking], 1])) for v in e.votes],
    )
    return e, emb


def fixture_corpus(n_synthetic: int = 50, seed: int = 0) -> List[Fixture]:
    """Every named fixture plus `n_synthetic` seeded synthetic elections (4-7 candidates, 3-8 voters)."""
    corpus = [get_fixture(name) for name in FIXTURES]
    rng = np.random.default_rng(seed)
    for k in range(n_synthetic):
        m, n = int(rng.integers(4, 8)), int(rng.integers(3, 9))
        e, emb = synthetic_election(m, n, seed=seed * 100003 + k)
        corpus.append(Fixture(f"synthetic-{k:03d}", e, EUCLIDEAN, emb))
    logger.debug("fixture corpus: %d elections", len(corpus))
    return corpus
