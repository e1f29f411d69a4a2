"""
Tests for the election data model.

Uses the four-voter controversity example (candidates a..g) and small
hand-made elections.
"""

import pytest
import random
import sys
from collections import deque
from itertools import combinations, permutations
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from euclidprefs.election import (
    Election,
    Vote,
    adjacent_votes,
    controversial_witness,
    restrict,
    restrict_names,
    restrict_with_map,
    reverse,
    select_voters,
    swap_distance,
)
from euclidprefs.errors import ElectionError, EmptyKeep, EmptySubset, MismatchedUniverse, TieOrIncomplete


FOUR_VOTERS = ["dgcfaeb", "gcbaedf", "cbadfge", "dbaegcf"]


def test_equal_rankings_collapse():
    """Equal rankings become one vote with a count, in first-appearance order."""
    e = Election.from_rankings("abcd", ["abcd", "dcba", "abcd"])
    assert e.n == 2
    assert e.counts == (2, 1)
    assert e.total_voters == 3
    assert e.format_vote(e.votes[1]) == "dcba"


def test_vote_positions_are_one_based():
    v = Vote((2, 0, 1))
    assert v.position(2) == 1
    assert v.index(1) == 2
    assert v.prefers(0, 1)
    assert not v.prefers(1, 2)
    assert Vote.from_key(v.key()) == v


def test_vote_rejects_non_permutation():
    with pytest.raises(TieOrIncomplete):
        Vote((0, 0, 1))


def test_duplicate_candidate_names_rejected():
    with pytest.raises(ElectionError):
        Election(("a", "a"), (Vote((0, 1)),))


def test_restrict_relabels_and_merges():
    """Dropping b merges acb into abc."""
    e = Election.from_rankings("abc", ["abc", "acb"])
    sub = restrict(e, [0, 2])
    assert sub.candidates == ("a", "c")
    assert sub.votes == (Vote((0, 1)),)
    assert sub.counts == (2,)
    assert restrict(e, [0]).counts == (2,)


def test_restrict_empty_keep():
    e = Election.from_rankings("abc", ["abc"])
    with pytest.raises(EmptyKeep):
        restrict(e, [])


def test_restrict_map_preserves_order():
    e = Election.from_rankings("abcdefg", FOUR_VOTERS)
    sub, mapping = restrict_with_map(e, [1, 3, 5, 6])
    assert mapping.check(sub, e)
    assert restrict_names(e, ["b", "d", "f", "g"]) == sub


def test_restrict_twice_changes_nothing():
    rng = random.Random(3)
    for _ in range(100):
        m = rng.randint(1, 7)
        names = "abcdefg"[:m]
        e = Election.from_rankings(names, ["".join(rng.sample(names, m)) for _ in range(rng.randint(1, 6))])
        keep = rng.sample(names, rng.randint(1, m))
        once = restrict_names(e, keep)
        assert restrict_names(once, keep) == once


def test_select_voters_keeps_counts():
    e = Election.from_rankings("abc", ["abc", "cba", "cba", "bac"])
    sub = select_voters(e, [2, 1])
    assert sub.votes == (e.votes[1], e.votes[2])
    assert sub.counts == (2, 1)
    with pytest.raises(EmptySubset):
        select_voters(e, [])


def _bfs_distances(m):
    start = Vote(tuple(range(m)))
    dist = {start: 0}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adjacent_votes(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return start, dist


def test_swap_distance_matches_bfs():
    """Swap distance equals the shortest adjacent-transposition path."""
    start, dist = _bfs_distances(5)
    assert len(dist) == 120
    for v, d in dist.items():
        assert swap_distance(start, v) == d
        assert swap_distance(v, start) == d


def test_swap_distance_counts_discordant_pairs():
    rng = random.Random(11)
    for _ in range(500):
        n = rng.randint(1, 7)
        u, v = (Vote(tuple(rng.sample(range(n), n))) for _ in range(2))
        discordant = sum(1 for a in range(n) for b in range(a + 1, n) if u.prefers(a, b) != v.prefers(a, b))
        assert swap_distance(u, v) == discordant


def test_reverse_is_farthest():
    for ranking in permutations(range(4)):
        v = Vote(ranking)
        assert swap_distance(v, reverse(v)) == 6
        assert all(swap_distance(v, w) == 1 for w in adjacent_votes(v))


def test_swap_distance_needs_same_universe():
    with pytest.raises(MismatchedUniverse):
        swap_distance(Vote((0, 1)), Vote((0, 1, 2)))


def test_controversial_witness():
    """v1 alone prefers a over b; v1 and v2 alone prefer g over a."""
    e = Election.from_rankings("abcdefg", FOUR_VOTERS)
    assert controversial_witness(e, [0]) == (0, 1)
    assert controversial_witness(e, [0, 1]) == (6, 0)
    assert controversial_witness(e, [0, 1, 2, 3]) is None


def test_controversial_witness_of_complement():
    """S is controversial exactly when the other voters are, with the pair reversed."""
    rng = random.Random(9)
    for _ in range(60):
        m = rng.randint(2, 6)
        e = Election.from_rankings("abcdef"[:m], [rng.sample(range(m), m) for _ in range(rng.randint(2, 6))])
        for size in range(1, e.n):
            for subset in combinations(range(e.n), size):
                rest = [i for i in range(e.n) if i not in subset]
                found, other = controversial_witness(e, subset), controversial_witness(e, rest)
                assert (found is None) == (other is None)
                if found is not None:
                    a, b = found
                    assert all(e.votes[i].prefers(b, a) for i in rest)


def test_digest_depends_on_rankings_only():
    e1 = Election.from_rankings("abc", ["abc", "bca"])
    e2 = Election.from_rankings("abc", ["abc", "bca", "bca"])
    e3 = Election.from_rankings("abc", ["abc", "cba"])
    assert e1.digest() == e2.digest()
    assert e1.digest() != e3.digest()
    assert len(e1.digest()) == 64


if __name__ == "__main__":
    # Run tests
    pytest.main([__file__, "-v"])
