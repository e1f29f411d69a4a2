"""
Tests for the 3-8 pattern scan and the controversity-graph detector.
"""

import pytest
import random
import sys
import threading
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from euclidprefs.detectors import (
    ControversityGraph,
    DisconnectedCycle,
    HullCertificate,
    MaxDegree,
    build_controversity_graph,
    check_controversity,
    find_38,
    hull_refute,
    verify_hull,
    verify_pattern38,
)
from euclidprefs.detectors.hull import violation_from_dict
from euclidprefs.election import Election, restrict_with_map
from euclidprefs.errors import TooFewVoters
from euclidprefs.fixtures import (
    controversity_four,
    controversity_seven,
    embeddable_seven,
    no_copy,
    pattern38,
    pattern38_minus_c123,
    synthetic_election,
    tail_block,
)


# =============================================================================
# 3-8 PATTERN
# =============================================================================

def test_find_38_on_pattern():
    e = pattern38()
    cert = find_38(e)
    assert cert is not None
    assert cert.voters == (0, 1, 2)
    assert cert.center == 0
    assert cert.witnesses == {"1": 1, "2": 2, "3": 3, "12": 4, "13": 5, "23": 6, "123": 7}
    assert verify_pattern38(e, cert) == []


def test_find_38_on_tail_block():
    """Only a primed candidate can be the center; c0 fills the all-voters slot."""
    e = tail_block()
    cert = find_38(e)
    assert cert is not None
    assert e.name(cert.center) == "c0'"
    assert cert.witnesses["123"] == e.id_of("c0")
    assert verify_pattern38(e, cert) == []


def test_find_38_gives_up_when_stopped():
    stop = threading.Event()
    assert find_38(pattern38(), stop) is not None
    stop.set()
    assert find_38(pattern38(), stop) is None


def test_pattern_needs_eight_candidates():
    assert find_38(pattern38_minus_c123()) is None
    assert find_38(embeddable_seven()) is None


def test_tampered_pattern_rejected():
    e = pattern38()
    cert = find_38(e)
    del cert.witnesses["123"]
    assert any("missing" in p for p in verify_pattern38(e, cert))

    cert = find_38(e)
    cert.witnesses["1"], cert.witnesses["2"] = cert.witnesses["2"], cert.witnesses["1"]
    assert verify_pattern38(e, cert)

    cert = find_38(e)
    cert.witnesses["1"] = cert.center
    assert verify_pattern38(e, cert)


# =============================================================================
# CONTROVERSITY GRAPH
# =============================================================================

def test_four_voter_graph_is_complete():
    """Every voter is controversial and every pair of voters is an edge."""
    g = build_controversity_graph(controversity_four())
    # {v3, v4} alone prefer b over g, so the fifth pair is an edge too
    assert sorted(g.vertices) == [0, 1, 2, 3]
    assert len(g.edges) == 6
    assert all(g.degree(v) == 3 for v in g.vertices)
    assert g.vertices[0] == (0, 1)  # only v1 prefers a over b
    assert check_controversity(g) == MaxDegree(0, (1, 2, 3))


def test_hull_quad_finds_four_voter_subset():
    e = controversity_seven()
    cert = hull_refute(e, mode="quad")
    assert cert is not None
    assert cert.voter_subset == (0, 1, 2, 3)
    assert cert.violation == MaxDegree(0, (1, 2, 3))
    assert verify_hull(e, cert) == []
    assert verify_hull(e, HullCertificate.from_dict(cert.to_dict(e))) == []


def test_full_graph_can_hide_violation():
    g = build_controversity_graph(controversity_seven())
    assert len(g.vertices) == 5
    assert len(g.edges) == 2
    assert check_controversity(build_controversity_graph(controversity_seven())) is None


def test_no_copy_instance_has_max_degree():
    cert = hull_refute(no_copy())
    assert isinstance(cert.violation, MaxDegree)
    assert cert.violation.vertex == 0


def test_disconnected_cycle():
    g = ControversityGraph(
        voters=(0, 1, 2, 3),
        vertices={0: (0, 1), 1: (0, 1), 2: (0, 1), 3: (0, 1)},
        edges={(0, 1): (0, 1), (1, 2): (0, 1), (0, 2): (0, 1)},
    )
    violation = check_controversity(g)
    assert isinstance(violation, DisconnectedCycle)
    assert violation.cycle[0] == 0
    assert set(violation.cycle) == {0, 1, 2}
    assert violation.outside == 3

    path = ControversityGraph(voters=(0, 1, 2), vertices={0: (0, 1), 1: (0, 1), 2: (0, 1)},
                              edges={(0, 1): (0, 1), (1, 2): (0, 1)})
    assert check_controversity(path) is None


def test_hull_modes_and_errors():
    e = embeddable_seven()
    with pytest.raises(TooFewVoters):
        hull_refute(pattern38(), mode="quad")
    with pytest.raises(ValueError):
        hull_refute(e, mode="full", max_subset_size=3)
    with pytest.raises(ValueError):
        hull_refute(e, mode="sideways")
    with pytest.raises(ValueError):
        violation_from_dict({"type": "triangle"})


def test_tampered_hull_certificate_rejected():
    e = controversity_four()
    cert = hull_refute(e)
    assert verify_hull(e, HullCertificate(cert.voter_subset, MaxDegree(0, (1, 2)))) != []
    assert verify_hull(e, HullCertificate((0, 1, 2, 9), cert.violation)) != []
    assert verify_hull(e, HullCertificate((0, 0, 1, 2), cert.violation)) != []


def _assert_planar_elections_pass(seeds):
    for seed in seeds:
        m, n = 4 + seed % 6, 4 + seed % 5
        e, _ = synthetic_election(m, n, seed=seed)
        assert find_38(e) is None, seed
        assert check_controversity(build_controversity_graph(e)) is None, seed
        if e.n >= 4:
            assert hull_refute(e, mode="full", max_subset_size=6) is None, seed


def test_detectors_never_fire_on_planar_elections():
    """Synthetic elections come from points in the plane, so nothing may refute them."""
    _assert_planar_elections_pass(range(150))


@pytest.mark.sweep
def test_detectors_never_fire_on_planar_elections_sweep():
    _assert_planar_elections_pass(range(1000))


def _random_election(rng, m, n):
    names = "abcdefgh"[:m]
    return Election.from_rankings(names, [rng.sample(range(m), m) for _ in range(n)])


def test_quad_violation_is_a_full_violation():
    rng = random.Random(11)
    elections = [controversity_seven(), controversity_four(), no_copy()]
    elections += [_random_election(rng, rng.randint(3, 6), rng.randint(4, 7)) for _ in range(80)]
    for e in elections:
        if e.n < 4:
            continue
        if hull_refute(e, mode="quad") is not None:
            assert hull_refute(e, mode="full", max_subset_size=min(e.n, 6)) is not None


def test_restriction_graph_is_a_subgraph():
    """Dropping candidates only removes witness pairs."""
    rng = random.Random(5)
    checked = 0
    for _ in range(200):
        m = rng.randint(3, 7)
        e = _random_election(rng, m, rng.randint(2, 7))
        keep = rng.sample(range(m), rng.randint(2, m))
        sub, mapping = restrict_with_map(e, keep)
        if sub.n != e.n:
            continue
        checked += 1
        g, h = build_controversity_graph(sub), build_controversity_graph(e)
        to_sup = mapping.vote_map
        assert {to_sup[v] for v in g.vertices} <= set(h.vertices)
        assert {tuple(sorted((to_sup[u], to_sup[w]))) for u, w in g.edges} <= set(h.edges)
    assert checked > 20


if __name__ == "__main__":
    # Run tests
    pytest.main([__file__, "-v"])
