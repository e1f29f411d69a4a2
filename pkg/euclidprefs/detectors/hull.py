"""
Controversity graph and the convex-hull refutation family.

A voter is controversial when it alone prefers some a over b; a pair of
controversial voters is an edge when exactly those two prefer some a over
b. In any planar embedding the vertices sit on the voters' convex hull and
edges join hull neighbours, so the graph has maximum degree 2 and, if it
has a cycle, is connected. A violation on any voter subset refutes the
election.

Search modes:
- "quad": every 4-voter subset
- "full": every subset of 4..max_subset_size voters, ascending size
"""

import logging
import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Literal, Optional, Tuple, Union

import networkx as nx

from ..election import Election, mask_members, preference_masks, to_mask
from ..errors import ElectionError, TooFewVoters

logger = logging.getLogger(__name__)

HullMode = Literal["quad", "full"]


@dataclass
class ControversityGraph:
    """Vertices and edges keyed by distinct-vote index, each with its witness pair (a, b)."""
    voters: Tuple[int, ...]                                          # voter set the graph was built over
    vertices: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    edges: Dict[Tuple[int, int], Tuple[int, int]] = field(default_factory=dict)  # (u, v) with u < v

    def neighbors(self, v: int) -> List[int]:
        return sorted([b if a == v else a for (a, b) in self.edges if v in (a, b)])

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        for v, witness in sorted(self.vertices.items()):
            g.add_node(v, witness=witness)
        for (u, v), witness in sorted(self.edges.items()):
            g.add_edge(u, v, witness=witness)
        return g


@dataclass
class MaxDegree:
    """A vertex with three or more neighbours."""
    vertex: int
    neighbors: Tuple[int, ...]

    kind = "max_degree"

    def to_dict(self) -> dict:
        return {"type": self.kind, "vertex": self.vertex, "neighbors": list(self.neighbors)}


@dataclass
class DisconnectedCycle:
    """A cycle plus a vertex outside the cycle's component."""
    cycle: Tuple[int, ...]
    outside: int

    kind = "disconnected_cycle"

    def to_dict(self) -> dict:
        return {"type": self.kind, "cycle": list(self.cycle), "outside": self.outside}


Violation = Union[MaxDegree, DisconnectedCycle]


def violation_from_dict(data: dict) -> Violation:
    kind = data.get("type")
    if kind == MaxDegree.kind:
        return MaxDegree(int(data["vertex"]), tuple(int(v) for v in data["neighbors"]))
    if kind == DisconnectedCycle.kind:
        return DisconnectedCycle(tuple(int(v) for v in data["cycle"]), int(data["outside"]))
    raise ValueError(f"Unknown violation type: {kind}. Available: {MaxDegree.kind}, {DisconnectedCycle.kind}")


@dataclass
class HullCertificate:
    """The voter subset whose controversity graph breaks the hull theorem."""
    voter_subset: Tuple[int, ...]
    violation: Violation

    def to_dict(self, e: Optional[Election] = None) -> dict:
        data = {"voter_subset": list(self.voter_subset), "violation": self.violation.to_dict()}
        if e is not None:
            data["voter_rankings"] = [e.names_of(e.votes[i]) for i in self.voter_subset]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "HullCertificate":
        return cls(tuple(int(i) for i in data["voter_subset"]), violation_from_dict(data["violation"]))


# =============================================================================
# GRAPH CONSTRUCTION
# =============================================================================

def _graph_over(e: Election, voters: Tuple[int, ...]) -> ControversityGraph:
    masks = preference_masks(e)
    full = to_mask(voters)
    # restricted mask → first witness pair in candidate order
    witnesses: Dict[int, Tuple[int, int]] = {}
    for a in range(e.m):
        row = masks[a]
        for b in range(e.m):
            if a == b:
                continue
            key = row[b] & full
            if key and key != full and key not in witnesses:
                witnesses[key] = (a, b)

    g = ControversityGraph(voters=voters)
    for v in voters:
        w = witnesses.get(1 << v)
        if w is not None:
            g.vertices[v] = w
    controversial = sorted(g.vertices)
    for u, v in combinations(controversial, 2):
        w = witnesses.get((1 << u) | (1 << v))
        if w is not None:
            g.edges[(u, v)] = w
    return g


def build_controversity_graph(e: Election, voters: Optional[Iterable[int]] = None) -> ControversityGraph:
    """
    Controversity graph of (C, V'), V' = `voters` (all distinct votes by default).

    Example:
        Four voters where v1 alone prefers a over b, and v1 pairs up with
        each of the other three on some candidate pair, give deg(v1) = 3.
    """
    voters = tuple(sorted(set(voters))) if voters is not None else tuple(range(e.n))
    if not voters:
        raise TooFewVoters("a controversity graph needs at least one vote")
    if voters[0] < 0 or voters[-1] >= e.n:
        raise ElectionError(f"vote indices {list(voters)} are not all in 0..{e.n - 1}")
    return _graph_over(e, voters)


def check_controversity(g: ControversityGraph) -> Optional[Violation]:
    """MaxDegree if some vertex has degree ≥ 3, else DisconnectedCycle, else None."""
    graph = g.to_networkx()
    for v in sorted(graph.nodes):
        if graph.degree(v) >= 3:
            return MaxDegree(v, tuple(sorted(graph.neighbors(v))))

    cycles = nx.cycle_basis(graph)
    if not cycles:
        return None
    cycle = min(cycles, key=lambda c: (min(c), len(c)))
    # rotate so the smallest vertex leads; keeps certificates stable
    start = cycle.index(min(cycle))
    cycle = cycle[start:] + cycle[:start]
    component = nx.node_connected_component(graph, cycle[0])
    outside = sorted(set(graph.nodes) - component)
    if outside:
        return DisconnectedCycle(tuple(cycle), outside[0])
    return None


# =============================================================================
# SUBSET SEARCH
# =============================================================================

def hull_refute(
    e: Election,
    mode: HullMode = "quad",
    max_subset_size: int = 6,
    stop: Optional[threading.Event] = None,
) -> Optional[HullCertificate]:
    """
    Search voter subsets for a controversity-graph violation.

    Args:
        e: Election (distinct votes are the voters)
        mode: "quad" for 4-voter subsets, "full" for 4..max_subset_size
        max_subset_size: Cap for "full" mode
        stop: Polled between subsets; search ends early when set

    Returns:
        First certificate in enumeration order, or None
    """
    if mode == "quad":
        if e.n < 4:
            raise TooFewVoters(f"quad mode needs at least 4 distinct votes, got {e.n}")
        sizes = [4]
    elif mode == "full":
        if max_subset_size < 4:
            raise ValueError(f"full mode needs max_subset_size >= 4, got {max_subset_size}")
        sizes = list(range(4, min(max_subset_size, e.n) + 1))
    else:
        raise ValueError(f"Unknown hull mode: {mode}. Available: quad, full")

    for size in sizes:
        for subset in combinations(range(e.n), size):
            if stop is not None and stop.is_set():
                return None
            violation = check_controversity(_graph_over(e, subset))
            if violation is not None:
                logger.debug("hull violation on voters %s: %s", subset, violation)
                return HullCertificate(subset, violation)
    return None


def verify_hull(e: Election, cert: HullCertificate) -> List[str]:
    """
    Rebuild the controversity graph of the certified subset and confirm the violation.

    Returns:
        List of problems; empty when the certificate is valid
    """
    subset = tuple(sorted(set(cert.voter_subset)))
    if len(subset) != len(cert.voter_subset) or not subset:
        return ["voter subset is empty or has repeats"]
    if subset[0] < 0 or subset[-1] >= e.n:
        return [f"voter subset {list(subset)} out of range"]

    graph = _graph_over(e, subset).to_networkx()
    violation = cert.violation

    if isinstance(violation, MaxDegree):
        if violation.vertex not in graph:
            return [f"voter {violation.vertex} is not controversial"]
        if len(set(violation.neighbors)) < 3:
            return ["max-degree violation lists fewer than three neighbours"]
        missing = [u for u in violation.neighbors if not graph.has_edge(violation.vertex, u)]
        if missing:
            return [f"voters {missing} are not adjacent to {violation.vertex}"]
        return []

    cycle = list(violation.cycle)
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        return ["cycle must list at least three distinct vertices"]
    for u, v in zip(cycle, cycle[1:] + cycle[:1]):
        if not graph.has_edge(u, v):
            return [f"cycle edge ({u}, {v}) is not in the controversity graph"]
    if violation.outside not in graph:
        return [f"voter {violation.outside} is not controversial"]
    if nx.has_path(graph, cycle[0], violation.outside):
        return [f"voter {violation.outside} is connected to the cycle"]
    return []


def controversial_subsets(e: Election, voters: Optional[Iterable[int]] = None) -> List[List[int]]:
    """All controversial subsets of the given voter set (diagnostics)."""
    voters = tuple(sorted(set(voters))) if voters is not None else tuple(range(e.n))
    masks = preference_masks(e)
    full = to_mask(voters)
    found = {row[b] & full for a, row in enumerate(masks) for b in range(e.m) if a != b}
    return sorted(mask_members(k) for k in found if k and k != full)
