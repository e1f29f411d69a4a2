"""
Region-status model: 0/1 variables per ranking and linear rows over them.

Variables are created lazily and an absent variable reads as 0:
- x.<vote>  the ranking's region is nonempty
- i.<vote>  the region is bounded (an inner region)
- y.<vote>  the region is outer, so it has exactly two outer neighbours
- p.<vote>|<vote>|...  logical AND of the listed x variables

Every Row carries a tag naming its family and args naming the votes or
candidates it was built from, so any row can be rebuilt and compared.
Votes in args and variable names use the "0-2-1-3" key of Vote.

Row families:
    C1  x_v = 1 for v in V
    C2  sum x <= ub(m)                          (over existing variables)
    C3  (1-x_u) + (1-x_v) + sum x_w >= 1        (w implied by u towards v)
    C4  sum of x over votes ranking c first >= 1
    C5  x_v - i_v >= 0
    C6  sum (x - i) <= 2 C(m,2)                 (over existing variables)
    C7  i_v + i_vR <= 1
    C8  (1-x_v) + i_v + x_vR >= 1
    C9  (1-x_v) + i_v + (1-i_vR) >= 1
    C10 sum over neighbours x_w >= 2 x_v + i_v
    C11 (1-x_v) + i_v + y_v >= 1
    D2  2 y_v <= S(v)                           S(v) = sum over neighbours (x_w - i_w)
    D3  S(v) <= m - 1 - (m - 3) y_v
    C12 sum of edge products across bisector ab <= C(m-2,2) + m - 1
    C13 sum of 4-cycle products around ab|cd <= 1
    C14 sum of 6-window products around abc <= 1   (optional)
    H1  pair product rows, H2/H3 rows for longer products
"""

import logging
from dataclasses import dataclass, field
from itertools import permutations
from math import comb, factorial
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from ..election import Election, Vote, adjacent_votes, reverse, swap_adjacent
from ..errors import CorruptCertificate, TooFewCandidates
from .closure import implied_neighbor_step, ub

logger = logging.getLogger(__name__)

SENSES = (">=", "<=", "==")

AGGREGATE_TAGS = ("C2", "C6")
FAMILY_TAGS = ("C12", "C13", "C14")


# =============================================================================
# VARIABLES
# =============================================================================

def x_var(v: Vote) -> str:
    return f"x.{v.key()}"


def iota_var(v: Vote) -> str:
    return f"i.{v.key()}"


def y_var(v: Vote) -> str:
    return f"y.{v.key()}"


def product_var(factors: Iterable[Vote]) -> str:
    keys = sorted({v.key() for v in factors})
    return "p." + "|".join(keys)


def parse_var(name: str) -> Tuple[str, List[Vote]]:
    """Variable name → (kind, votes); kind is one of x, i, y, p."""
    kind, _, rest = name.partition(".")
    if kind not in ("x", "i", "y", "p") or not rest:
        raise CorruptCertificate(f"not a region-model variable: {name!r}")
    try:
        votes = [Vote.from_key(k) for k in rest.split("|")]
    except ValueError as e:
        raise CorruptCertificate(f"bad vote key in variable {name!r}") from e
    if kind != "p" and len(votes) != 1:
        raise CorruptCertificate(f"variable {name!r} names {len(votes)} votes")
    return kind, votes


# =============================================================================
# ROWS
# =============================================================================

@dataclass(frozen=True)
class Row:
    """A linear row over 0/1 variables: sum(coef * var) <sense> rhs."""
    tag: str
    terms: Tuple[Tuple[str, int], ...]
    sense: str
    rhs: int
    args: Tuple[str, ...] = ()

    def activity(self, assignment: Mapping[str, int]) -> int:
        return sum(c * assignment.get(name, 0) for name, c in self.terms)

    def holds(self, assignment: Mapping[str, int]) -> bool:
        lhs = self.activity(assignment)
        if self.sense == ">=":
            return lhs >= self.rhs
        if self.sense == "<=":
            return lhs <= self.rhs
        return lhs == self.rhs

    def variables(self) -> List[str]:
        return [name for name, _ in self.terms]

    def render(self) -> str:
        lhs = " ".join(f"{'+' if c > 0 else '-'} {abs(c)} {name}" for name, c in self.terms) or "0"
        return f"{self.tag}({','.join(self.args)}): {lhs} {self.sense} {self.rhs}"

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "args": list(self.args),
            "terms": [[name, c] for name, c in self.terms],
            "sense": self.sense,
            "rhs": self.rhs,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Row":
        try:
            row = cls(
                tag=str(data["tag"]),
                terms=tuple((str(name), int(c)) for name, c in data["terms"]),
                sense=str(data["sense"]),
                rhs=int(data["rhs"]),
                args=tuple(str(a) for a in data.get("args", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptCertificate(f"malformed constraint row {data!r}") from e
        if row.sense not in SENSES:
            raise CorruptCertificate(f"Unknown row sense: {row.sense}. Available: {', '.join(SENSES)}")
        return row


def _row(tag: str, coefs: Dict[str, int], sense: str, rhs: int, args: Iterable[str]) -> Row:
    terms = tuple(sorted((name, c) for name, c in coefs.items() if c != 0))
    return Row(tag, terms, sense, rhs, tuple(args))


def _add(coefs: Dict[str, int], name: str, c: int) -> None:
    coefs[name] = coefs.get(name, 0) + c


def votes_ranking_first(c: int, m: int) -> List[Vote]:
    rest = [d for d in range(m) if d != c]
    return [Vote((c,) + p) for p in permutations(rest)]


def row_fix(v: Vote) -> Row:
    return _row("C1", {x_var(v): 1}, "==", 1, [v.key()])


def row_ub(votes: Iterable[Vote], m: int) -> Row:
    return _row("C2", {x_var(v): 1 for v in votes}, "<=", ub(m), [])


def row_implied(u: Vote, v: Vote) -> Row:
    coefs: Dict[str, int] = {}
    _add(coefs, x_var(u), -1)
    _add(coefs, x_var(v), -1)
    for w in implied_neighbor_step(u, v):
        _add(coefs, x_var(w), 1)
    return _row("C3", coefs, ">=", -1, [u.key(), v.key()])


def row_first(c: int, m: int) -> Row:
    return _row("C4", {x_var(v): 1 for v in votes_ranking_first(c, m)}, ">=", 1, [str(c)])


def row_iota(v: Vote) -> Row:
    return _row("C5", {x_var(v): 1, iota_var(v): -1}, ">=", 0, [v.key()])


def row_outer_count(votes: Iterable[Vote], m: int) -> Row:
    coefs: Dict[str, int] = {}
    for v in votes:
        coefs[x_var(v)] = 1
        coefs[iota_var(v)] = -1
    return _row("C6", coefs, "<=", 2 * comb(m, 2), [])


def row_no_reverse(v: Vote) -> Row:
    u = min(v, reverse(v), key=Vote.key)
    return _row("C7", {iota_var(u): 1, iota_var(reverse(u)): 1}, "<=", 1, [u.key()])


def row_reverse_exists(v: Vote) -> Row:
    return _row("C8", {x_var(v): -1, iota_var(v): 1, x_var(reverse(v)): 1}, ">=", 0, [v.key()])


def row_reverse_outer(v: Vote) -> Row:
    return _row("C9", {x_var(v): -1, iota_var(v): 1, iota_var(reverse(v)): -1}, ">=", -1, [v.key()])


def row_degree(v: Vote) -> Row:
    coefs = {x_var(w): 1 for w in adjacent_votes(v)}
    coefs[x_var(v)] = -2
    coefs[iota_var(v)] = -1
    return _row("C10", coefs, ">=", 0, [v.key()])


def row_window(v: Vote) -> Row:
    return _row("C11", {x_var(v): -1, iota_var(v): 1, y_var(v): 1}, ">=", 0, [v.key()])


def _outer_neighbours(v: Vote) -> Dict[str, int]:
    coefs: Dict[str, int] = {}
    for w in adjacent_votes(v):
        coefs[x_var(w)] = 1
        coefs[iota_var(w)] = -1
    return coefs


def row_outer_lower(v: Vote) -> Row:
    coefs = _outer_neighbours(v)
    coefs[y_var(v)] = -2
    return _row("D2", coefs, ">=", 0, [v.key()])


def row_outer_upper(v: Vote, m: int) -> Row:
    coefs = _outer_neighbours(v)
    coefs[y_var(v)] = m - 3
    return _row("D3", coefs, "<=", m - 1, [v.key()])


def rows_product(factors: Iterable[Vote]) -> List[Row]:
    """
    Linearisation of p = AND of the factors' x variables.

    Two factors: H1 rows p <= x_u, p <= x_v, p >= x_u + x_v - 1.
    Longer products: H2 rows p <= x_i, one H3 row p >= sum x_i - (k - 1).
    """
    factors = sorted(set(factors), key=Vote.key)
    p = product_var(factors)
    k = len(factors)
    upper_tag, lower_tag = ("H1", "H1") if k == 2 else ("H2", "H3")
    rows = [
        _row(upper_tag, {x_var(f): 1, p: -1}, ">=", 0, [p, f.key()])
        for f in factors
    ]
    lower = {x_var(f): -1 for f in factors}
    lower[p] = 1
    rows.append(_row(lower_tag, lower, ">=", 1 - k, [p]))
    return rows


# =============================================================================
# PRODUCT FAMILIES
# =============================================================================

FamilyKey = Tuple[str, Tuple[str, ...]]


def family_bound(tag: str, m: int) -> int:
    if tag == "C12":
        return comb(m - 2, 2) + m - 1
    return 1


def _adjacent(v: Vote, a: int, b: int) -> bool:
    return abs(v.index(a) - v.index(b)) == 1


def _window(v: Vote, i: int) -> Tuple[Vote, ...]:
    """The six orderings of positions i, i+1, i+2 of v, everything else fixed."""
    r = v.ranking
    return tuple(Vote(r[:i] + p + r[i + 3:]) for p in permutations(r[i:i + 3]))


def family_members(
    votes: Set[Vote],
    m: int,
    six_cycles: bool = False,
) -> Dict[FamilyKey, Set[Tuple[Vote, ...]]]:
    """
    Product families whose members lie entirely inside `votes`.

    - C12 (a, b): edges {u, u with a and b swapped}
    - C13 (a, b, c, d): 4-cycles v, v·ab, v·cd, v·ab·cd with ab and cd adjacent
    - C14 (a, b, c): the six orderings of a window holding a, b, c
    """
    found: Dict[FamilyKey, Set[Tuple[Vote, ...]]] = {}

    def put(tag: str, args: Tuple[int, ...], members: Iterable[Vote]) -> None:
        member = tuple(sorted(set(members), key=Vote.key))
        found.setdefault((tag, tuple(str(a) for a in args)), set()).add(member)

    for v in votes:
        r = v.ranking
        for i in range(m - 1):
            w = swap_adjacent(v, i)
            if w in votes:
                put("C12", tuple(sorted(r[i:i + 2])), (v, w))
            for j in range(i + 2, m - 1):
                cycle = (v, w, swap_adjacent(v, j), swap_adjacent(w, j))
                if all(u in votes for u in cycle):
                    put("C13", _split_args(r[i], r[i + 1], r[j], r[j + 1]), cycle)
        if six_cycles:
            for i in range(m - 2):
                window = _window(v, i)
                if all(u in votes for u in window):
                    put("C14", tuple(sorted(r[i:i + 3])), window)
    return found


def _split_args(a: int, b: int, c: int, d: int) -> Tuple[int, int, int, int]:
    first, second = sorted([tuple(sorted((a, b))), tuple(sorted((c, d)))])
    return first + second


def is_family_member(tag: str, args: Tuple[str, ...], factors: List[Vote]) -> bool:
    """Whether `factors` form one member of family (tag, args)."""
    try:
        ids = [int(a) for a in args]
    except ValueError:
        return False
    members = set(factors)
    if tag == "C12" and len(ids) == 2 and len(members) == 2:
        u, w = factors
        a, b = ids
        return _adjacent(u, a, b) and swap_adjacent(u, min(u.index(a), u.index(b))) == w
    if tag == "C13" and len(ids) == 4 and len(members) == 4:
        a, b, c, d = ids
        for v in factors:
            if _adjacent(v, a, b) and _adjacent(v, c, d):
                i = min(v.index(a), v.index(b))
                j = min(v.index(c), v.index(d))
                w = swap_adjacent(v, i)
                if {v, w, swap_adjacent(v, j), swap_adjacent(w, j)} == members:
                    return True
        return False
    if tag == "C14" and len(ids) == 3 and len(members) == 6:
        v = factors[0]
        positions = sorted(v.index(c) for c in ids)
        if positions[2] - positions[0] != 2:
            return False
        return set(_window(v, positions[0])) == members
    return False


# =============================================================================
# MODEL
# =============================================================================

@dataclass
class ZeroOneProblem:
    """Flat view handed to the solvers."""
    variables: List[str]
    rows: List[Row]
    objective: List[str] = field(default_factory=list)  # minimised, coefficient 1 each


class RegionModel:
    """
    Growing 0/1 model over the rankings of m candidates.

    Rows whose terms are fixed are stored once; two rows with the same tag
    and coefficients count as one even when their args differ. C2 and C6
    are aggregates and the product families C12-C14 keep growing member
    lists; both are materialised over the variables that exist when rows() is called.
    """

    def __init__(self, m: int, six_cycles: bool = False):
        self.m = m
        self.six_cycles = six_cycles
        self._votes: Dict[Vote, None] = {}
        self._products: Dict[str, Tuple[Vote, ...]] = {}
        self._rows: Dict[Row, None] = {}
        self._row_keys: Set[Tuple] = set()
        self._aggregates: Dict[str, None] = {}
        self._families: Dict[FamilyKey, Dict[str, None]] = {}

    def __contains__(self, v: Vote) -> bool:
        return v in self._votes

    @property
    def votes(self) -> List[Vote]:
        return list(self._votes)

    @property
    def products(self) -> Dict[str, Tuple[Vote, ...]]:
        return dict(self._products)

    def add_vote(self, v: Vote) -> bool:
        """Create x_v, i_v and y_v with their local rows C5 and C11."""
        if v in self._votes:
            return False
        if len(v) != self.m:
            raise ValueError(f"vote {v.key()} does not rank {self.m} candidates")
        self._votes[v] = None
        self._store(row_iota(v))
        self._store(row_window(v))
        return True

    def add_product(self, factors: Iterable[Vote]) -> str:
        factors = tuple(sorted(set(factors), key=Vote.key))
        name = product_var(factors)
        if name not in self._products:
            for f in factors:
                self.add_vote(f)
            self._products[name] = factors
            for row in rows_product(factors):
                self._store(row)
        return name

    def _ensure_variables(self, row: Row) -> None:
        for name in row.variables():
            kind, votes = parse_var(name)
            if kind == "p":
                self.add_product(votes)
            else:
                self.add_vote(votes[0])

    def _store(self, row: Row) -> bool:
        key = (row.tag, row.terms, row.sense, row.rhs)
        if key in self._row_keys:
            return False
        self._row_keys.add(key)
        self._rows[row] = None
        return True

    def add_row(self, row: Row) -> bool:
        """Add a fixed row, creating every variable it mentions. False if already present."""
        if (row.tag, row.terms, row.sense, row.rhs) in self._row_keys:
            return False
        self._ensure_variables(row)
        return self._store(row)

    def add_aggregate(self, tag: str) -> bool:
        if tag not in AGGREGATE_TAGS:
            raise ValueError(f"Unknown aggregate row: {tag}. Available: {', '.join(AGGREGATE_TAGS)}")
        if tag in self._aggregates:
            return False
        self._aggregates[tag] = None
        return True

    def add_family(self, key: FamilyKey, members: Iterable[Tuple[Vote, ...]]) -> bool:
        """Activate a product family and attach members; True when anything changed."""
        tag = key[0]
        if tag not in FAMILY_TAGS:
            raise ValueError(f"Unknown product family: {tag}. Available: {', '.join(FAMILY_TAGS)}")
        products = self._families.get(key)
        changed = products is None
        if products is None:
            products = self._families[key] = {}
        for member in members:
            name = self.add_product(member)
            if name not in products:
                products[name] = None
                changed = True
        return changed

    def aggregate_row(self, tag: str) -> Row:
        if tag == "C2":
            return row_ub(self._votes, self.m)
        return row_outer_count(self._votes, self.m)

    def family_row(self, key: FamilyKey) -> Row:
        tag, args = key
        terms = {name: 1 for name in self._families.get(key, {})}
        return _row(tag, terms, "<=", family_bound(tag, self.m), args)

    def rows(self) -> List[Row]:
        rows = list(self._rows)
        rows.extend(self.aggregate_row(tag) for tag in self._aggregates)
        rows.extend(self.family_row(key) for key in self._families)
        return rows

    def variables(self) -> List[str]:
        names = []
        for v in sorted(self._votes, key=Vote.key):
            names.extend((x_var(v), iota_var(v), y_var(v)))
        names.extend(sorted(self._products))
        return names

    def objective(self) -> List[str]:
        return [x_var(v) for v in sorted(self._votes, key=Vote.key)]

    def problem(self) -> ZeroOneProblem:
        return ZeroOneProblem(self.variables(), self.rows(), self.objective())

    def violated(self, assignment: Mapping[str, int]) -> List[Row]:
        return [row for row in self.rows() if not row.holds(assignment)]

    def stats(self) -> Dict[str, int]:
        counts: Dict[str, int] = {"votes": len(self._votes), "products": len(self._products)}
        for row in self.rows():
            counts[row.tag] = counts.get(row.tag, 0) + 1
        return counts


def build_base_model(e: Election, six_cycles: bool = False) -> RegionModel:
    """
    The starting model over the election's own votes.

    Variables exist for v ∈ V only. Rows: C1, C2, C5, C11, the reverse
    rows C7-C9 for votes whose reverse is also in V, and the product
    families already realised inside V. C8 and C10 for other votes need
    variables outside V and are left to the audit, which creates them.

    Raises:
        TooFewCandidates: Fewer than four candidates
    """
    if e.m < 4:
        raise TooFewCandidates(f"the region model needs at least 4 candidates, got {e.m}")
    model = RegionModel(e.m, six_cycles=six_cycles)
    for v in e.votes:
        model.add_vote(v)
        model.add_row(row_fix(v))
    model.add_aggregate("C2")

    present = set(e.votes)
    for v in e.votes:
        if reverse(v) in present:
            model.add_row(row_no_reverse(v))
            model.add_row(row_reverse_exists(v))
            model.add_row(row_reverse_outer(v))

    for key, members in sorted(family_members(present, e.m, six_cycles).items()):
        model.add_family(key, members)

    logger.debug("base model: %s", model.stats())
    return model


def expected_rows(row: Row, m: int) -> Optional[List[Row]]:
    """
    Rebuild the fixed rows a tag and its args stand for.

    Returns None for tags that are checked structurally (aggregates and
    product families).
    """
    tag, args = row.tag, row.args
    try:
        votes = [Vote.from_key(a) for a in args] if tag in _VOTE_ARG_TAGS else []
    except ValueError as e:
        raise CorruptCertificate(f"bad vote key in {row.render()}") from e
    for v in votes:
        if len(v) != m:
            raise CorruptCertificate(f"{row.render()} ranks {len(v)} candidates, expected {m}")

    if tag == "C1":
        return [row_fix(votes[0])]
    if tag == "C3":
        if len(votes) != 2 or votes[0] == votes[1]:
            raise CorruptCertificate(f"{row.render()} needs two different votes")
        return [row_implied(votes[0], votes[1])]
    if tag == "C4":
        try:
            (c,) = [int(a) for a in args]
        except ValueError as e:
            raise CorruptCertificate(f"{row.render()} must name one candidate id") from e
        if not 0 <= c < m:
            raise CorruptCertificate(f"{row.render()} names candidate {c} outside 0..{m - 1}")
        return [row_first(c, m)]
    builders = {
        "C5": row_iota, "C7": row_no_reverse, "C8": row_reverse_exists,
        "C9": row_reverse_outer, "C10": row_degree, "C11": row_window,
        "D2": row_outer_lower,
    }
    if tag in builders:
        return [builders[tag](votes[0])]
    if tag == "D3":
        return [row_outer_upper(votes[0], m)]
    if tag in ("H1", "H2", "H3"):
        _, factors = parse_var(args[0])
        if any(len(f) != m for f in factors) or len(set(factors)) < 2:
            raise CorruptCertificate(f"{row.render()} has a malformed product")
        return rows_product(factors)
    return None


_VOTE_ARG_TAGS = {"C1", "C3", "C5", "C7", "C8", "C9", "C10", "C11", "D2", "D3"}
