"""
Audit a solver assignment against the rows the lazy model has not written yet.

The assignment's support {v : x_v = 1} is read as a candidate embedding
graph; every family instance it violates is added to the model (creating
the variables it needs) and returned. check_row re-derives a logged row
from its tag and args for certificate verification.
"""

import logging
from math import factorial
from typing import List, Mapping

from ..election import Election, Vote, adjacent_votes, reverse
from ..errors import CorruptCertificate, InfeasibleAssignment
from .closure import implied_neighbor_step
from .model import (
    AGGREGATE_TAGS,
    FAMILY_TAGS,
    RegionModel,
    Row,
    expected_rows,
    family_bound,
    family_members,
    iota_var,
    is_family_member,
    parse_var,
    row_degree,
    row_first,
    row_implied,
    row_no_reverse,
    row_outer_count,
    row_outer_lower,
    row_outer_upper,
    row_reverse_exists,
    row_reverse_outer,
    row_ub,
    x_var,
    y_var,
)

logger = logging.getLogger(__name__)


def generate_violated(e: Election, model: RegionModel, assignment: Mapping[str, int]) -> List[Row]:
    """
    Add every row family instance the assignment violates.

    Args:
        e: Election the model was built for
        model: Lazy model; grows in place
        assignment: Feasible 0/1 solution of the current model

    Returns:
        The rows that were added or extended

    Raises:
        InfeasibleAssignment: The assignment breaks a row already in the model
    """
    broken = model.violated(assignment)
    if broken:
        raise InfeasibleAssignment(
            f"assignment violates {len(broken)} existing rows, first {broken[0].render()}"
        )

    def val(name: str) -> int:
        return 1 if assignment.get(name, 0) else 0

    m = model.m
    support = [v for v in model.votes if val(x_var(v))]
    inside = set(support)
    added: List[Row] = []

    def emit(row: Row) -> None:
        if model.add_row(row):
            added.append(row)

    # C3: some implied vote of every ordered support pair is realised
    for u in support:
        for v in support:
            if u != v and not implied_neighbor_step(u, v) & inside:
                emit(row_implied(u, v))

    # C4 once every vote ranking c first exists
    existing_first = [0] * m
    for v in model.votes:
        existing_first[v.ranking[0]] += 1
    for c in range(m):
        if existing_first[c] == factorial(m - 1) and not any(v.ranking[0] == c for v in support):
            emit(row_first(c, m))

    # C6 as an aggregate over existing variables
    outer = sum(val(x_var(v)) - val(iota_var(v)) for v in model.votes)
    if outer > 2 * (m * (m - 1) // 2) and model.add_aggregate("C6"):
        added.append(model.aggregate_row("C6"))

    for v in support:
        r = reverse(v)
        inner = val(iota_var(v))
        if not inner:
            if not val(x_var(r)):
                emit(row_reverse_exists(v))
            elif val(iota_var(r)):
                emit(row_reverse_outer(v))
        elif r in model and val(iota_var(r)):
            emit(row_no_reverse(v))

        neighbours = adjacent_votes(v)
        if sum(val(x_var(w)) for w in neighbours) < 2 + inner:
            emit(row_degree(v))

        outer_neighbours = sum(val(x_var(w)) - val(iota_var(w)) for w in neighbours)
        y = val(y_var(v))
        if 2 * y > outer_neighbours:
            emit(row_outer_lower(v))
        if outer_neighbours + (m - 3) * y > m - 1:
            emit(row_outer_upper(v, m))

    realised = family_members(inside, m, model.six_cycles)
    if any(len(members) > family_bound(key[0], m) for key, members in realised.items()):
        existing = family_members(set(model.votes), m, model.six_cycles)
        for key, members in sorted(realised.items()):
            if len(members) > family_bound(key[0], m) and model.add_family(key, existing[key]):
                added.append(model.family_row(key))

    logger.debug("audit of %d support votes added %d rows", len(support), len(added))
    return added


def check_row(e: Election, row: Row) -> str:
    """
    Why `row` is not a valid instance of its family over election `e`.

    Returns:
        Empty string when the row is valid
    """
    m = e.m
    if len(set(row.variables())) != len(row.terms):
        return f"{row.render()} repeats a variable"
    try:
        for name in row.variables():
            kind, votes = parse_var(name)
            if any(len(v) != m for v in votes):
                return f"variable {name} does not rank {m} candidates"
        expected = expected_rows(row, m)
    except CorruptCertificate as err:
        return str(err)

    if expected is not None:
        if row not in expected:
            return f"{row.render()} differs from the rebuilt {row.tag} row"
        if row.tag == "C1" and Vote.from_key(row.args[0]) not in set(e.votes):
            return f"{row.render()} fixes a vote that is not in the election"
        return ""

    if row.tag in AGGREGATE_TAGS:
        return _check_aggregate(row, m)
    if row.tag in FAMILY_TAGS:
        return _check_family(row, m)
    return f"Unknown row tag: {row.tag}"


def _check_aggregate(row: Row, m: int) -> str:
    votes = set()
    for name, _ in row.terms:
        votes.add(parse_var(name)[1][0])
    expected = row_ub(votes, m) if row.tag == "C2" else row_outer_count(votes, m)
    if row.args or row != expected:
        return f"{row.render()} is not a {row.tag} sum over whole votes"
    return ""


def _check_family(row: Row, m: int) -> str:
    if row.sense != "<=" or row.rhs != family_bound(row.tag, m):
        return f"{row.render()} has the wrong bound"
    for name, c in row.terms:
        kind, factors = parse_var(name)
        if kind != "p" or c != 1:
            return f"{row.render()} term {name} is not a unit product"
        if not is_family_member(row.tag, row.args, factors):
            return f"{row.render()} term {name} is not in family {row.tag}{row.args}"
    return ""
