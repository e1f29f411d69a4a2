"""
Tests for the region-status model, the 0/1 backends and the lazy refuter.

Solver tests use the builtin backend (and HiGHS through scipy, which is
a core dependency); python-mip and external commands are not required.
"""

import pytest
import sys
from dataclasses import replace
from fractions import Fraction
from itertools import combinations, permutations, product
from math import atan2
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from euclidprefs.election import Election, Vote
from euclidprefs.errors import CorruptCertificate, SolverFailure, TooFewCandidates
from euclidprefs.fixtures import closure_example, closure_with_dummy, synthetic_election
from euclidprefs.ilp import (
    IlpCertificate,
    Row,
    ZeroOneProblem,
    build_base_model,
    check_row,
    get_available_solvers,
    get_solver,
    lazy_refute,
    product_var,
    rows_product,
    solve_01,
    subset_sweep,
    verify_ilp_certificate,
    write_lp,
)
from euclidprefs.ilp.audit import generate_violated
from euclidprefs.ilp.closure import ub
from euclidprefs.ilp.model import (
    RegionModel,
    family_bound,
    family_members,
    iota_var,
    is_family_member,
    parse_var,
    row_degree,
    row_first,
    row_fix,
    row_implied,
    row_iota,
    row_no_reverse,
    row_outer_count,
    row_outer_lower,
    row_outer_upper,
    row_reverse_exists,
    row_reverse_outer,
    row_ub,
    row_window,
    x_var,
    y_var,
)
from euclidprefs.ilp.solvers import ExternalLpSolver, lp_token


FACTORS = [Vote((0, 1, 2, 3)), Vote((1, 0, 2, 3)), Vote((0, 1, 3, 2))]


def _problem(*rows):
    return ZeroOneProblem(["a", "b"], list(rows), ["a", "b"])


AT_LEAST_ONE = Row("T", (("a", 1), ("b", 1)), ">=", 1)
NONE_AT_ALL = Row("T", (("a", 1), ("b", 1)), "<=", 0)


# =============================================================================
# MODEL
# =============================================================================

@pytest.mark.parametrize("k", [2, 3])
def test_product_rows_encode_and(k):
    """The rows hold exactly when p equals the AND of its factors."""
    factors = FACTORS[:k]
    rows = rows_product(factors)
    assert len(rows) == k + 1
    assert {r.tag for r in rows} == ({"H1"} if k == 2 else {"H2", "H3"})
    p = product_var(factors)
    for bits in product((0, 1), repeat=k + 1):
        assignment = {x_var(f): b for f, b in zip(factors, bits)}
        assignment[p] = bits[-1]
        expected = bits[-1] == int(all(bits[:-1]))
        assert all(r.holds(assignment) for r in rows) == expected


def test_row_from_dict_rejects_bad_sense():
    data = AT_LEAST_ONE.to_dict()
    assert Row.from_dict(data) == AT_LEAST_ONE
    data["sense"] = "=>"
    with pytest.raises(CorruptCertificate):
        Row.from_dict(data)
    with pytest.raises(CorruptCertificate):
        Row.from_dict({"tag": "C1"})


def test_base_model_on_closure_example():
    """abcd and dcba are each other's reverse; the other four votes are not."""
    model = build_base_model(closure_example())
    stats = model.stats()
    assert stats["votes"] == 6
    assert stats["C1"] == 6
    assert stats["C2"] == 1
    assert stats["C7"] == 1
    assert stats["C8"] == 2
    assert stats["C9"] == 2
    assert len(model.objective()) == 6


def test_six_cycle_family_only_when_enabled():
    """The six orderings of a, b, c above a fixed d form one window family."""
    window = {Vote(p + (3,)) for p in permutations((0, 1, 2))}
    assert ("C14", ("0", "1", "2")) not in family_members(window, 4)
    found = family_members(window, 4, six_cycles=True)
    assert len(found[("C14", ("0", "1", "2"))]) == 1
    member = next(iter(found[("C14", ("0", "1", "2"))]))
    assert is_family_member("C14", ("0", "1", "2"), list(member))
    assert not is_family_member("C14", ("0", "1", "3"), list(member))
    assert ("C12", ("0", "1")) in found


def test_base_model_needs_four_candidates():
    with pytest.raises(TooFewCandidates):
        build_base_model(Election.from_rankings("abc", ["abc", "cba"]))


# =============================================================================
# SOLVERS
# =============================================================================

@pytest.mark.parametrize("solver", ["builtin", "highs"])
def test_solver_statuses(solver):
    result = solve_01(_problem(AT_LEAST_ONE), solver)
    assert result.status == "optimal"
    assert result.objective == 1
    assert result.assignment["a"] + result.assignment["b"] == 1

    assert solve_01(_problem(AT_LEAST_ONE, NONE_AT_ALL), solver).status == "infeasible"


def test_get_solver():
    assert get_solver("builtin").name == "builtin"
    assert isinstance(get_solver("external:highs --quiet"), ExternalLpSolver)
    with pytest.raises(ValueError):
        get_solver("gurobi")
    with pytest.raises(ValueError):
        get_solver("external:")
    available = get_available_solvers()
    assert available["builtin"] and available["highs"]


def test_external_output_parsing():
    solver = ExternalLpSolver("fake")
    problem = _problem(AT_LEAST_ONE)
    stdout = f"Status: OPTIMAL\n{lp_token('a')} 1\n{lp_token('b')} 0\n"
    result = solver.parse_output(problem, stdout)
    assert result.assignment == {"a": 1, "b": 0}
    assert result.objective == 1
    assert solver.parse_output(problem, "model is INFEASIBLE").status == "infeasible"
    assert solver.parse_output(problem, "TIME_LIMIT reached").status == "timeout"
    with pytest.raises(SolverFailure):
        solver.parse_output(problem, "segmentation fault", returncode=139)


def test_write_lp_sections():
    text = write_lp(_problem(AT_LEAST_ONE))
    lines = text.splitlines()
    for section in ("Minimize", "Subject To", "Binary", "End"):
        assert section in lines
    assert lp_token("a") in text
    assert lines.index("Minimize") < lines.index("Subject To") < lines.index("Binary") < lines.index("End")


# =============================================================================
# AUDIT
# =============================================================================

def _assignment(model, values):
    """x, i, y for every model vote; votes missing from `values` are all zero."""
    out = {}
    for v in model.votes:
        x, i, y = values.get(v, (0, 0, 0))
        out.update({x_var(v): x, iota_var(v): i, y_var(v): y})
    return out


def _model_over(votes):
    model = RegionModel(len(votes[0]))
    for v in votes:
        model.add_vote(v)
    return model


def test_audit_writes_implied_row():
    """abcd and cabd are joined only through acbd."""
    e = Election.from_rankings("abcd", ["abcd", "cabd"])
    abcd, cabd = e.votes
    model = _model_over(list(e.votes))
    added = generate_violated(e, model, _assignment(model, {v: (1, 0, 1) for v in e.votes}))
    implied = [r for r in added if r.tag == "C3"]
    assert len(implied) == 1
    assert dict(implied[0].terms) == {x_var(abcd): -1, x_var(cabd): -1, x_var(Vote((0, 2, 1, 3))): 1}
    assert (implied[0].sense, implied[0].rhs) == (">=", -1)
    assert Vote((0, 2, 1, 3)) in model


def test_audit_writes_symmetric_implied_row_once():
    """From abcd towards badc and back both steps land on bacd or abdc."""
    e = Election.from_rankings("abcd", ["abcd", "badc"])
    model = _model_over(list(e.votes))
    added = generate_violated(e, model, _assignment(model, {v: (1, 0, 1) for v in e.votes}))
    implied = [r for r in added if r.tag == "C3"]
    assert len(implied) == 1
    assert {name for name, c in implied[0].terms if c == 1} == {
        x_var(Vote((1, 0, 2, 3))),
        x_var(Vote((0, 1, 3, 2))),
    }
    assert [r for r in model.rows() if r.tag == "C3"] == implied


@pytest.mark.parametrize("count,expected", [(12, False), (13, True)])
def test_audit_outer_count(count, expected):
    """Four candidates have at most 12 unbounded regions."""
    votes = [Vote(p) for p in permutations(range(4))][:count]
    e = Election.from_rankings("abcd", ["".join("abcd"[c] for c in v.ranking) for v in votes])
    model = _model_over(votes)
    added = generate_violated(e, model, _assignment(model, {v: (1, 0, 1) for v in votes}))
    assert any(r.tag == "C6" for r in added) == expected


def test_audit_degree_of_inner_vote():
    """An inner region needs three realised neighbours, an outer one two."""
    v = Vote((0, 1, 2, 3))
    near = [Vote((1, 0, 2, 3)), Vote((0, 2, 1, 3))]
    e = Election.from_rankings("abcd", ["abcd"])
    model = _model_over([v] + near)
    values = {v: (1, 1, 0)}
    values.update({w: (1, 0, 1) for w in near})
    added = generate_violated(e, model, _assignment(model, values))
    assert any(r.tag == "C10" and r.args == (v.key(),) for r in added)
    degree = next(r for r in added if r.tag == "C10" and r.args == (v.key(),))
    assert degree == row_degree(v)

    third = Vote((0, 1, 3, 2))
    model = _model_over([v] + near + [third])
    values[third] = (1, 0, 1)
    added = generate_violated(e, model, _assignment(model, values))
    assert not any(r.tag == "C10" and r.args == (v.key(),) for r in added)


def _bisectors(points):
    """Lines n.p = d on which candidates i < j are equidistant, in pair order."""
    lines = []
    for (xi, yi), (xj, yj) in combinations(points, 2):
        lines.append(((2 * (xj - xi), 2 * (yj - yi)), xj * xj + yj * yj - xi * xi - yi * yi))
    return lines


def _ranking_at(points, p):
    keys = [x * x + y * y - 2 * (p[0] * x + p[1] * y) for x, y in points]
    return Vote(tuple(sorted(range(len(points)), key=keys.__getitem__)))


def _between(directions):
    """A direction strictly inside each angular gap of `directions`."""
    ordered = sorted(directions, key=lambda d: atan2(float(d[1]), float(d[0])))
    out = []
    for k, d in enumerate(ordered):
        f = ordered[(k + 1) % len(ordered)]
        sd, sf = abs(d[0]) + abs(d[1]), abs(f[0]) + abs(f[1])
        out.append((d[0] / sd + f[0] / sf, d[1] / sd + f[1] / sf))
    return out


def _arrangement(points):
    """
    Every ranking a region of the bisector arrangement realises, and the
    unbounded ones. Exact rational arithmetic; every region touches a vertex.
    """
    points = [(Fraction(float(x)), Fraction(float(y))) for x, y in points]
    lines = _bisectors(points)
    realised = set()
    for (n1, d1), (n2, d2) in combinations(lines, 2):
        det = n1[0] * n2[1] - n1[1] * n2[0]
        if det == 0:
            continue
        p = ((d1 * n2[1] - d2 * n1[1]) / det, (n1[0] * d2 - n2[0] * d1) / det)
        side = [n[0] * p[0] + n[1] * p[1] - d for n, d in lines]
        through = [n for (n, _), s in zip(lines, side) if s == 0]
        dirs = _between([t for n in through for t in ((-n[1], n[0]), (n[1], -n[0]))])
        r = Fraction(1)
        for (n, _), s in zip(lines, side):
            if s == 0:
                continue
            for u in dirs:
                dot = abs(n[0] * u[0] + n[1] * u[1])
                if dot:
                    r = min(r, abs(s) / dot / 2)
        for u in dirs:
            realised.add(_ranking_at(points, (p[0] + r * u[0], p[1] + r * u[1])))

    outer = set()
    critical = [t for (n, _) in lines for t in ((-n[1], n[0]), (n[1], -n[0]))]
    for u in _between(critical):
        toward = [u[0] * x + u[1] * y for x, y in points]
        outer.add(Vote(tuple(sorted(range(len(points)), key=lambda k: -toward[k]))))
    return realised, outer


def _truth(realised, outer, names):
    values = {}
    for name in names:
        kind, votes = parse_var(name)
        v = votes[0]
        if kind == "x":
            values[name] = int(v in realised)
        elif kind == "i":
            values[name] = int(v in realised and v not in outer)
        elif kind == "y":
            values[name] = int(v in outer)
        else:
            values[name] = int(all(w in realised for w in votes))
    return values


def _truth_instances():
    for seed in range(50):
        m = 4 + seed % 2
        e, emb = synthetic_election(m, 3 + seed % 4, seed=seed)
        realised, outer = _arrangement([emb.candidates[c] for c in e.candidates])
        yield e, realised, outer


def test_rows_hold_on_planar_arrangements():
    """Every row family is satisfied by the regions of an actual embedding."""
    for e, realised, outer in _truth_instances():
        m = e.m
        assert len(outer) == m * (m - 1)
        assert outer <= realised
        assert set(e.votes) <= realised
        assert len(realised) <= ub(m)

        everything = [Vote(p) for p in permutations(range(m))]
        rows = [row_ub(everything, m), row_outer_count(everything, m)]
        rows += [row_first(c, m) for c in range(m)]
        rows += [row_implied(u, v) for u in realised for v in realised if u != v]
        for v in everything:
            rows += [
                row_iota(v),
                row_window(v),
                row_no_reverse(v),
                row_reverse_exists(v),
                row_reverse_outer(v),
                row_degree(v),
                row_outer_lower(v),
                row_outer_upper(v, m),
            ]
        truth = _truth(realised, outer, {name for row in rows for name in row.variables()})
        broken = [row.render() for row in rows if not row.holds(truth)]
        assert broken == []

        for (tag, args), members in family_members(realised, m, six_cycles=True).items():
            assert len(members) <= family_bound(tag, m), (tag, args)


def test_audited_rows_hold_on_planar_arrangements():
    """Rows the audit writes never cut off the regions of an actual embedding."""
    for e, realised, outer in _truth_instances():
        model = build_base_model(e)
        for _ in range(3):
            result = solve_01(model, "builtin", node_limit=20000)
            assert result.status != "infeasible"
            if result.status != "optimal" or not generate_violated(e, model, result.assignment):
                break
        truth = _truth(realised, outer, model.variables())
        assert [row.render() for row in model.rows() if not row.holds(truth)] == []


# =============================================================================
# LAZY REFUTATION
# =============================================================================

def test_lazy_refute_closure_example():
    e = closure_example()
    result = lazy_refute(e, max_iterations=30)
    assert result.refuted
    cert = result.certificate
    assert cert.candidate_subset == ["a", "b", "c", "d"]
    assert verify_ilp_certificate(e, cert) == []
    again = IlpCertificate.from_dict(cert.to_dict())
    assert verify_ilp_certificate(e, again) == []


def test_tampered_ilp_certificate_rejected():
    e = closure_example()
    cert = lazy_refute(e, max_iterations=30).certificate
    k = next(i for i, row in enumerate(cert.rows) if row.tag == "C1")
    assert check_row(e, cert.rows[k]) == ""
    cert.rows[k] = replace(cert.rows[k], rhs=0)
    assert verify_ilp_certificate(e, cert) != []

    cert = lazy_refute(e, max_iterations=30).certificate
    cert.candidate_subset = ["a", "b", "c", "z"]
    assert verify_ilp_certificate(e, cert) != []

    with pytest.raises(CorruptCertificate):
        IlpCertificate.from_dict({"candidate_subset": ["a"]})


def test_lazy_refute_edge_cases():
    with pytest.raises(TooFewCandidates):
        lazy_refute(Election.from_rankings("abc", ["abc"]))
    assert lazy_refute(closure_example(), max_iterations=0).status == "unknown"


def test_lazy_refute_never_refutes_planar_elections():
    for seed in range(12):
        e, _ = synthetic_election(4 + seed % 2, 3 + seed % 3, seed=seed)
        result = lazy_refute(e, max_iterations=6, budget=3.0, node_limit=20000)
        assert not result.refuted


@pytest.mark.sweep
def test_lazy_refute_never_refutes_planar_elections_sweep():
    for seed in range(300):
        e, _ = synthetic_election(4 + seed % 4, 3 + seed % 5, seed=seed)
        result = lazy_refute(e, max_iterations=6, budget=3.0, node_limit=20000)
        assert not result.refuted, seed


def test_ilp_certificate_needs_a_finished_resolve():
    """Fixing the votes alone leaves a feasible model; a cut-short re-solve proves nothing either."""
    e = closure_example()
    cert = IlpCertificate(list(e.candidates), [row_fix(v) for v in e.votes], solver="builtin")
    assert all(check_row(e, row) == "" for row in cert.rows)

    problems = verify_ilp_certificate(e, cert)
    assert len(problems) == 1 and "not infeasible" in problems[0]

    problems = verify_ilp_certificate(e, cert, node_limit=1, time_limit=0.0)
    assert len(problems) == 1 and "limit" in problems[0]


def test_subset_sweep_finds_reduced_subset():
    cert = subset_sweep(closure_with_dummy(), max_iterations=30, screen_secs=0.5)
    assert cert is not None
    assert cert.candidate_subset == ["a", "b", "c", "d"]
    assert verify_ilp_certificate(closure_with_dummy(), cert) == []


def test_subset_sweep_needs_five_candidates():
    assert subset_sweep(closure_example()) is None


if __name__ == "__main__":
    # Run tests
    pytest.main([__file__, "-v"])
