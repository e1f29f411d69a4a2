"""
Lazy refutation loop and the candidate-subset sweep.

solve -> audit -> extend, until the solver proves the model infeasible
(refuted), the audit finds nothing (unknown), or the iteration cap or
budget runs out (unknown). A feasible model never says the election is
2-Euclidean.
"""

import logging
import threading
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional

from ..election import Election, restrict, restrict_names
from ..embedder import build_qcp, solve_feasibility
from ..errors import CorruptCertificate, TooFewCandidates
from ..reducer import reduce_fixpoint, trivial_rule
from .audit import check_row, generate_violated
from .model import Row, ZeroOneProblem, build_base_model
from .solvers import solve_01

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 20


@dataclass
class IlpCertificate:
    """The candidate subset and the final row set the solver found infeasible."""
    candidate_subset: List[str]
    rows: List[Row]
    solver: str
    status: str = "infeasible"
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "candidate_subset": list(self.candidate_subset),
            "solver": {"id": self.solver, "status": self.status},
            "iterations": self.iterations,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IlpCertificate":
        try:
            solver = data["solver"]
            return cls(
                candidate_subset=[str(c) for c in data["candidate_subset"]],
                rows=[Row.from_dict(r) for r in data["rows"]],
                solver=str(solver["id"]),
                status=str(solver["status"]),
                iterations=int(data.get("iterations", 0)),
            )
        except (KeyError, TypeError) as e:
            raise CorruptCertificate(f"malformed ILP certificate: {e}") from e


@dataclass
class LazyResult:
    status: str                                  # "refuted" or "unknown"
    certificate: Optional[IlpCertificate] = None
    iterations: int = 0
    reason: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def refuted(self) -> bool:
        return self.status == "refuted"


def lazy_refute(
    e: Election,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    budget: Optional[float] = None,
    solver: str = "builtin",
    six_cycles: bool = False,
    node_limit: int = 200000,
    stop: Optional[threading.Event] = None,
) -> LazyResult:
    """
    Run the lazy constraint loop on the whole election.

    Each solve gets budget / remaining-iterations seconds.

    Raises:
        TooFewCandidates: Fewer than four candidates
        SolverFailure: The backend crashed or reported no status
    """
    if e.m < 4:
        raise TooFewCandidates(f"lazy refutation needs at least 4 candidates, got {e.m}")
    if max_iterations <= 0:
        return LazyResult("unknown", reason="iteration cap is zero")

    started = time.monotonic()
    model = build_base_model(e, six_cycles=six_cycles)
    for iteration in range(1, max_iterations + 1):
        if stop is not None and stop.is_set():
            return LazyResult("unknown", iterations=iteration - 1, reason="stopped")
        time_slice = None
        if budget is not None:
            remaining = budget - (time.monotonic() - started)
            if remaining <= 0:
                return LazyResult("unknown", iterations=iteration - 1, reason="budget exhausted")
            time_slice = remaining / (max_iterations - iteration + 1)

        problem = model.problem()
        result = solve_01(problem, solver, time_limit=time_slice, node_limit=node_limit, stop=stop)
        logger.info(
            "lazy iteration %d: %d variables, %d rows, solver %s",
            iteration, len(problem.variables), len(problem.rows), result.status,
        )
        if result.status == "infeasible":
            cert = IlpCertificate(
                candidate_subset=list(e.candidates),
                rows=problem.rows,
                solver=result.solver,
                iterations=iteration,
            )
            return LazyResult("refuted", cert, iteration, "solver proved infeasibility", model.stats())
        if not result.has_solution:
            return LazyResult("unknown", iterations=iteration, reason="solver time slice exhausted")

        added = generate_violated(e, model, result.assignment)
        if not added:
            return LazyResult(
                "unknown", iterations=iteration,
                reason="assignment satisfies every audited row", stats=model.stats(),
            )
    return LazyResult("unknown", iterations=max_iterations, reason="iteration cap reached", stats=model.stats())


def subset_sweep(
    e: Election,
    budget: Optional[float] = None,
    subset_min: int = 5,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    solver: str = "builtin",
    six_cycles: bool = False,
    node_limit: int = 200000,
    screen_secs: float = 3.0,
    seed: int = 0,
    stop: Optional[threading.Event] = None,
) -> Optional[IlpCertificate]:
    """
    Lazy refutation over candidate subsets of growing size.

    Each subset is reduced and screened first: subsets that are trivially
    2-Euclidean or where a short embedding attempt succeeds are skipped.

    Returns:
        First certificate found, or None (also for fewer than five candidates)
    """
    if e.m < 5:
        logger.info("subset sweep skipped: needs at least 5 candidates, got %d", e.m)
        return None

    started = time.monotonic()

    def remaining() -> Optional[float]:
        return None if budget is None else budget - (time.monotonic() - started)

    seen = set()
    for size in range(max(subset_min, 5), e.m + 1):
        for keep in combinations(range(e.m), size):
            left = remaining()
            if (left is not None and left <= 0) or (stop is not None and stop.is_set()):
                return None
            sub, _ = reduce_fixpoint(restrict(e, keep))
            if sub.candidates in seen or trivial_rule(sub) or sub.m < 4:
                continue
            seen.add(sub.candidates)

            screen = screen_secs if left is None else min(screen_secs, left)
            if solve_feasibility(sub, build_qcp(sub), screen, seed=seed, stop=stop) is not None:
                logger.debug("subset %s embeds, skipped", ",".join(sub.candidates))
                continue

            result = lazy_refute(
                sub, max_iterations=max_iterations, budget=remaining(), solver=solver,
                six_cycles=six_cycles, node_limit=node_limit, stop=stop,
            )
            logger.debug("subset %s: %s (%s)", ",".join(sub.candidates), result.status, result.reason)
            if result.refuted:
                return result.certificate
    return None


VERIFY_SECONDS = 60.0


def verify_ilp_certificate(
    e: Election,
    cert: IlpCertificate,
    node_limit: int = 2000000,
    time_limit: Optional[float] = VERIFY_SECONDS,
) -> List[str]:
    """
    Rebuild every logged row over the certified subset and re-solve.

    A re-solve that hits node_limit or time_limit before proving
    infeasibility rejects the certificate.

    Returns:
        List of problems; empty when the certificate is valid
    """
    unknown = [c for c in cert.candidate_subset if c not in e.candidates]
    if unknown:
        return [f"candidates {unknown} are not in the election"]
    if len(set(cert.candidate_subset)) != len(cert.candidate_subset) or len(cert.candidate_subset) < 4:
        return ["candidate subset needs at least four distinct candidates"]
    sub = restrict_names(e, cert.candidate_subset)

    problems = [p for p in (check_row(sub, row) for row in cert.rows) if p]
    if problems:
        return problems

    names = sorted({name for row in cert.rows for name, _ in row.terms})
    objective = [n for n in names if n.startswith("x.")]
    problem = ZeroOneProblem(names, list(cert.rows), objective)
    result = solve_01(problem, "builtin", time_limit=time_limit, node_limit=node_limit)
    if result.status == "timeout":
        return [f"re-solving the logged rows stopped at the node or time limit after {result.nodes} nodes"]
    if result.status != "infeasible":
        return [f"re-solving the logged rows gives {result.status}, not infeasible"]
    return []
