"""
0/1 solver backends behind one seam.

Backends:
1. builtin  - exact depth-first branch and bound with pseudo-boolean
              propagation, enough for desk-scale region models
2. highs    - scipy.optimize.milp (HiGHS)
3. mip      - python-mip with CBC, when installed
4. external:<command> - writes an LP file and runs <command> <file.lp>

Every backend minimises the sum of the objective variables and reports
one of: infeasible, optimal, feasible (a solution, limit hit before
optimality was proven), timeout (no solution, limit hit).
"""

import hashlib
import logging
import shlex
import subprocess
import tempfile
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import regex
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix

from ..errors import SolverFailure
from .model import RegionModel, Row, ZeroOneProblem

logger = logging.getLogger(__name__)

try:
    import mip
    _MIP_AVAILABLE = True
except ImportError:
    _MIP_AVAILABLE = False
    mip = None

STATUSES = ("infeasible", "optimal", "feasible", "timeout")


@dataclass
class SolveResult:
    status: str                                   # one of STATUSES
    assignment: Dict[str, int] = field(default_factory=dict)
    objective: Optional[int] = None
    solver: str = ""
    nodes: int = 0
    seconds: float = 0.0

    @property
    def has_solution(self) -> bool:
        return self.status in ("optimal", "feasible")


def _as_problem(model: Union[RegionModel, ZeroOneProblem]) -> ZeroOneProblem:
    return model.problem() if isinstance(model, RegionModel) else model


def _normalised(problem: ZeroOneProblem) -> Tuple[Dict[str, int], List[Tuple[List[Tuple[int, int]], int]]]:
    """Variable index plus rows rewritten as sum(coef * var) >= rhs."""
    index = {name: k for k, name in enumerate(problem.variables)}
    for row in problem.rows:
        for name, _ in row.terms:
            if name not in index:
                index[name] = len(index)
    out = []
    for row in problem.rows:
        merged: Dict[int, int] = {}
        for name, c in row.terms:
            merged[index[name]] = merged.get(index[name], 0) + c
        terms = [(j, c) for j, c in merged.items() if c != 0]
        if row.sense in (">=", "=="):
            out.append((terms, row.rhs))
        if row.sense in ("<=", "=="):
            out.append(([(j, -c) for j, c in terms], -row.rhs))
    return index, out


# =============================================================================
# BASE CLASS
# =============================================================================

class ZeroOneSolver(ABC):
    """Minimise the objective count subject to the rows."""

    name = "base"

    @abstractmethod
    def solve(
        self,
        problem: ZeroOneProblem,
        time_limit: Optional[float] = None,
        node_limit: int = 200000,
        stop: Optional[threading.Event] = None,
    ) -> SolveResult:
        pass


# =============================================================================
# BUILTIN BRANCH AND BOUND
# =============================================================================

class _Search:
    """Trail-based propagation state for one solve."""

    def __init__(self, n: int, rows: List[Tuple[List[Tuple[int, int]], int]], objective: List[int]):
        self.n = n
        self.terms = [t for t, _ in rows]
        self.rhs = [r for _, r in rows]
        self.maxact = [sum(max(c, 0) for _, c in t) for t in self.terms]
        self.minact = [sum(min(c, 0) for _, c in t) for t in self.terms]
        self.maxabs = [max((abs(c) for _, c in t), default=0) for t in self.terms]
        self.occurs: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
        for r, t in enumerate(self.terms):
            for j, c in t:
                self.occurs[j].append((r, c))
        self.is_obj = [False] * n
        for j in objective:
            self.is_obj[j] = True
        self.value = [-1] * n
        self.trail: List[int] = []
        self.queue: List[int] = []
        self.ones = 0

    def assign(self, j: int, val: int) -> bool:
        self.value[j] = val
        self.trail.append(j)
        if val and self.is_obj[j]:
            self.ones += 1
        ok = True
        for r, c in self.occurs[j]:
            self.maxact[r] += c * val - max(c, 0)
            self.minact[r] += c * val - min(c, 0)
            if self.maxact[r] < self.rhs[r]:
                ok = False
            self.queue.append(r)
        return ok

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            j = self.trail.pop()
            val = self.value[j]
            for r, c in self.occurs[j]:
                self.maxact[r] -= c * val - max(c, 0)
                self.minact[r] -= c * val - min(c, 0)
            if val and self.is_obj[j]:
                self.ones -= 1
            self.value[j] = -1

    def propagate(self) -> bool:
        while self.queue:
            r = self.queue.pop()
            slack = self.maxact[r] - self.rhs[r]
            if slack < 0:
                self.queue.clear()
                return False
            if slack >= self.maxabs[r] or self.minact[r] >= self.rhs[r]:
                continue
            for j, c in self.terms[r]:
                # forced: the other value would drop maxact below rhs
                if self.value[j] == -1 and abs(c) > slack:
                    if not self.assign(j, 1 if c > 0 else 0):
                        self.queue.clear()
                        return False
        return True

    def pick(self) -> Optional[int]:
        """Unassigned variable in the most open rows; None once every row is satisfied."""
        score: Dict[int, int] = {}
        for r, t in enumerate(self.terms):
            if self.minact[r] >= self.rhs[r]:
                continue
            for j, _ in t:
                if self.value[j] == -1:
                    score[j] = score.get(j, 0) + 1
        if not score:
            return None
        return min(score, key=lambda j: (-score[j], j))


class BuiltinSolver(ZeroOneSolver):
    """
    Depth-first branch and bound.

    Rows are kept as pseudo-boolean constraints sum(c x) >= rhs with
    running max/min activities; a variable whose flip would make the
    row unreachable is fixed (unit propagation generalised to weights).
    Branches on the variable occurring in most open rows, 0 first.
    """

    name = "builtin"

    def solve(self, problem, time_limit=None, node_limit=200000, stop=None) -> SolveResult:
        started = time.monotonic()
        index, rows = _normalised(problem)
        names = sorted(index, key=index.get)
        # ties in pick() fall back to index order: variables sorted by name
        order = sorted(range(len(names)), key=lambda k: names[k])
        remap = {old: new for new, old in enumerate(order)}
        names = [names[k] for k in order]
        rows = [([(remap[j], c) for j, c in t], rhs) for t, rhs in rows]
        objective = [remap[index[v]] for v in problem.objective if v in index]

        search = _Search(len(names), rows, objective)
        search.queue.extend(range(len(rows)))
        if any(not t and rhs > 0 for t, rhs in rows) or not search.propagate():
            return SolveResult("infeasible", solver=self.name, seconds=time.monotonic() - started)

        root_bound = search.ones
        best: Optional[List[int]] = None
        best_obj = None
        nodes = 0
        limited = False
        stack: List[List[int]] = []  # [var, trail mark, value tried]

        while True:
            nodes += 1
            if nodes >= node_limit or (nodes & 255 == 0 and self._expired(started, time_limit, stop)):
                limited = True
                break

            conflict = False
            if best_obj is not None and search.ones >= best_obj:
                conflict = True
            else:
                j = search.pick()
                if j is None:
                    best = [max(v, 0) for v in search.value]
                    best_obj = search.ones
                    if best_obj <= root_bound:
                        break
                    conflict = True
                else:
                    stack.append([j, len(search.trail), 0])
                    if not (search.assign(j, 0) and search.propagate()):
                        search.queue.clear()
                        conflict = True
            if not conflict:
                continue

            resumed = False
            while stack:
                j, mark, tried = stack.pop()
                search.undo(mark)
                search.queue.clear()
                if tried == 0:
                    stack.append([j, mark, 1])
                    if search.assign(j, 1) and search.propagate():
                        resumed = True
                        break
                    search.queue.clear()
            if not resumed:
                break

        seconds = time.monotonic() - started
        logger.debug("builtin solve: %d vars, %d rows, %d nodes, %.3fs", len(names), len(rows), nodes, seconds)
        if best is None:
            status = "timeout" if limited else "infeasible"
            return SolveResult(status, solver=self.name, nodes=nodes, seconds=seconds)
        return SolveResult(
            "feasible" if limited else "optimal",
            assignment={name: best[k] for k, name in enumerate(names)},
            objective=best_obj,
            solver=self.name,
            nodes=nodes,
            seconds=seconds,
        )

    @staticmethod
    def _expired(started: float, time_limit: Optional[float], stop: Optional[threading.Event]) -> bool:
        if stop is not None and stop.is_set():
            return True
        return time_limit is not None and time.monotonic() - started > time_limit


# =============================================================================
# HIGHS (scipy)
# =============================================================================

class HighsSolver(ZeroOneSolver):
    """scipy.optimize.milp; status 2 is infeasible, 1 is a time or node limit."""

    name = "highs"

    def solve(self, problem, time_limit=None, node_limit=200000, stop=None) -> SolveResult:
        started = time.monotonic()
        index, rows = _normalised(problem)
        n = len(index)
        names = sorted(index, key=index.get)
        c = np.zeros(n)
        for v in problem.objective:
            if v in index:
                c[index[v]] = 1.0

        constraints = []
        if rows:
            data, ri, ci = [], [], []
            for r, (terms, _) in enumerate(rows):
                for j, coef in terms:
                    ri.append(r)
                    ci.append(j)
                    data.append(float(coef))
            a = coo_matrix((data, (ri, ci)), shape=(len(rows), n)).tocsr()
            lower = np.array([float(rhs) for _, rhs in rows])
            constraints.append(LinearConstraint(a, lb=lower, ub=np.inf))

        options = {"disp": False, "node_limit": node_limit}
        if time_limit is not None:
            options["time_limit"] = max(float(time_limit), 0.01)
        try:
            res = milp(c, constraints=constraints, integrality=np.ones(n), bounds=Bounds(0, 1), options=options)
        except (ValueError, TypeError) as e:
            raise SolverFailure(f"highs rejected the model: {e}") from e
        seconds = time.monotonic() - started

        if res.status == 2:
            return SolveResult("infeasible", solver=self.name, seconds=seconds)
        if res.x is None:
            if res.status == 1:
                return SolveResult("timeout", solver=self.name, seconds=seconds)
            raise SolverFailure(f"highs returned status {res.status}: {res.message}")
        values = np.rint(res.x).astype(int)
        return SolveResult(
            "optimal" if res.status == 0 else "feasible",
            assignment={name: int(values[k]) for k, name in enumerate(names)},
            objective=int(round(float(c @ values))),
            solver=self.name,
            seconds=seconds,
        )


# =============================================================================
# PYTHON-MIP (optional)
# =============================================================================

class MipSolver(ZeroOneSolver):
    """python-mip with CBC."""

    name = "mip"

    def solve(self, problem, time_limit=None, node_limit=200000, stop=None) -> SolveResult:
        if not _MIP_AVAILABLE:
            raise SolverFailure("python-mip not installed. Run: pip install mip")
        started = time.monotonic()
        index, rows = _normalised(problem)
        names = sorted(index, key=index.get)

        m = mip.Model(sense=mip.MINIMIZE, solver_name=mip.CBC)
        m.verbose = 0
        xs = [m.add_var(var_type=mip.BINARY, name=f"v{k}") for k in range(len(names))]
        m.objective = mip.minimize(mip.xsum(xs[index[v]] for v in problem.objective if v in index))
        for terms, rhs in rows:
            m += mip.xsum(c * xs[j] for j, c in terms) >= rhs

        status = m.optimize(max_seconds=time_limit if time_limit is not None else mip.INF, max_nodes=node_limit)
        seconds = time.monotonic() - started
        if status == mip.OptimizationStatus.INFEASIBLE:
            return SolveResult("infeasible", solver=self.name, seconds=seconds)
        if status in (mip.OptimizationStatus.OPTIMAL, mip.OptimizationStatus.FEASIBLE):
            assignment = {name: int(round(xs[k].x)) for k, name in enumerate(names)}
            return SolveResult(
                "optimal" if status == mip.OptimizationStatus.OPTIMAL else "feasible",
                assignment=assignment,
                objective=sum(assignment.get(v, 0) for v in problem.objective),
                solver=self.name,
                seconds=seconds,
            )
        if status == mip.OptimizationStatus.NO_SOLUTION_FOUND:
            return SolveResult("timeout", solver=self.name, seconds=seconds)
        raise SolverFailure(f"python-mip returned status {status.name}")


# =============================================================================
# EXTERNAL LP BRIDGE
# =============================================================================

LP_TOKEN = regex.compile(r"\b(x_[0-9a-f]{12})\b\s+(?:\S+\s+)?([-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)")
STATUS_KEYWORDS = (("INFEASIBLE", "infeasible"), ("TIME_LIMIT", "timeout"), ("OPTIMAL", "optimal"))


def lp_token(name: str) -> str:
    return "x_" + hashlib.sha1(name.encode("utf-8")).hexdigest()[:12]


def _lp_expression(terms: List[Tuple[str, int]], per_line: int = 8) -> str:
    parts = [f"{'+' if c > 0 else '-'} {abs(c)} {lp_token(name)}" for name, c in terms]
    if not parts:
        parts = [f"+ 0 {lp_token('zero')}"]
    lines = [" ".join(parts[k:k + per_line]) for k in range(0, len(parts), per_line)]
    return "\n   ".join(lines)


def write_lp(problem: ZeroOneProblem) -> str:
    """
    Render the problem in LP format.

    Example:
        Minimize
         obj: + 1 x_3f2a...
        Subject To
         r0: + 1 x_3f2a... >= 1
        Binary
         x_3f2a...
        End
    """
    names = dict.fromkeys(problem.variables)
    for row in problem.rows:
        names.update(dict.fromkeys(name for name, _ in row.terms))
    objective = [(v, 1) for v in problem.objective]
    lines = ["\\ region-status model", "Minimize", f" obj: {_lp_expression(objective)}", "Subject To"]
    for k, row in enumerate(problem.rows):
        sense = {">=": ">=", "<=": "<=", "==": "="}[row.sense]
        lines.append(f" r{k}: {_lp_expression(list(row.terms))} {sense} {row.rhs}")
    lines.append("Binary")
    tokens = [lp_token(n) for n in names]
    if not problem.objective or any(not row.terms for row in problem.rows):
        tokens.append(lp_token("zero"))
    for k in range(0, len(tokens), 8):
        lines.append(" " + " ".join(tokens[k:k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


class ExternalLpSolver(ZeroOneSolver):
    """
    Bridge to any solver that reads an LP file.

    The command is run as `<command> <file.lp>`; its standard output must
    contain one of INFEASIBLE, TIME_LIMIT or OPTIMAL and, for solutions,
    lines pairing each x_<hash> token with its value.
    """

    def __init__(self, command: str):
        if not command.strip():
            raise ValueError("external solver needs a command, e.g. external:highs")
        self.command = command
        self.name = f"external:{command}"

    def solve(self, problem, time_limit=None, node_limit=200000, stop=None) -> SolveResult:
        started = time.monotonic()
        with tempfile.TemporaryDirectory(prefix="euclidprefs-") as tmp:
            path = Path(tmp) / "model.lp"
            path.write_text(write_lp(problem), encoding="utf-8")
            cmd = shlex.split(self.command) + [str(path)]
            try:
                completed = subprocess.run(
                    cmd, capture_output=True, text=True,
                    timeout=None if time_limit is None else max(time_limit, 1.0) + 5.0,
                )
            except subprocess.TimeoutExpired:
                return SolveResult("timeout", solver=self.name, seconds=time.monotonic() - started)
            except OSError as e:
                raise SolverFailure(f"could not run {cmd[0]}: {e}") from e
        seconds = time.monotonic() - started
        return self.parse_output(problem, completed.stdout, completed.returncode, seconds)

    def parse_output(self, problem: ZeroOneProblem, stdout: str, returncode: int = 0, seconds: float = 0.0) -> SolveResult:
        upper = stdout.upper()
        status = next((s for keyword, s in STATUS_KEYWORDS if keyword in upper), None)
        if status is None:
            raise SolverFailure(
                f"{self.name} exited with code {returncode} and no INFEASIBLE/TIME_LIMIT/OPTIMAL status"
            )
        if status != "optimal":
            return SolveResult(status, solver=self.name, seconds=seconds)

        names = list(problem.variables)
        for row in problem.rows:
            names.extend(name for name, _ in row.terms)
        by_token = {lp_token(n): n for n in names}
        values = {}
        for token, value in LP_TOKEN.findall(stdout):
            if token in by_token:
                values[by_token[token]] = int(round(float(value)))
        if not values and names:
            raise SolverFailure(f"{self.name} reported OPTIMAL without variable values")
        assignment = {n: values.get(n, 0) for n in by_token.values()}
        return SolveResult(
            "optimal",
            assignment=assignment,
            objective=sum(assignment.get(v, 0) for v in problem.objective),
            solver=self.name,
            seconds=seconds,
        )


# =============================================================================
# REGISTRY
# =============================================================================

SOLVERS = {
    "builtin": BuiltinSolver,
    "highs": HighsSolver,
    "mip": MipSolver,
}


def get_solver(name: str) -> ZeroOneSolver:
    """
    Get a solver by name.

    Args:
        name: builtin, highs, mip or external:<command>
    """
    if name.startswith("external:"):
        return ExternalLpSolver(name[len("external:"):])
    if name not in SOLVERS:
        raise ValueError(f"Unknown solver: {name}. Available: {', '.join(SOLVERS)}, external:<command>")
    return SOLVERS[name]()


def get_available_solvers() -> dict:
    """Get status of all 0/1 solver backends."""
    return {
        "builtin": True,   # Always available
        "highs": True,     # scipy is a core dependency
        "mip": _MIP_AVAILABLE,
        "external": True,  # depends on the command given
    }


def solve_01(
    model: Union[RegionModel, ZeroOneProblem],
    solver: Union[str, ZeroOneSolver] = "builtin",
    time_limit: Optional[float] = None,
    node_limit: int = 200000,
    stop: Optional[threading.Event] = None,
) -> SolveResult:
    """
    Minimise the objective of a 0/1 model.

    Example:
        >>> problem = ZeroOneProblem(["a", "b"], [Row("T", (("a", 1), ("b", 1)), ">=", 1)], ["a", "b"])
        >>> solve_01(problem).objective
        1
    """
    backend = get_solver(solver) if isinstance(solver, str) else solver
    return backend.solve(_as_problem(model), time_limit=time_limit, node_limit=node_limit, stop=stop)
