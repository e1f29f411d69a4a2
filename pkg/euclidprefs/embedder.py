"""
Search for planar embeddings and verify them.

The feasibility system asks for points of all candidates and voters in a
box such that, for every vote v and consecutive pair a >_v b,

    |v - a|^2 + eps* <= |v - b|^2

Consecutive pairs are enough: the margin chains along the ranking, so
every full pair then holds strictly. verify_embedding always checks all
pairs. Failing to find an embedding is never evidence against one.
"""

import logging
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import regex
from scipy.optimize import minimize

from .election import Election
from .errors import MissingPoint, SolverFailure

logger = logging.getLogger(__name__)

# Internal target margin relative to eps*, leaves room for rounding
INNER_MARGIN = 1.05

EMBEDDING_LINE = regex.compile(r"^\s*(candidate|voter)\s+(\S+)\s+(\S+)\s+(\S+)\s*$")


# =============================================================================
# SYSTEM
# =============================================================================

@dataclass
class QcpSystem:
    """
    Points 0..m-1 are candidates, m..m+n-1 the distinct votes.

    Each row (v, a, b) reads |p_v - p_a|^2 + eps_star <= |p_v - p_b|^2.
    """
    m: int
    n: int
    eps_star: float
    box: Tuple[float, float]
    rows: np.ndarray            # int array, shape (k, 3)

    @property
    def num_points(self) -> int:
        return self.m + self.n

    @property
    def num_box_rows(self) -> int:
        return 2 * self.num_points

    def bounds(self) -> List[Tuple[float, float]]:
        bx, by = self.box
        return [(-bx, bx), (-by, by)] * self.num_points

    def residuals(self, points: np.ndarray, eps: Optional[float] = None) -> np.ndarray:
        """lhs - rhs of every row; a row holds when its residual is <= 0."""
        eps = self.eps_star if eps is None else eps
        if len(self.rows) == 0:
            return np.zeros(0)
        v, a, b = points[self.rows[:, 0]], points[self.rows[:, 1]], points[self.rows[:, 2]]
        return ((v - a) ** 2).sum(axis=1) - ((v - b) ** 2).sum(axis=1) + eps

    def penalty(self, flat: np.ndarray, eps: Optional[float] = None) -> Tuple[float, np.ndarray]:
        """Squared hinge sum and its gradient."""
        points = flat.reshape(self.num_points, 2)
        grad = np.zeros_like(points)
        if len(self.rows) == 0:
            return 0.0, grad.ravel()
        h = np.maximum(self.residuals(points, eps), 0.0)
        iv, ia, ib = self.rows[:, 0], self.rows[:, 1], self.rows[:, 2]
        v, a, b = points[iv], points[ia], points[ib]
        w = (2.0 * h)[:, None]
        np.add.at(grad, iv, w * 2.0 * (b - a))
        np.add.at(grad, ia, w * 2.0 * (a - v))
        np.add.at(grad, ib, w * 2.0 * (v - b))
        return float((h ** 2).sum()), grad.ravel()


def build_qcp(
    e: Election,
    eps_star: float = 1.0,
    box: Tuple[float, float] = (100.0, 100.0),
    full_pairs: bool = False,
) -> QcpSystem:
    """
    One row per (vote, consecutive pair); all ordered pairs with full_pairs.

    Example:
        Four candidates and one vote give 3 rows and 10 box rows.
    """
    if eps_star <= 0:
        raise ValueError(f"eps_star must be positive, got {eps_star}")
    if box[0] <= 0 or box[1] <= 0:
        raise ValueError(f"box must be positive, got {box}")
    rows = []
    for i, v in enumerate(e.votes):
        r = v.ranking
        if full_pairs:
            rows.extend((e.m + i, r[j], r[k]) for j in range(len(r)) for k in range(j + 1, len(r)))
        else:
            rows.extend((e.m + i, r[j], r[j + 1]) for j in range(len(r) - 1))
    return QcpSystem(
        m=e.m,
        n=e.n,
        eps_star=float(eps_star),
        box=(float(box[0]), float(box[1])),
        rows=np.array(rows, dtype=int).reshape(-1, 3),
    )


# =============================================================================
# EMBEDDING
# =============================================================================

@dataclass
class Embedding:
    """Candidate points by name and one point per distinct vote."""
    candidates: Dict[str, Tuple[float, float]]
    voters: List[Tuple[float, float]]
    achieved_margin: float = 0.0

    def points(self, e: Election) -> np.ndarray:
        """(m + n, 2) array in candidate order, then vote order."""
        missing = [c for c in e.candidates if c not in self.candidates]
        if missing:
            raise MissingPoint(f"no point for candidates {missing}")
        if len(self.voters) < e.n:
            raise MissingPoint(f"points for {len(self.voters)} votes, the election has {e.n}")
        rows = [self.candidates[c] for c in e.candidates] + list(self.voters[:e.n])
        return np.array(rows, dtype=float).reshape(-1, 2)

    def scaled(self, factor: float) -> "Embedding":
        return Embedding(
            candidates={c: (x * factor, y * factor) for c, (x, y) in self.candidates.items()},
            voters=[(x * factor, y * factor) for x, y in self.voters],
            achieved_margin=self.achieved_margin * factor * factor,
        )

    def rounded(self, digits: int = 12) -> "Embedding":
        def r(t: float) -> float:
            return float(f"{t:.{digits}g}")
        return Embedding(
            candidates={c: (r(x), r(y)) for c, (x, y) in self.candidates.items()},
            voters=[(r(x), r(y)) for x, y in self.voters],
            achieved_margin=self.achieved_margin,
        )

    def to_dict(self) -> dict:
        return {
            "candidates": {c: [x, y] for c, (x, y) in self.candidates.items()},
            "voters": [[x, y] for x, y in self.voters],
            "achieved_margin": self.achieved_margin,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Embedding":
        return cls(
            candidates={str(c): (float(p[0]), float(p[1])) for c, p in data["candidates"].items()},
            voters=[(float(p[0]), float(p[1])) for p in data["voters"]],
            achieved_margin=float(data.get("achieved_margin", 0.0)),
        )

    @classmethod
    def from_points(cls, e: Election, points: np.ndarray) -> "Embedding":
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        emb = cls(
            candidates={c: (float(points[k, 0]), float(points[k, 1])) for k, c in enumerate(e.candidates)},
            voters=[(float(points[e.m + i, 0]), float(points[e.m + i, 1])) for i in range(e.n)],
        )
        emb.achieved_margin = achieved_margin(e, emb)
        return emb


@dataclass
class VerificationResult:
    accepted: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.accepted


def _sorted_distances(e: Election, points: np.ndarray) -> np.ndarray:
    """Row i: squared distances from vote i to its candidates in ranking order."""
    cand = points[:e.m]
    out = np.zeros((e.n, e.m))
    for i, v in enumerate(e.votes):
        d = ((cand - points[e.m + i]) ** 2).sum(axis=1)
        out[i] = d[list(v.ranking)]
    return out


def achieved_margin(e: Election, emb: Embedding) -> float:
    """Smallest squared-distance gap over all votes and ranked pairs."""
    if e.m < 2 or e.n == 0:
        return float("inf")
    d = _sorted_distances(e, emb.points(e))
    return float(np.diff(d, axis=1).min())


def unsquared_epsilon(e: Election, emb: Embedding) -> float:
    """Smallest plain-distance gap, the scattering an accepted embedding actually has."""
    if e.m < 2 or e.n == 0:
        return float("inf")
    d = np.sqrt(_sorted_distances(e, emb.points(e)))
    return float(np.diff(d, axis=1).min())


def rescale_to_margin(e: Election, emb: Embedding, eps_star: float = 1.0) -> Embedding:
    """Scale by some factor >= 1 so the squared margin reaches eps_star."""
    margin = achieved_margin(e, emb)
    if margin <= 0:
        raise ValueError(f"embedding has margin {margin}; only accepted embeddings can be rescaled")
    if margin >= eps_star:
        return emb.scaled(1.0)
    # the squared margin grows with the square of the factor
    factor = float(np.sqrt(eps_star / margin)) * (1 + 1e-9)
    return emb.scaled(factor)


def verify_embedding(e: Election, emb: Embedding, tolerance: float = 0.0) -> VerificationResult:
    """
    Check every ordered pair of every vote and injectivity.

    A pair a >_v b passes when |v-a|^2 < |v-b|^2 and the gap is at least
    `tolerance`.

    Raises:
        MissingPoint: The embedding lacks a candidate or a voter
    """
    points = emb.points(e)
    violations = []

    unique = np.unique(points, axis=0)
    if len(unique) != len(points):
        violations.append(f"{len(points) - len(unique)} points coincide with another point")

    cand = points[:e.m]
    for i, v in enumerate(e.votes):
        d = ((cand - points[e.m + i]) ** 2).sum(axis=1)
        r = v.ranking
        for j in range(len(r)):
            for k in range(j + 1, len(r)):
                gap = d[r[k]] - d[r[j]]
                if not (gap > 0 and gap >= tolerance):
                    violations.append(
                        f"vote {i} ({e.format_vote(v)}): {e.name(r[j])} over {e.name(r[k])} "
                        f"has squared gap {gap:.6g}"
                    )
    return VerificationResult(not violations, violations)


def embedding_block(e: Election, emb: Embedding) -> str:
    """One "<kind> <id> <x> <y>" line per candidate and distinct vote."""
    lines = [f"candidate {c} {float(x)!r} {float(y)!r}" for c, (x, y) in ((c, emb.candidates[c]) for c in e.candidates)]
    lines.extend(f"voter {i} {float(x)!r} {float(y)!r}" for i, (x, y) in enumerate(emb.voters))
    return "\n".join(lines) + "\n"


def parse_embedding_block(text: str) -> Embedding:
    candidates: Dict[str, Tuple[float, float]] = {}
    voters: Dict[int, Tuple[float, float]] = {}
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        match = EMBEDDING_LINE.match(line)
        if not match:
            raise ValueError(f"line {n}: expected '<kind> <id> <x> <y>', got {line!r}")
        kind, ident, x, y = match.groups()
        try:
            point = (float(x), float(y))
        except ValueError as err:
            raise ValueError(f"line {n}: coordinates must be decimal reals") from err
        if kind == "candidate":
            candidates[ident] = point
        else:
            voters[int(ident)] = point
    if voters and sorted(voters) != list(range(len(voters))):
        raise MissingPoint(f"voter ids {sorted(voters)} are not 0..{len(voters) - 1}")
    return Embedding(candidates, [voters[i] for i in range(len(voters))])


# =============================================================================
# SOLVERS
# =============================================================================

def _injective(points: np.ndarray) -> bool:
    return len(np.unique(points, axis=0)) == len(points)


class _SliceOver(Exception):
    """Raised from inside the objective to abandon a restart."""


def _penalty_search(
    e: Election,
    system: QcpSystem,
    budget: float,
    seed: int,
    restarts: int,
    stop: Optional[threading.Event],
) -> Optional[Embedding]:
    rng = np.random.default_rng(seed)
    bx, by = system.box
    bounds = system.bounds()
    inner = system.eps_star * INNER_MARGIN
    started = time.monotonic()

    def over() -> bool:
        return time.monotonic() - started > budget or (stop is not None and stop.is_set())

    def objective(x: np.ndarray, margin: float):
        if over():
            raise _SliceOver
        return system.penalty(x, margin)

    for attempt in range(restarts):
        if over():
            break
        x0 = np.column_stack([
            rng.uniform(-bx, bx, system.num_points),
            rng.uniform(-by, by, system.num_points),
        ]).ravel()
        try:
            res = minimize(
                objective, x0, args=(inner,), jac=True, method="L-BFGS-B", bounds=bounds,
                options={"maxiter": 3000, "ftol": 1e-16, "gtol": 1e-12},
            )
        except _SliceOver:
            logger.debug("restart %d interrupted", attempt + 1)
            break
        points = res.x.reshape(system.num_points, 2)
        if np.any(system.residuals(points) > 0) or not _injective(points):
            continue
        emb = Embedding.from_points(e, points)
        if verify_embedding(e, emb).accepted:
            logger.debug("embedding found on restart %d", attempt + 1)
            return emb
    return None


QCP_TOKEN = regex.compile(r"\b(p[xy]\d+)\b\s+([-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)")


def write_qcp_lp(system: QcpSystem) -> str:
    """The system in LP format with quadratic rows; point k has variables pxk, pyk."""
    lines = ["\\ planar embedding feasibility", "Minimize", " obj: 0 px0", "Subject To"]
    for k, (v, a, b) in enumerate(system.rows):
        # |v-a|^2 - |v-b|^2 = a^2 - b^2 - 2 v.a + 2 v.b
        quad = []
        for axis in ("x", "y"):
            va, aa, ba = f"p{axis}{v}", f"p{axis}{a}", f"p{axis}{b}"
            quad.append(f"{aa} ^2 - {ba} ^2 - 2 {va} * {aa} + 2 {va} * {ba}")
        lines.append(f" q{k}: [ {' + '.join(quad)} ] <= {-system.eps_star!r}")
    lines.append("Bounds")
    bx, by = system.box
    for p in range(system.num_points):
        lines.append(f" {-bx!r} <= px{p} <= {bx!r}")
        lines.append(f" {-by!r} <= py{p} <= {by!r}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _external_search(e: Election, system: QcpSystem, budget: float, command: str) -> Optional[Embedding]:
    with tempfile.TemporaryDirectory(prefix="euclidprefs-") as tmp:
        path = Path(tmp) / "embedding.lp"
        path.write_text(write_qcp_lp(system), encoding="utf-8")
        cmd = shlex.split(command) + [str(path)]
        try:
            completed = subprocess.run(cmd, capture_output=True, text=True, timeout=max(budget, 1.0) + 5.0)
        except subprocess.TimeoutExpired:
            return None
        except OSError as err:
            raise SolverFailure(f"could not run {cmd[0]}: {err}") from err

    out = completed.stdout
    upper = out.upper()
    if "INFEASIBLE" in upper:
        # only bounds this box; the caller escalates
        logger.info("external solver: infeasible within box %s", system.box)
        return None
    if "TIME_LIMIT" in upper:
        return None
    if "OPTIMAL" not in upper:
        raise SolverFailure(f"external:{command} exited with code {completed.returncode} and no status keyword")

    points = np.full((system.num_points, 2), np.nan)
    for token, value in QCP_TOKEN.findall(out):
        axis, k = token[1], int(token[2:])
        if k < system.num_points:
            points[k, 0 if axis == "x" else 1] = float(value)
    if np.isnan(points).any():
        raise SolverFailure(f"external:{command} reported OPTIMAL without every point")
    emb = Embedding.from_points(e, points)
    return emb if verify_embedding(e, emb).accepted else None


def solve_feasibility(
    e: Election,
    system: QcpSystem,
    budget: float,
    seed: int = 0,
    restarts: int = 200,
    solver: str = "builtin",
    stop: Optional[threading.Event] = None,
) -> Optional[Embedding]:
    """
    Try to satisfy the system within `budget` seconds.

    builtin: multi-start squared-hinge minimisation with L-BFGS-B inside
    the box, random starts from a seeded generator. external:<command>:
    the LP bridge. Returns only embeddings that verify_embedding accepts.
    """
    if budget <= 0:
        return None
    if solver == "builtin":
        return _penalty_search(e, system, budget, seed, restarts, stop)
    if solver.startswith("external:"):
        return _external_search(e, system, budget, solver[len("external:"):])
    raise ValueError(f"Unknown embedding solver: {solver}. Available: builtin, external:<command>")


def escalate_embed(
    e: Election,
    budget: float,
    eps_star: float = 1.0,
    box_init: float = 100.0,
    slice_init: float = 10.0,
    box_factor: float = 10.0,
    slice_factor: float = 2.0,
    restarts: int = 200,
    full_pairs: bool = False,
    solver: str = "builtin",
    seed: int = 0,
    stop: Optional[threading.Event] = None,
) -> Optional[Embedding]:
    """
    Grow the box and the time slice each round until an embedding is found.

    Rounds run with (box, slice) = (100, 10s), (1000, 20s), ... by default,
    each slice capped by what is left of `budget`.
    """
    started = time.monotonic()
    box, slice_secs = box_init, slice_init
    round_no = 0
    while True:
        remaining = budget - (time.monotonic() - started)
        if remaining <= 0 or (stop is not None and stop.is_set()):
            return None
        system = build_qcp(e, eps_star, (box, box), full_pairs)
        logger.info("embedding round %d: box %g, slice %.1fs", round_no + 1, box, min(slice_secs, remaining))
        emb = solve_feasibility(e, system, min(slice_secs, remaining), seed + round_no, restarts, solver, stop)
        if emb is not None:
            return emb
        box *= box_factor
        slice_secs *= slice_factor
        round_no += 1
