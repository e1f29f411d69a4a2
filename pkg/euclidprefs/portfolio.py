"""
Portfolio runner: screen, reduce, then race the lanes under one budget.

    verdict = run_portfolio(election, settings)
    verdict.status   # "Euclidean", "NotEuclidean" or "Unknown"

The coordinator owns the verdict. Lanes poll a shared stop event and the
first definitive outcome wins; when several lanes finish in the same
polling round the one with the highest priority is kept.
"""

import logging
import threading
import time
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .config import Settings
from .election import Election
from .lanes import EUCLIDEAN, NOT_EUCLIDEAN, UNKNOWN, Lane, LaneOutcome, get_lanes
from .reducer import ReductionTrace, reduce_fixpoint, trivial_rule

logger = logging.getLogger(__name__)

POLL_SECONDS = 0.05


@dataclass
class Verdict:
    """Outcome of a portfolio run on one election."""
    status: str                          # EUCLIDEAN, NOT_EUCLIDEAN or UNKNOWN
    kind: Optional[str] = None           # certificate kind; None when Unknown
    payload: Optional[dict] = None
    lane: Optional[str] = None
    trace: ReductionTrace = field(default_factory=ReductionTrace)
    timings: Dict[str, float] = field(default_factory=dict)
    reduced: Optional[Election] = None   # the election the certificate speaks about
    election_digest: str = ""

    @property
    def definitive(self) -> bool:
        return self.status != UNKNOWN


def triviality_screen(e: Election) -> Optional[Verdict]:
    """Euclidean with a Trivial certificate when a size rule applies, else None."""
    rule = trivial_rule(e)
    if rule is None:
        return None
    return Verdict(EUCLIDEAN, "trivial", {"rule": rule}, lane="screen", reduced=e)


def _run_lane(lane: Lane, e: Election, settings: Settings, deadline: float,
              stop: threading.Event) -> Optional[LaneOutcome]:
    """Run one lane; an exception demotes it to no answer."""
    budget = deadline - time.monotonic()
    if budget <= 0 or stop.is_set():
        return None
    logger.info("lane %s started (%.1fs left)", lane.name, budget)
    try:
        outcome = lane.run(e, settings, budget, stop)
    except Exception as err:
        logger.warning("lane %s failed: %s", lane.name, err)
        return None
    logger.info("lane %s finished: %s", lane.name, outcome.status if outcome else "no answer")
    return outcome


def run_portfolio(
    e: Election,
    settings: Optional[Settings] = None,
    lanes: Optional[List[str]] = None,
    budget: Optional[float] = None,
    stop: Optional[threading.Event] = None,
) -> Verdict:
    """
    Decide whether `e` is 2-Euclidean, or give up with Unknown.

    Args:
        e: Election to decide
        settings: Search settings (defaults when None)
        lanes: Lane names; settings.portfolio.lanes when None
        budget: Seconds for the whole run; settings.portfolio.budget when None
        stop: External cancellation; checked by the coordinator

    Returns:
        Verdict whose certificate speaks about `verdict.reduced`
    """
    settings = settings or Settings()
    budget = settings.portfolio.budget if budget is None else budget
    names = settings.portfolio.lanes if lanes is None else lanes
    chosen = get_lanes(names)

    started = time.monotonic()
    deadline = started + budget
    timings: Dict[str, float] = {}
    digest = e.digest()

    verdict = triviality_screen(e)
    timings["screen"] = time.monotonic() - started
    if verdict is not None:
        verdict.timings, verdict.election_digest = timings, digest
        return verdict

    mark = time.monotonic()
    reduced, trace = reduce_fixpoint(e)
    timings["reduce"] = time.monotonic() - mark
    if trace.steps:
        logger.info("reduced to %d candidates, %d distinct votes (%d steps)", reduced.m, reduced.n, len(trace))

    verdict = triviality_screen(reduced)
    if verdict is not None:
        verdict.trace, verdict.timings, verdict.election_digest = trace, timings, digest
        return verdict

    first = [lane for lane in chosen if lane.wave == 1]
    second = [lane for lane in chosen if lane.wave != 1]
    lane_stop = threading.Event()
    winner: Optional[tuple] = None

    # lanes poll lane_stop; shutdown never waits for them
    pool = ThreadPoolExecutor(max_workers=max(len(chosen), 1), thread_name_prefix="lane")
    try:
        pending: Dict[Future, Lane] = {}
        lane_started: Dict[str, float] = {}

        def launch(wave: List[Lane]) -> None:
            for lane in wave:
                lane_started[lane.name] = time.monotonic()
                pending[pool.submit(_run_lane, lane, reduced, settings, deadline, lane_stop)] = lane

        launch(first)
        second_started = False
        while winner is None:
            if not second_started and not any(l.refuter for l in pending.values()):
                launch(second)
                second_started = True
            if not pending:
                break
            remaining = deadline - time.monotonic()
            if remaining <= 0 or (stop is not None and stop.is_set()):
                break
            done, _ = wait(list(pending), timeout=min(remaining, POLL_SECONDS), return_when=FIRST_COMPLETED)
            finished = []
            for future in done:
                lane = pending.pop(future)
                timings[lane.name] = time.monotonic() - lane_started[lane.name]
                outcome = future.result()
                if outcome is not None:
                    finished.append((lane, outcome))
            if finished:
                winner = max(finished, key=lambda pair: pair[0].priority)
    finally:
        lane_stop.set()
        pool.shutdown(wait=False, cancel_futures=True)

    timings["total"] = time.monotonic() - started
    if winner is None:
        logger.info("no lane reached a verdict")
        return Verdict(UNKNOWN, trace=trace, timings=timings, reduced=reduced, election_digest=digest)

    lane, outcome = winner
    logger.info("verdict %s from lane %s", outcome.status, lane.name)
    return Verdict(
        status=outcome.status,
        kind=outcome.kind,
        payload=outcome.payload,
        lane=lane.name,
        trace=trace,
        timings=timings,
        reduced=reduced,
        election_digest=digest,
    )
