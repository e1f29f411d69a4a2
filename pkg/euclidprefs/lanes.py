"""
Portfolio lanes: one search strategy each, run side by side.

Wave 1 starts immediately:
- pattern38: 3-8 pattern scan
- hull: controversity graphs of 4-voter subsets
- closure: forced-neighbour closure against ub(|C|)
- embed: escalating embedding search (the only lane that can say YES)

Wave 2 starts once the wave-1 refuters are done without a verdict:
- hull-full: controversity graphs of all voter subsets up to the cap
- ilp: lazy region-status program over candidate subsets

A lane returns a LaneOutcome or None; None is never evidence either way.
"""

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional

from .config import Settings
from .detectors import find_38, hull_refute
from .election import Election
from .embedder import (
    escalate_embed,
    rescale_to_margin,
    verify_embedding,
)
from .ilp import closure_refute, subset_sweep

logger = logging.getLogger(__name__)

EUCLIDEAN = "Euclidean"
NOT_EUCLIDEAN = "NotEuclidean"
UNKNOWN = "Unknown"


@dataclass
class LaneOutcome:
    """A definitive answer and the payload its checker re-verifies."""
    status: str     # EUCLIDEAN or NOT_EUCLIDEAN
    kind: str       # certificate kind
    payload: dict


class Lane(ABC):
    """Base class for portfolio lanes."""

    name: str = "base"
    kind: str = ""
    priority: int = 0      # breaks ties between lanes finishing together
    wave: int = 1
    refuter: bool = True   # False for the lane that certifies YES

    @abstractmethod
    def run(
        self,
        e: Election,
        settings: Settings,
        budget: float,
        stop: threading.Event,
    ) -> Optional[LaneOutcome]:
        """Search `e` for at most `budget` seconds, polling `stop`."""
        pass


class Pattern38Lane(Lane):
    name = "pattern38"
    kind = "pattern38"
    priority = 6

    def run(self, e, settings, budget, stop):
        cert = find_38(e, stop)
        if cert is None:
            return None
        return LaneOutcome(NOT_EUCLIDEAN, self.kind, cert.to_dict(e))


class HullLane(Lane):
    """Quad mode; needs four distinct votes."""

    name = "hull"
    kind = "hull"
    priority = 5
    mode = "quad"

    def run(self, e, settings, budget, stop):
        if e.n < 4:
            return None
        cert = hull_refute(e, self.mode, settings.hull.max_subset_size, stop)
        if cert is None:
            return None
        return LaneOutcome(NOT_EUCLIDEAN, self.kind, cert.to_dict(e))


class HullFullLane(HullLane):
    name = "hull-full"
    priority = 4
    wave = 2
    mode = "full"


class ClosureLane(Lane):
    name = "closure"
    kind = "closure"
    priority = 3

    def run(self, e, settings, budget, stop):
        witness = closure_refute(e, stop=stop)
        if witness is None:
            return None
        return LaneOutcome(NOT_EUCLIDEAN, self.kind, witness.to_dict(e))


class IlpLane(Lane):
    name = "ilp"
    kind = "ilp"
    priority = 2
    wave = 2

    def run(self, e, settings, budget, stop):
        ilp = settings.ilp
        cert = subset_sweep(
            e,
            budget=budget,
            subset_min=ilp.subset_min,
            max_iterations=ilp.max_iterations,
            solver=ilp.solver,
            six_cycles=ilp.enable_six_cycles,
            node_limit=ilp.node_limit,
            screen_secs=settings.qcp.screen_secs,
            seed=settings.seed,
            stop=stop,
        )
        if cert is None:
            return None
        return LaneOutcome(NOT_EUCLIDEAN, self.kind, cert.to_dict())


class EmbedLane(Lane):
    """
    Escalating embedding search.

    The found embedding is rescaled to margin eps_star; the payload keeps the
    full-precision coordinates and a copy rounded to 12 significant digits
    together with that copy's own verification result.
    """

    name = "embed"
    kind = "embedding"
    priority = 1
    refuter = False

    def run(self, e, settings, budget, stop):
        qcp = settings.qcp
        emb = escalate_embed(
            e,
            budget,
            eps_star=qcp.eps_star,
            box_init=qcp.box_init,
            slice_init=qcp.slice_init_secs,
            box_factor=qcp.box_factor,
            slice_factor=qcp.slice_factor,
            restarts=qcp.restarts,
            full_pairs=qcp.full_pairs,
            solver=qcp.solver,
            seed=settings.seed,
            stop=stop,
        )
        if emb is None:
            return None
        scaled = rescale_to_margin(e, emb, qcp.eps_star)
        if verify_embedding(e, scaled):
            emb = scaled
        rounded = emb.rounded(12)
        check = verify_embedding(e, rounded)
        if not check:
            logger.warning("rounded embedding fails verification: %s", check.violations[0])
        return LaneOutcome(EUCLIDEAN, self.kind, {
            "embedding": emb.to_dict(),
            "rounded": rounded.to_dict(),
            "rounded_verified": check.accepted,
        })


LANES: Dict[str, type] = {
    "pattern38": Pattern38Lane,
    "hull": HullLane,
    "closure": ClosureLane,
    "embed": EmbedLane,
    "hull-full": HullFullLane,
    "ilp": IlpLane,
}


def get_lane(name: str) -> Lane:
    """Get a lane instance by name."""
    if name not in LANES:
        raise ValueError(f"Unknown lane: {name}. Available: {', '.join(LANES.keys())}")
    return LANES[name]()


def get_lanes(names: Optional[List[str]] = None) -> List[Lane]:
    """Lanes by name (all by default), highest priority first."""
    lanes = [get_lane(n) for n in dict.fromkeys(names if names is not None else LANES)]
    return sorted(lanes, key=lambda lane: -lane.priority)
