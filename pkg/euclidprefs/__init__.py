"""
euclidprefs - decide whether a strict-order election is 2-Euclidean.

An election is 2-Euclidean when candidates and voters can be placed in the
plane so that every voter ranks the candidates by increasing distance.

Usage:
    from euclidprefs import load_soc, run_portfolio, verify_certificate

    election = load_soc("00004-00000012.soc")
    verdict = run_portfolio(election)     # Euclidean / NotEuclidean / Unknown

    # ... later, without searching again ...
    assert verify_certificate(election, verdict)

Lanes:
    - "pattern38": the 3-8 forbidden pattern
    - "hull", "hull-full": controversity graphs of voter subsets
    - "closure": forced-neighbour closure against the region count bound
    - "ilp": lazy region-status integer program over candidate subsets
    - "embed": embedding search (the only lane that answers YES)
"""

__version__ = "0.1.0"

from .election import Election, Vote, restrict, restrict_names, select_voters
from .soc import dump_soc, load_soc, parse_soc, save_soc
from .config import Settings, load_settings
from .reducer import ReductionTrace, reduce_fixpoint
from .embedder import Embedding, escalate_embed, verify_embedding
from .portfolio import Verdict, run_portfolio, triviality_screen
from .certificate import load_certificate, save_certificate, verify_certificate

__all__ = [
    "Election",
    "Vote",
    "restrict",
    "restrict_names",
    "select_voters",
    "parse_soc",
    "load_soc",
    "dump_soc",
    "save_soc",
    "Settings",
    "load_settings",
    "ReductionTrace",
    "reduce_fixpoint",
    "Embedding",
    "escalate_embed",
    "verify_embedding",
    "Verdict",
    "run_portfolio",
    "triviality_screen",
    "verify_certificate",
    "save_certificate",
    "load_certificate",
]
