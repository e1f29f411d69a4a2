"""
Region-status integer program and its lazy refutation loop.

Usage:
    from euclidprefs.ilp import closure_refute, lazy_refute

    witness = closure_refute(e)          # cheap counting pre-check
    result = lazy_refute(e, budget=30)   # refuted / unknown
"""

from .closure import (
    ClosureWitness,
    closure_refute,
    forced_closure,
    forced_neighbor,
    implied_neighbor_step,
    ub,
    verify_closure,
)
from .model import (
    RegionModel,
    Row,
    ZeroOneProblem,
    build_base_model,
    family_members,
    product_var,
    rows_product,
)
from .audit import check_row, generate_violated
from .solvers import (
    SolveResult,
    get_available_solvers,
    get_solver,
    solve_01,
    write_lp,
)
from .refuter import (
    IlpCertificate,
    LazyResult,
    lazy_refute,
    subset_sweep,
    verify_ilp_certificate,
)

__all__ = [
    # Closure
    "ub",
    "implied_neighbor_step",
    "forced_neighbor",
    "forced_closure",
    "closure_refute",
    "verify_closure",
    "ClosureWitness",
    # Model
    "Row",
    "RegionModel",
    "ZeroOneProblem",
    "build_base_model",
    "family_members",
    "product_var",
    "rows_product",
    "generate_violated",
    "check_row",
    # Solvers
    "SolveResult",
    "solve_01",
    "get_solver",
    "get_available_solvers",
    "write_lp",
    # Lazy loop
    "lazy_refute",
    "subset_sweep",
    "verify_ilp_certificate",
    "IlpCertificate",
    "LazyResult",
]
