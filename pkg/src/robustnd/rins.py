"""Relaxation-induced neighborhood search around an incumbent routing.

Path-assignment variables whose incumbent and root-relaxation values agree
within a tolerance are pinned; the remaining protected model is solved
exactly under a time limit, seeded with the incumbent, and the better of the
two solutions is returned.  The output is therefore never worse than the
incumbent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mip import InternalInconsistencyError, MixedIntegerProgram, solve_mip
from .model import (
    ModelCache,
    Solution,
    evaluate_routing,
    expand_solution,
    routing_from_point,
)
from .tolerances import DEFAULT


class RinsError(Exception):
    pass


@dataclass
class RinsConfig:
    """Fixing tolerance and sub-solve time budget.

    epsilon < 0.5 keeps the two fixing rules mutually exclusive on any
    variable; epsilon = 0 is the classic agree-exactly rule.
    """

    epsilon: float = 0.1
    time_limit: float = 5.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 0.5:
            raise RinsError("epsilon must lie in [0, 0.5)")
        if self.time_limit <= 0:
            raise RinsError("time_limit must be positive")


@dataclass
class RinsResult:
    solution: Solution
    fixed_count: int
    free_count: int
    submip_nodes: int
    submip_status: str
    improvement: float


def compute_fixings(
    incumbent: np.ndarray,
    relaxation: np.ndarray,
    epsilon: float,
    x_cols,
) -> dict[int, float]:
    """Pin the path variables where incumbent and relaxation agree within epsilon.

    Fix to 0 where the incumbent is 0 and the relaxation is at most epsilon;
    fix to 1 where the incumbent is 1 and the relaxation is at least
    1 - epsilon.  Only path-assignment columns are ever fixed.
    """
    tol = DEFAULT.integrality
    out: dict[int, float] = {}
    for col in x_cols:
        bar = incumbent[col]
        lr = relaxation[col]
        if bar <= tol and lr <= epsilon:
            out[col] = 0.0
        elif bar >= 1.0 - tol and lr >= 1.0 - epsilon:
            out[col] = 1.0
    return out


def run_rins(
    instance,
    incumbent: Solution,
    config: RinsConfig,
    cache: ModelCache | None = None,
) -> RinsResult:
    """One exact large-neighborhood pass around the incumbent routing."""
    cache = cache or ModelCache(instance)
    vx = cache.vindex(robust=True)
    rel = cache.relaxation(robust=True)
    if rel.status != "optimal":
        raise RinsError(f"root relaxation is {rel.status}")
    mip = cache.mip(robust=True)

    incumbent_point = expand_solution(instance, incumbent, vx, tolerances=cache.tol)
    x_cols = [col for _, col in vx.x_items()]
    fixings = compute_fixings(incumbent_point, rel.x, config.epsilon, x_cols)
    for col, val in fixings.items():
        if abs(incumbent_point[col] - val) > DEFAULT.integrality:
            raise InternalInconsistencyError(
                "fixing disagrees with the incumbent it was derived from"
            )

    restricted_lp = mip.lp.copy()
    for col, val in fixings.items():
        restricted_lp.set_bounds(col, val, val)
    restricted = MixedIntegerProgram(restricted_lp, mip.integrality, mip.branch_priority)
    result = solve_mip(
        restricted,
        time_limit=config.time_limit,
        incumbent_hint=incumbent_point,
        tolerances=cache.tol,
    )
    if result.x is None:
        # incumbent satisfies every fixing, so the sub-problem cannot be empty
        raise InternalInconsistencyError(
            f"restricted sub-problem came back {result.status} despite a feasible incumbent"
        )

    chosen = incumbent
    if result.objective < incumbent.cost - 1e-12 * max(1.0, abs(incumbent.cost)):
        routing, problems = routing_from_point(vx, result.x, cache.tol)
        if problems:
            raise InternalInconsistencyError("sub-problem returned a non-integral routing")
        candidate = evaluate_routing(instance, routing, vindex=cache.vindex(robust=False))
        if candidate.cost < incumbent.cost:
            candidate.lower_bound = incumbent.lower_bound
            candidate.gap = None
            chosen = candidate
    return RinsResult(
        solution=chosen,
        fixed_count=len(fixings),
        free_count=len(x_cols) - len(fixings),
        submip_nodes=result.node_count,
        submip_status=result.status,
        improvement=incumbent.cost - chosen.cost,
    )
