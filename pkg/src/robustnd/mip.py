"""Branch-and-bound for mixed binary/integer programs over the LP core.

Node selection is best-bound with depth-first plunging until a first
incumbent exists; branching picks the most fractional variable within the
highest branching-priority class, with deterministic index tie-breaking.
Integer variables are split by floor/ceil bound branching.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import INF, Basis, LinearProgram, solve_lp
from .tolerances import DEFAULT, Tolerances

CONTINUOUS, BINARY, INTEGER = 0, 1, 2


class MipError(Exception):
    """Malformed mixed-integer program."""


class InternalInconsistencyError(Exception):
    """An incumbent/bound pair that violates basic sanity (bound > incumbent)."""


@dataclass
class MixedIntegerProgram:
    """A LinearProgram plus integrality marks and branching priorities."""

    lp: LinearProgram
    integrality: np.ndarray  # per variable: CONTINUOUS | BINARY | INTEGER
    branch_priority: np.ndarray | None = None  # higher branches first

    def __post_init__(self) -> None:
        self.integrality = np.asarray(self.integrality, dtype=np.int8)
        if self.integrality.shape[0] != self.lp.num_vars:
            raise MipError("integrality marks do not match variable count")
        if self.branch_priority is None:
            self.branch_priority = np.zeros(self.lp.num_vars, dtype=np.int32)
        else:
            self.branch_priority = np.asarray(self.branch_priority, dtype=np.int32)
        binaries = self.integrality == BINARY
        if np.any(self.lp.lower[binaries] < 0) or np.any(self.lp.upper[binaries] > 1):
            raise MipError("binary variable with bounds outside [0, 1]")

    @property
    def num_vars(self) -> int:
        return self.lp.num_vars

    def int_mask(self) -> np.ndarray:
        return self.integrality != CONTINUOUS


@dataclass
class MipResult:
    status: str  # optimal | feasible | infeasible | time-limit
    x: np.ndarray | None = None
    objective: float | None = None
    bound: float = -INF
    gap: float = INF
    node_count: int = 0
    hint_discarded: bool = False
    bound_log: list[float] = field(default_factory=list)


@dataclass
class _Node:
    entry_bound: float
    depth: int
    seq: int
    lower: np.ndarray
    upper: np.ndarray
    warm: Basis | None = None

    def __lt__(self, other: "_Node") -> bool:
        # best bound first; among equal bounds dive deep (recent) first, which
        # reaches integral points quickly when the relaxation is flat
        return (self.entry_bound, -self.depth, -self.seq) < (
            other.entry_bound,
            -other.depth,
            -other.seq,
        )


def _point_feasible(mip: MixedIntegerProgram, x: np.ndarray, tol: Tolerances) -> bool:
    lp = mip.lp
    if x.shape[0] != lp.num_vars or not np.all(np.isfinite(x)):
        return False
    slack = tol.feas * 10.0
    if np.any(x < lp.lower - slack) or np.any(x > lp.upper + slack):
        return False
    mask = mip.int_mask()
    if np.any(np.abs(x[mask] - np.round(x[mask])) > tol.integrality):
        return False
    for cols, vals, sense, rhs in zip(lp.row_cols, lp.row_vals, lp.row_senses, lp.row_rhs):
        lhs = float(vals @ x[cols])
        scale = max(1.0, float(np.abs(vals).max(initial=1.0)), abs(rhs))
        if sense == "<=" and lhs > rhs + slack * scale:
            return False
        if sense == ">=" and lhs < rhs - slack * scale:
            return False
        if sense == "=" and abs(lhs - rhs) > slack * scale:
            return False
    return True


def _snap(mip: MixedIntegerProgram, x: np.ndarray) -> np.ndarray:
    out = x.copy()
    mask = mip.int_mask()
    out[mask] = np.round(out[mask])
    return out


def solve_mip(
    mip: MixedIntegerProgram,
    time_limit: float | None = None,
    incumbent_hint: np.ndarray | None = None,
    tolerances: Tolerances | None = None,
    node_limit: int | None = None,
) -> MipResult:
    """Best-first branch-and-bound; the returned bound is always valid.

    A feasible ``incumbent_hint`` seeds the incumbent; an infeasible one is
    discarded with ``hint_discarded`` set instead of raising.  On hitting the
    time limit the best incumbent found so far is returned together with the
    current global bound.
    """
    tol = tolerances or DEFAULT
    if time_limit is not None and time_limit <= 0:
        raise MipError("time_limit must be positive")
    deadline = None if time_limit is None else time.monotonic() + time_limit

    incumbent_x: np.ndarray | None = None
    incumbent_obj = INF
    hint_discarded = False
    if incumbent_hint is not None:
        hint = np.asarray(incumbent_hint, dtype=float)
        if _point_feasible(mip, hint, tol):
            incumbent_x = _snap(mip, hint)
            incumbent_obj = float(mip.lp.objective @ incumbent_x)
        else:
            hint_discarded = True

    mask = mip.int_mask()
    int_idx = np.nonzero(mask)[0]
    work = mip.lp.copy()

    seq = 0
    root = _Node(
        entry_bound=-INF,
        depth=0,
        seq=seq,
        lower=mip.lp.lower.copy(),
        upper=mip.lp.upper.copy(),
    )
    heap: list[_Node] = []
    stack: list[_Node] = [root]
    node_count = 0
    reported_bound = -INF
    bound_log: list[float] = []
    timed_out = False
    truncated = False

    def open_bound() -> float:
        vals = [nd.entry_bound for nd in heap] + [nd.entry_bound for nd in stack]
        if not vals:
            return incumbent_obj if incumbent_x is not None else INF
        return min(min(vals), incumbent_obj)

    def note_bound() -> None:
        nonlocal reported_bound
        b = open_bound()
        if b > reported_bound:
            reported_bound = b
        bound_log.append(reported_bound)

    while heap or stack:
        if deadline is not None and time.monotonic() >= deadline:
            timed_out = True
            break
        if node_limit is not None and node_count >= node_limit:
            truncated = True
            break
        if incumbent_x is None and stack:
            node = stack.pop()
        elif heap:
            node = heapq.heappop(heap)
        else:
            node = stack.pop()
        cutoff = incumbent_obj - tol.pivot * max(1.0, abs(incumbent_obj))
        if node.entry_bound >= cutoff:
            continue

        node_count += 1
        work.lower[:] = node.lower
        work.upper[:] = node.upper
        sol = solve_lp(work, tolerances=tol, warm_basis=node.warm)
        if sol.status == "infeasible":
            note_bound()
            continue
        if sol.status != "optimal":
            # unbounded relaxations and numerical failures poison the bound;
            # surface them rather than continuing with a wrong tree
            if sol.status == "unbounded":
                raise MipError("LP relaxation unbounded; MIP is unbounded or malformed")
            raise MipError("LP core reported a numerical failure inside branch-and-bound")
        node_bound = float(sol.objective)
        if node_bound >= cutoff:
            note_bound()
            continue

        x = sol.x
        frac = np.abs(x[int_idx] - np.round(x[int_idx]))
        fractional = int_idx[frac > tol.integrality]
        if fractional.size == 0:
            cand = _snap(mip, x)
            cand_obj = float(mip.lp.objective @ cand)
            if cand_obj < incumbent_obj - tol.pivot * max(1.0, abs(cand_obj)):
                incumbent_x = cand
                incumbent_obj = cand_obj
                if stack:
                    for nd in stack:
                        heapq.heappush(heap, nd)
                    stack.clear()
            note_bound()
            continue

        prio = mip.branch_priority[fractional]
        top = fractional[prio == prio.max()]
        if np.any(mip.integrality[top] == BINARY):
            # binaries: most fractional first
            top = top[mip.integrality[top] == BINARY]
            dist = np.abs(np.abs(x[top] - np.round(x[top])) - 0.5)
            ties = top[dist <= dist.min() + 1e-12]
            j = int(ties.min())
        else:
            # general integers: branch where rounding up costs the most, which
            # lifts the ceil child's bound fastest
            lift = mip.lp.objective[top] * (np.ceil(x[top]) - x[top])
            ties = top[lift >= lift.max() - 1e-12]
            j = int(ties.min())
        xv = float(x[j])
        lo_child = _Node(
            entry_bound=node_bound,
            depth=node.depth + 1,
            seq=seq + 1,
            lower=node.lower.copy(),
            upper=node.upper.copy(),
            warm=sol.basis,
        )
        lo_child.upper[j] = math.floor(xv)
        hi_child = _Node(
            entry_bound=node_bound,
            depth=node.depth + 1,
            seq=seq + 2,
            lower=node.lower.copy(),
            upper=node.upper.copy(),
            warm=sol.basis,
        )
        hi_child.lower[j] = math.ceil(xv)
        seq += 2
        down_first = (xv - math.floor(xv)) <= 0.5
        first, second = (lo_child, hi_child) if down_first else (hi_child, lo_child)
        if incumbent_x is None:
            # plunge: dive into the more promising child, park the sibling
            heapq.heappush(heap, second)
            stack.append(first)
        else:
            heapq.heappush(heap, first)
            heapq.heappush(heap, second)
        note_bound()

    if timed_out:
        status = "time-limit"
        bound = max(reported_bound, open_bound() if (heap or stack) else reported_bound)
    elif truncated:
        status = "feasible" if incumbent_x is not None else "time-limit"
        bound = max(reported_bound, open_bound())
    else:
        status = "optimal" if incumbent_x is not None else "infeasible"
        bound = incumbent_obj if incumbent_x is not None else INF
    if incumbent_x is not None:
        bound = min(bound, incumbent_obj)
    if bound > reported_bound:
        reported_bound = bound
    bound_log.append(reported_bound)

    if incumbent_x is None:
        return MipResult(
            status=status,
            bound=bound if status != "infeasible" else INF,
            gap=INF,
            node_count=node_count,
            hint_discarded=hint_discarded,
            bound_log=bound_log,
        )
    gap = (incumbent_obj - bound) / max(abs(incumbent_obj), tol.div_guard)
    return MipResult(
        status=status,
        x=incumbent_x,
        objective=incumbent_obj,
        bound=bound,
        gap=gap,
        node_count=node_count,
        hint_discarded=hint_discarded,
        bound_log=bound_log,
    )


def gap_percent(incumbent: float, bound: float, tolerances: Tolerances | None = None) -> float:
    """Optimality gap as a percentage of the incumbent value.

    ``100 * (incumbent - bound) / incumbent`` for positive incumbents, 0.0
    for a closed all-zero pair.  A bound exceeding the incumbent beyond
    tolerance raises InternalInconsistencyError.
    """
    tol = tolerances or DEFAULT
    if not math.isfinite(bound):
        if bound == -INF:
            return 100.0
        raise InternalInconsistencyError(f"bound {bound} is not a valid lower bound")
    if bound > incumbent + tol.gap_rel * max(1.0, abs(incumbent)):
        raise InternalInconsistencyError(
            f"bound {bound} exceeds incumbent {incumbent} beyond tolerance"
        )
    if incumbent == 0.0 and bound == 0.0:
        return 0.0
    denom = max(abs(incumbent), tol.div_guard)
    return 100.0 * (incumbent - min(bound, incumbent)) / denom
