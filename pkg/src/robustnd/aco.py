"""Ant-colony construction of routings with LP-derived guidance.

Trails and attractiveness both come from linear relaxations: initial trails
are the path-assignment values of the protected model's relaxation, and a
move's attractiveness is a lower bound on the cost of completing the current
partial routing through it.  The pheromone update reinforces relative to a
moving average of recent solution costs, so there is no separate evaporation
parameter anywhere in this module.
"""

from __future__ import annotations

import random
import time
from collections import deque
from dataclasses import dataclass, field

from .lp import solve_lp_with_fixings
from .model import (
    ModelCache,
    RoutingState,
    Solution,
    derive_schedule,
    evaluate_routing,
    worst_case_load,
)
from .tolerances import DEFAULT, TRAIL_FLOOR

__all__ = [
    "AcoError",
    "AntParameters",
    "PheromoneTable",
    "AttractivenessEvaluator",
    "ColonyResult",
    "init_trails",
    "attractiveness",
    "construct_routing",
    "update_trails",
    "run_colony",
    "RoutingState",
]


class AcoError(Exception):
    pass


@dataclass
class AntParameters:
    """Colony controls: trail weight, colony size, averaging window, seed."""

    alpha: float = 0.5
    num_ants: int = 3
    window: int = 3
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise AcoError("alpha must lie in [0, 1]")
        if self.num_ants < 1:
            raise AcoError("need at least one ant")
        if self.window < 1:
            raise AcoError("window must be at least 1")


@dataclass
class PheromoneTable:
    """Trail values per (commodity, path, period) move.

    ``tau0`` keeps the initial relaxation-derived values used as reinforcement
    units; ``window`` holds the recent solution costs whose mean anchors the
    update; ``lower_bound`` is the relaxation optimum.
    """

    trail: dict[tuple[int, int, int], float]
    tau0: dict[tuple[int, int, int], float]
    window: deque
    lower_bound: float
    floor: float = TRAIL_FLOOR

    def zbar(self) -> float | None:
        if not self.window:
            return None
        return sum(self.window) / len(self.window)


def init_trails(instance, window: int = 3, cache: ModelCache | None = None) -> PheromoneTable:
    """Seed trails from the protected model's LP relaxation.

    Every move gets the relaxation value of its path-assignment variable,
    floored so no move is unreachable; the relaxation optimum becomes the
    lower bound used by both the update formula and gap reporting.
    """
    cache = cache or ModelCache(instance)
    rel = cache.relaxation(robust=True)
    if rel.status != "optimal":
        raise AcoError(
            f"relaxation of the protected model is {rel.status}; instance is unusable"
        )
    vx = cache.vindex(robust=True)
    tau0 = {
        move: max(float(rel.x[col]), TRAIL_FLOOR) for move, col in vx.x_items()
    }
    return PheromoneTable(
        trail=dict(tau0),
        tau0=tau0,
        window=deque(maxlen=window),
        lower_bound=float(rel.objective),
    )


class AttractivenessEvaluator:
    """Scores candidate moves; lower raw completion bounds score higher.

    ``exact-lp`` solves the nominal relaxation with the partial routing plus
    the candidate pinned; ``surrogate`` prices the candidate by the schedule
    cost increase its worst-case-aware load would cause on the edges it uses.
    Raw values are min-max normalized per candidate set (ties -> all 1.0), so
    scaling every raw value by a positive constant changes nothing.
    """

    def __init__(self, instance, mode: str = "exact-lp", cache: ModelCache | None = None):
        if mode not in ("exact-lp", "surrogate"):
            raise AcoError(f"unknown attractiveness mode {mode!r}")
        self.instance = instance
        self.mode = mode
        self.cache = cache or ModelCache(instance)
        self.vindex = self.cache.vindex(robust=False)
        self._nominal_lp = self.cache.mip(robust=False).lp

    def raw_values(self, partial: RoutingState, c: int, t: int) -> list[float]:
        if self.mode == "exact-lp":
            return [
                self._exact_raw(partial, c, p, t) for p in range(self.vindex.num_paths(c))
            ]
        return [self._surrogate_raw(partial, c, p, t) for p in range(self.vindex.num_paths(c))]

    def _exact_raw(self, partial: RoutingState, c: int, p: int, t: int) -> float:
        fixings = {self.vindex.x(cc, pp, tt): 1.0 for cc, pp, tt in partial.triples()}
        fixings[self.vindex.x(c, p, t)] = 1.0
        sol = solve_lp_with_fixings(self._nominal_lp, fixings, tolerances=self.cache.tol)
        if sol.status != "optimal":
            raise AcoError(f"nominal relaxation {sol.status} while scoring a move")
        return float(sol.objective)

    def _surrogate_raw(self, partial: RoutingState, c: int, p: int, t: int) -> float:
        inst = self.instance
        vx = self.vindex
        extended = partial.copy()
        extended.assign(c, p, t)
        delta = 0.0
        for ei in vx.path_edges[c][p]:
            eid = vx.edge_ids[ei]
            before = {
                (eid, tt): worst_case_load(inst, eid, tt, partial, vindex=vx)
                for tt in range(inst.num_periods)
            }
            after = dict(before)
            after[(eid, t)] = worst_case_load(inst, eid, t, extended, vindex=vx)
            delta += derive_schedule(inst, after).total_cost(inst) - derive_schedule(
                inst, before
            ).total_cost(inst)
        return delta

    @staticmethod
    def normalize(raws: list[float]) -> list[float]:
        best = min(raws)
        worst = max(raws)
        span = worst - best
        # differences below the LP objective tolerance are solver dust, not
        # information; amplifying them would fabricate a preference
        if span <= DEFAULT.gap_rel * max(1.0, abs(worst)):
            return [1.0] * len(raws)
        return [(worst - r) / span for r in raws]

    def scores(self, partial: RoutingState, c: int, t: int) -> list[float]:
        return self.normalize(self.raw_values(partial, c, t))


def attractiveness(instance, partial: RoutingState, move, mode: str = "exact-lp",
                   cache: ModelCache | None = None) -> float:
    """Score of one move within its candidate set (its (commodity, period))."""
    c, p, t = move
    ev = AttractivenessEvaluator(instance, mode=mode, cache=cache)
    return ev.scores(partial, c, t)[p]


def construct_routing(
    instance,
    table: PheromoneTable,
    params: AntParameters,
    rng: random.Random,
    mode: str = "exact-lp",
    evaluator: AttractivenessEvaluator | None = None,
) -> RoutingState:
    """Build one complete routing, period by period.

    Within each period, commodities are handled in descending nominal-demand
    order (ties by id); each gets one path sampled with probability
    proportional to alpha * trail + (1 - alpha) * attractiveness.
    """
    ev = evaluator or AttractivenessEvaluator(instance, mode=mode)
    alpha = params.alpha
    routing = RoutingState()
    comms = list(enumerate(instance.commodities))
    for t in range(instance.num_periods):
        order = sorted(comms, key=lambda ic: (-ic[1].nominal_demand[t], ic[1].id))
        for ci, _ in order:
            npaths = ev.vindex.num_paths(ci)
            if npaths == 1:
                routing.assign(ci, 0, t)
                continue
            scores = ev.scores(routing, ci, t)
            weights = [
                alpha * table.trail[(ci, p, t)] + (1.0 - alpha) * scores[p]
                for p in range(npaths)
            ]
            total = sum(weights)
            if total <= 0.0:
                # possible only with alpha = 0 and degenerate scores
                weights = [1.0] * npaths
                total = float(npaths)
            pick = rng.choices(range(npaths), weights=weights, k=1)[0]
            routing.assign(ci, pick, t)
    return routing


def update_trails(
    table: PheromoneTable, ant_solutions: list[tuple[RoutingState, float]]
) -> PheromoneTable:
    """Reinforce each ant's moves relative to the moving cost average.

    Reinforcement per move is tau0 * (1 - (cost - LB) / (zbar - LB)); costs at
    the average add nothing, better-than-average costs add positive trail and
    worse ones subtract, floored afterwards.  The window is seeded with the
    first cost ever seen so the first update has a defined average, and all
    batch costs are pushed only after the whole batch is applied.
    """
    if not ant_solutions:
        return table
    if not table.window:
        table.window.append(ant_solutions[0][1])
    zbar = table.zbar()
    lb = table.lower_bound
    denom = zbar - lb
    touched: set[tuple[int, int, int]] = set()
    for routing, cost in ant_solutions:
        if denom <= DEFAULT.div_guard * max(1.0, abs(zbar)):
            factor = 0.0
        else:
            factor = 1.0 - (cost - lb) / denom
        if factor != 0.0:
            for move in routing.triples():
                table.trail[move] = table.trail[move] + table.tau0[move] * factor
                touched.add(move)
    for move in touched:
        if table.trail[move] < table.floor:
            table.trail[move] = table.floor
    for _, cost in ant_solutions:
        table.window.append(cost)
    return table


@dataclass
class ColonyResult:
    best: Solution
    table: PheromoneTable
    iterations: int
    solutions_built: int
    log_rows: list[dict] = field(default_factory=list)


def run_colony(
    instance,
    params: AntParameters,
    time_limit: float,
    mode: str = "exact-lp",
    cache: ModelCache | None = None,
    log_writer=None,
    daemon=None,
    daemon_every: int | None = None,
) -> ColonyResult:
    """Timed ant loop: build ants, track the best, update trails per iteration.

    At least one full iteration always runs.  ``daemon``/``daemon_every`` are
    an extension hook (off by default) that lets a caller improve the current
    best between iterations.
    """
    if time_limit <= 0:
        raise AcoError("time_limit must be positive")
    cache = cache or ModelCache(instance)
    table = init_trails(instance, window=params.window, cache=cache)
    evaluator = AttractivenessEvaluator(instance, mode=mode, cache=cache)
    rng = random.Random(params.rng_seed)
    vx_eval = cache.vindex(robust=False)

    best: Solution | None = None
    rows: list[dict] = []
    built = 0
    iteration = 0
    start = time.monotonic()
    while True:
        iteration += 1
        batch: list[tuple[RoutingState, float]] = []
        for ant in range(params.num_ants):
            routing = construct_routing(
                instance, table, params, rng, mode=mode, evaluator=evaluator
            )
            sol = evaluate_routing(instance, routing, vindex=vx_eval)
            built += 1
            batch.append((routing, sol.cost))
            if best is None or sol.cost < best.cost:
                best = sol
            zbar = table.zbar()
            row = {
                "iteration": iteration,
                "ant": ant,
                "cost": sol.cost,
                "zbar": zbar if zbar is not None else "",
                "best": best.cost,
                "elapsed_s": time.monotonic() - start,
            }
            rows.append(row)
            if log_writer is not None:
                log_writer(row)
        update_trails(table, batch)
        if daemon is not None and daemon_every and iteration % daemon_every == 0:
            improved = daemon(best)
            if improved is not None and improved.cost < best.cost:
                best = improved
        if time.monotonic() - start >= time_limit:
            break
    best.lower_bound = table.lower_bound
    return ColonyResult(
        best=best,
        table=table,
        iterations=iteration,
        solutions_built=built,
        log_rows=rows,
    )
