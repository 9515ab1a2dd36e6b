"""Optimization models and exact routing evaluation.

Builds the nominal multiperiod design MIP and its demand-protected
counterpart, evaluates fixed routings exactly (worst-case edge loads, then a
minimum-cost capacity schedule), and independently re-checks candidate
solutions including an oracle cross-check of installed capacity against the
worst-case loads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .instance import Instance
from .lp import LinearProgram, solve_lp
from .mip import BINARY, CONTINUOUS, INTEGER, MixedIntegerProgram
from .tolerances import DEFAULT, Tolerances


class ModelBuildError(Exception):
    """Instance cannot be turned into a model (e.g. a commodity has no paths)."""


class DimensionMismatchError(Exception):
    """A point/solution does not match the instance's variable catalog."""


class RoutingError(Exception):
    """Invalid routing-state manipulation."""


class RoutingState:
    """Assignment of one path per (commodity, period), possibly partial."""

    __slots__ = ("_assign",)

    def __init__(self) -> None:
        self._assign: dict[tuple[int, int], int] = {}

    def assign(self, commodity_idx: int, path_idx: int, period: int) -> None:
        key = (commodity_idx, period)
        if key in self._assign:
            raise RoutingError(f"commodity {commodity_idx} already routed in period {period}")
        self._assign[key] = path_idx

    def get(self, commodity_idx: int, period: int) -> int | None:
        return self._assign.get((commodity_idx, period))

    def triples(self) -> list[tuple[int, int, int]]:
        """Sorted (commodity, path, period) triples."""
        return sorted((c, p, t) for (c, t), p in self._assign.items())

    def __len__(self) -> int:
        return len(self._assign)

    def is_complete(self, instance: Instance) -> bool:
        return len(self._assign) == len(instance.commodities) * instance.num_periods

    def copy(self) -> "RoutingState":
        out = RoutingState()
        out._assign = dict(self._assign)
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RoutingState) and self._assign == other._assign

    def __hash__(self) -> int:
        return hash(frozenset(self._assign.items()))

    @classmethod
    def from_triples(cls, triples) -> "RoutingState":
        out = cls()
        for c, p, t in triples:
            out.assign(c, p, t)
        return out


class VariableIndex:
    """Dense column catalog for the design models.

    Layout: path-assignment block, capacity block, then (for the protected
    model) the per-band load variables and the per-path protection variables,
    which exist only for (edge, path) incidences.
    """

    def __init__(self, instance: Instance, robust: bool):
        instance.validate()
        self.instance = instance
        self.robust = robust
        self.num_periods = instance.num_periods
        self.num_bands = instance.profile.num_bands
        self.edge_ids = [e.id for e in instance.network.edges]
        self.edge_pos = {eid: i for i, eid in enumerate(self.edge_ids)}

        # per (commodity, path): the set of edge positions it uses
        self.path_edges: list[list[frozenset[int]]] = []
        for c in instance.commodities:
            plist = instance.path_set.paths.get(c.id)
            if not plist:
                raise ModelBuildError(f"commodity {c.id!r} has no admissible paths")
            self.path_edges.append(
                [frozenset(self.edge_pos[eid] for eid in p) for p in plist]
            )
        # per edge: (commodity, path) incidences in deterministic order
        self.on_edge: list[list[tuple[int, int]]] = [[] for _ in self.edge_ids]
        for ci, plists in enumerate(self.path_edges):
            for pi, eset in enumerate(plists):
                for ei in eset:
                    self.on_edge[ei].append((ci, pi))

        names: list[str] = []
        self._x: dict[tuple[int, int, int], int] = {}
        for ci, c in enumerate(instance.commodities):
            for pi in range(len(self.path_edges[ci])):
                for t in range(self.num_periods):
                    self._x[(ci, pi, t)] = len(names)
                    names.append(f"x[{c.id},{pi},{t}]")
        self._y: dict[tuple[int, int], int] = {}
        for ei, eid in enumerate(self.edge_ids):
            for t in range(self.num_periods):
                self._y[(ei, t)] = len(names)
                names.append(f"y[{eid},{t}]")
        self._w: dict[tuple[int, int, int], int] = {}
        self._z: dict[tuple[int, int, int, int], int] = {}
        if robust:
            for ei, eid in enumerate(self.edge_ids):
                for t in range(self.num_periods):
                    for k in range(1, self.num_bands + 1):
                        self._w[(ei, t, k)] = len(names)
                        names.append(f"w[{eid},{t},{k}]")
            for ei, eid in enumerate(self.edge_ids):
                for ci, pi in self.on_edge[ei]:
                    for t in range(self.num_periods):
                        self._z[(ei, ci, pi, t)] = len(names)
                        names.append(f"z[{eid},c{ci},p{pi},{t}]")
        self.names = names
        self.num_vars = len(names)
        self.num_x = len(self._x)

    def x(self, c: int, p: int, t: int) -> int:
        return self._x[(c, p, t)]

    def y(self, e: int, t: int) -> int:
        return self._y[(e, t)]

    def w(self, e: int, t: int, k: int) -> int:
        return self._w[(e, t, k)]

    def z(self, e: int, c: int, p: int, t: int) -> int:
        return self._z[(e, c, p, t)]

    def x_items(self):
        return self._x.items()

    def num_paths(self, c: int) -> int:
        return len(self.path_edges[c])


@dataclass
class CapacitySchedule:
    """Module installs per edge and period, plus their running totals."""

    installs: dict[str, list[int]]
    cumulative: dict[str, list[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.cumulative:
            self.cumulative = {
                eid: [int(v) for v in np.cumsum(vals)] for eid, vals in self.installs.items()
            }

    def total_cost(self, instance: Instance) -> float:
        return float(
            sum(
                instance.cost(eid, t) * n
                for eid, vals in self.installs.items()
                for t, n in enumerate(vals)
            )
        )


@dataclass
class Solution:
    """A complete routing with its capacity schedule and cost summary."""

    routing: RoutingState
    schedule: CapacitySchedule
    cost: float
    lower_bound: float | None = None
    gap: float | None = None


@dataclass
class Violation:
    kind: str
    where: str
    magnitude: float

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.magnitude:.3e}"


@dataclass
class FeasibilityReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


# -- model builders ---------------------------------------------------------


def _base_program(vindex: VariableIndex) -> LinearProgram:
    lp = LinearProgram(num_vars=vindex.num_vars, names=list(vindex.names))
    inst = vindex.instance
    for (ci, pi, t), col in vindex.x_items():
        lp.set_bounds(col, 0.0, 1.0)
    for (ei, t), col in vindex._y.items():
        lp.set_bounds(col, 0.0, float("inf"))
        lp.set_objective(col, inst.cost(vindex.edge_ids[ei], t))
    return lp


def _single_path_rows(lp: LinearProgram, vindex: VariableIndex) -> None:
    for ci in range(len(vindex.instance.commodities)):
        for t in range(vindex.num_periods):
            cols = [vindex.x(ci, pi, t) for pi in range(vindex.num_paths(ci))]
            lp.add_row(cols, np.ones(len(cols)), "=", 1.0)


def build_nominal(instance: Instance) -> MixedIntegerProgram:
    """Multiperiod design MIP without demand protection.

    Capacity rows compare the nominal flow routed over an edge with the
    capacity accumulated up to that period; each commodity uses exactly one
    path per period.
    """
    vindex = VariableIndex(instance, robust=False)
    return _build(vindex)


def build_robust(instance: Instance) -> MixedIntegerProgram:
    """Demand-protected counterpart of the nominal model.

    Adds one load variable per (edge, period, positive band) and one
    protection variable per (edge, path incidence, period); capacity rows
    gain the weighted band terms, and linking rows force the pair to cover
    each routed path's band deviation.  Both auxiliary families carry
    non-negative bounds, which keeps every capacity row a valid upper bound
    on worst-case load for any band-count configuration.
    """
    vindex = VariableIndex(instance, robust=True)
    return _build(vindex)


def _build(vindex: VariableIndex) -> MixedIntegerProgram:
    inst = vindex.instance
    lp = _base_program(vindex)
    _single_path_rows(lp, vindex)
    phi = inst.module_capacity
    for ei, eid in enumerate(vindex.edge_ids):
        for t in range(vindex.num_periods):
            cols: list[int] = []
            vals: list[float] = []
            for ci, pi in vindex.on_edge[ei]:
                cols.append(vindex.x(ci, pi, t))
                vals.append(inst.demand(ci, t))
            if vindex.robust:
                for k in range(1, vindex.num_bands + 1):
                    cols.append(vindex.w(ei, t, k))
                    vals.append(float(inst.band_count(eid, t, k)))
                for ci, pi in vindex.on_edge[ei]:
                    cols.append(vindex.z(ei, ci, pi, t))
                    vals.append(1.0)
            for tau in range(t + 1):
                cols.append(vindex.y(ei, tau))
                vals.append(-phi)
            lp.add_row(cols, vals, "<=", 0.0)
    if vindex.robust:
        for ei, eid in enumerate(vindex.edge_ids):
            for ci, pi in vindex.on_edge[ei]:
                for t in range(vindex.num_periods):
                    zcol = vindex.z(ei, ci, pi, t)
                    xcol = vindex.x(ci, pi, t)
                    for k in range(1, vindex.num_bands + 1):
                        dev = inst.deviation(ci, t, k)
                        lp.add_row(
                            [xcol, vindex.w(ei, t, k), zcol],
                            [dev, -1.0, -1.0],
                            "<=",
                            0.0,
                        )
    integrality = np.full(vindex.num_vars, CONTINUOUS, dtype=np.int8)
    priority = np.zeros(vindex.num_vars, dtype=np.int32)
    # path variables branch before capacity variables; within them, bigger
    # demands first, matching the construction order of the heuristic
    peak = [max(c.nominal_demand) for c in inst.commodities]
    rank = {ci: r for r, ci in enumerate(sorted(range(len(peak)), key=lambda i: (-peak[i], i)))}
    n_comm = len(inst.commodities)
    for (ci, _, _), col in vindex.x_items():
        integrality[col] = BINARY
        priority[col] = 1 + (n_comm - rank[ci])
    for _, col in vindex._y.items():
        integrality[col] = INTEGER
    mip = MixedIntegerProgram(lp, integrality, priority)
    mip.vindex = vindex  # handy for callers that need the catalog
    return mip


# -- exact evaluation of fixed routings -------------------------------------


def _on_edge_routed(vindex: VariableIndex, ei: int, t: int, routing: RoutingState) -> list[int]:
    out = []
    for ci in range(len(vindex.instance.commodities)):
        pi = routing.get(ci, t)
        if pi is None:
            continue
        if pi >= vindex.num_paths(ci):
            raise RoutingError(
                f"commodity index {ci} routed on unknown path {pi}"
            )
        if ei in vindex.path_edges[ci][pi]:
            out.append(ci)
    return out


def worst_case_load(
    instance: Instance,
    edge_id: str,
    t: int,
    routing: RoutingState,
    vindex: VariableIndex | None = None,
) -> float:
    """Nominal load plus the largest total deviation the bands allow.

    Each on-edge commodity may move into at most one positive band and each
    band k accepts at most its configured count of commodities; the maximum
    is found exactly as an assignment between commodities and band slots.
    """
    vx = vindex or VariableIndex(instance, robust=False)
    ei = vx.edge_pos[edge_id]
    members = _on_edge_routed(vx, ei, t, routing)
    nominal = sum(instance.demand(ci, t) for ci in members)
    if not members:
        return 0.0
    dev = _max_deviation_assignment(instance, edge_id, t, members)
    return nominal + dev


def _band_slots(instance: Instance, edge_id: str, t: int, n_members: int) -> list[int]:
    """Band index (1..K) per slot, trimmed to the member count."""
    slots: list[int] = []
    for k in range(1, instance.profile.num_bands + 1):
        slots.extend([k] * min(instance.band_count(edge_id, t, k), n_members))
    return slots


def _max_deviation_assignment(
    instance: Instance, edge_id: str, t: int, members: list[int]
) -> float:
    slots = _band_slots(instance, edge_id, t, len(members))
    if not slots:
        return 0.0
    n = len(members)
    profit = np.zeros((n, len(slots) + n))
    for i, ci in enumerate(members):
        for j, k in enumerate(slots):
            profit[i, j] = instance.deviation(ci, t, k)
    rows, cols = linear_sum_assignment(profit, maximize=True)
    return float(profit[rows, cols].sum())


def deviation_duals(
    instance: Instance,
    edge_id: str,
    t: int,
    routing: RoutingState,
    vindex: VariableIndex | None = None,
    tolerances: Tolerances | None = None,
) -> tuple[float, list[float], dict[int, float]]:
    """Worst-case deviation with covering prices for the protected model.

    Returns (deviation, per-band prices w[1..K], per-commodity prices z)
    satisfying w_k + z_c >= deviation(c, k) for every on-edge commodity and
    band, with sum(count_k * w_k) + sum(z_c) equal to the deviation.
    """
    vx = vindex or VariableIndex(instance, robust=False)
    ei = vx.edge_pos[edge_id]
    members = _on_edge_routed(vx, ei, t, routing)
    nbands = instance.profile.num_bands
    if not members:
        return 0.0, [0.0] * (nbands + 1), {}
    n = len(members)
    lp = LinearProgram(num_vars=n * nbands)
    obj = np.zeros(n * nbands)
    for i, ci in enumerate(members):
        for k in range(1, nbands + 1):
            obj[i * nbands + (k - 1)] = -instance.deviation(ci, t, k)
    lp.objective = obj
    for i in range(n):
        cols = [i * nbands + kk for kk in range(nbands)]
        lp.add_row(cols, np.ones(nbands), "<=", 1.0)
    for k in range(1, nbands + 1):
        cols = [i * nbands + (k - 1) for i in range(n)]
        lp.add_row(cols, np.ones(n), "<=", float(instance.band_count(edge_id, t, k)))
    sol = solve_lp(lp, tolerances=tolerances or DEFAULT)
    if sol.status != "optimal":
        raise ModelBuildError(f"deviation pricing failed on edge {edge_id!r}: {sol.status}")
    dev = -float(sol.objective)
    z = {ci: max(0.0, -float(sol.duals[i])) for i, ci in enumerate(members)}
    w = [0.0] * (nbands + 1)
    for k in range(1, nbands + 1):
        w[k] = max(0.0, -float(sol.duals[n + k - 1]))
    return dev, w, z


def derive_schedule(instance: Instance, loads: dict[tuple[str, int], float]) -> CapacitySchedule:
    """Cheapest install schedule covering per-period load requirements.

    The cumulative module requirement of a period is the running maximum of
    load ceilings; each marginal module is bought in the cheapest period at
    or before the one where it is first needed.  Cost ties defer to the
    latest eligible period, so nothing is installed before it is needed.
    """
    tol = DEFAULT
    phi = instance.module_capacity
    installs: dict[str, list[int]] = {}
    for e in instance.network.edges:
        eid = e.id
        per_t = [0] * instance.num_periods
        prev_req = 0
        for t in range(instance.num_periods):
            load = loads.get((eid, t), 0.0)
            req = max(0, math.ceil(load / phi - tol.ceil_guard))
            req = max(req, prev_req)
            extra = req - prev_req
            if extra > 0:
                costs = [instance.cost(eid, tau) for tau in range(t + 1)]
                tau_star = min(range(t + 1), key=lambda tau: (costs[tau], -tau))
                per_t[tau_star] += extra
            prev_req = req
        installs[eid] = per_t
    return CapacitySchedule(installs=installs)


def evaluate_routing(
    instance: Instance,
    routing: RoutingState,
    vindex: VariableIndex | None = None,
) -> Solution:
    """Exact cost of a complete routing: worst-case loads, then the schedule."""
    vx = vindex or VariableIndex(instance, robust=False)
    if not routing.is_complete(instance):
        raise RoutingError("routing is not complete")
    loads: dict[tuple[str, int], float] = {}
    for eid in vx.edge_ids:
        for t in range(instance.num_periods):
            loads[(eid, t)] = worst_case_load(instance, eid, t, routing, vindex=vx)
    schedule = derive_schedule(instance, loads)
    return Solution(routing=routing, schedule=schedule, cost=schedule.total_cost(instance))


# -- independent feasibility checking ---------------------------------------


def routing_from_point(vindex: VariableIndex, point: np.ndarray, tol: Tolerances = DEFAULT):
    """Extract the routing encoded in a point's path-assignment block.

    Returns (routing, problems): problems list (commodity, period) pairs whose
    block does not select exactly one path.
    """
    routing = RoutingState()
    problems: list[tuple[int, int]] = []
    inst = vindex.instance
    for ci in range(len(inst.commodities)):
        for t in range(vindex.num_periods):
            chosen = [
                pi
                for pi in range(vindex.num_paths(ci))
                if point[vindex.x(ci, pi, t)] > 1.0 - 1e-4
            ]
            if len(chosen) == 1:
                routing.assign(ci, chosen[0], t)
            else:
                problems.append((ci, t))
    return routing, problems


def check_feasible(
    instance: Instance,
    point: np.ndarray,
    tolerances: Tolerances | None = None,
) -> FeasibilityReport:
    """Re-verify a protected-model point independently of the solver.

    Checks integrality, the one-path-per-period rows, the band covering rows,
    the capacity rows, and finally cross-checks installed capacity against
    the worst-case load oracle, which is authoritative: a point can satisfy
    its rows with understated band variables yet still be under-capacitated.
    """
    tol = tolerances or DEFAULT
    vindex = VariableIndex(instance, robust=True)
    point = np.asarray(point, dtype=float)
    if point.shape[0] != vindex.num_vars:
        raise DimensionMismatchError(
            f"point has {point.shape[0]} entries, model has {vindex.num_vars}"
        )
    violations: list[Violation] = []

    for (ci, pi, t), col in vindex.x_items():
        frac = abs(point[col] - round(point[col]))
        if frac > tol.integrality:
            violations.append(Violation("integrality", vindex.names[col], frac))
    for key, col in vindex._y.items():
        frac = abs(point[col] - round(point[col]))
        if frac > tol.integrality:
            violations.append(Violation("integrality", vindex.names[col], frac))
        if point[col] < -tol.integrality:
            violations.append(Violation("bounds", vindex.names[col], -float(point[col])))

    inst = instance
    for ci in range(len(inst.commodities)):
        for t in range(vindex.num_periods):
            total = sum(point[vindex.x(ci, pi, t)] for pi in range(vindex.num_paths(ci)))
            if abs(total - 1.0) > tol.feas * 10 + tol.integrality:
                violations.append(
                    Violation("single-path", f"(c={inst.commodities[ci].id},t={t})", abs(total - 1))
                )

    phi = inst.module_capacity
    for ei, eid in enumerate(vindex.edge_ids):
        for t in range(vindex.num_periods):
            lhs = 0.0
            for ci, pi in vindex.on_edge[ei]:
                lhs += inst.demand(ci, t) * point[vindex.x(ci, pi, t)]
            for k in range(1, vindex.num_bands + 1):
                lhs += inst.band_count(eid, t, k) * point[vindex.w(ei, t, k)]
            for ci, pi in vindex.on_edge[ei]:
                lhs += point[vindex.z(ei, ci, pi, t)]
            cum = phi * sum(point[vindex.y(ei, tau)] for tau in range(t + 1))
            scale = max(1.0, abs(cum))
            if lhs > cum + tol.feas * 10 * scale:
                violations.append(Violation("capacity-row", f"(e={eid},t={t})", lhs - cum))
            for ci, pi in vindex.on_edge[ei]:
                for k in range(1, vindex.num_bands + 1):
                    gap = (
                        inst.deviation(ci, t, k) * point[vindex.x(ci, pi, t)]
                        - point[vindex.w(ei, t, k)]
                        - point[vindex.z(ei, ci, pi, t)]
                    )
                    if gap > tol.feas * 10 * max(1.0, inst.deviation(ci, t, k)):
                        violations.append(
                            Violation(
                                "protection-row",
                                f"(e={eid},c={inst.commodities[ci].id},p={pi},t={t},k={k})",
                                gap,
                            )
                        )

    routing, problems = routing_from_point(vindex, point, tol)
    if not problems:
        # authoritative cross-check: installed capacity must cover the
        # worst-case load regardless of what the auxiliary variables claim
        for ei, eid in enumerate(vindex.edge_ids):
            for t in range(vindex.num_periods):
                need = worst_case_load(inst, eid, t, routing, vindex=vindex)
                cum = phi * sum(
                    round(point[vindex.y(ei, tau)]) for tau in range(t + 1)
                )
                if need > cum + tol.feas * 10 * max(1.0, abs(cum)):
                    violations.append(
                        Violation("capacity-oracle", f"(e={eid},t={t})", need - cum)
                    )
    return FeasibilityReport(violations=violations)


# -- solution <-> full point conversion -------------------------------------


def routing_fixings(vindex: VariableIndex, routing: RoutingState) -> dict[int, float]:
    """Bounds fixings that pin every path-assignment column to a routing."""
    out: dict[int, float] = {}
    for (ci, pi, t), col in vindex.x_items():
        out[col] = 1.0 if routing.get(ci, t) == pi else 0.0
    return out


def expand_solution(
    instance: Instance,
    solution: Solution,
    vindex: VariableIndex,
    tolerances: Tolerances | None = None,
) -> np.ndarray:
    """Full protected-model point for a routing solution.

    Path and capacity values come from the solution itself; the band and
    protection variables are re-priced from the worst-case oracle so the
    point is feasible by construction.
    """
    if not vindex.robust:
        raise ModelBuildError("expand_solution needs the protected-model catalog")
    point = np.zeros(vindex.num_vars)
    for (ci, pi, t), col in vindex.x_items():
        point[col] = 1.0 if solution.routing.get(ci, t) == pi else 0.0
    for (ei, t), col in vindex._y.items():
        point[col] = float(solution.schedule.installs[vindex.edge_ids[ei]][t])
    for ei, eid in enumerate(vindex.edge_ids):
        for t in range(instance.num_periods):
            _, w, z = deviation_duals(
                instance, eid, t, solution.routing, vindex=vindex, tolerances=tolerances
            )
            for k in range(1, vindex.num_bands + 1):
                point[vindex.w(ei, t, k)] = w[k]
            for ci, zv in z.items():
                pi = solution.routing.get(ci, t)
                point[vindex.z(ei, ci, pi, t)] = zv
    return point


class ModelCache:
    """Per-instance cache of variable catalogs, built models and root relaxations.

    The heuristic layers solve the same relaxations repeatedly; building the
    row structure once per instance keeps their inner loops cheap.  Read-only
    after construction of each cached artifact, so safe to share across ants.
    """

    def __init__(self, instance: Instance, tolerances: Tolerances | None = None):
        self.instance = instance
        self.tol = tolerances or DEFAULT
        self._vindex: dict[bool, VariableIndex] = {}
        self._mip: dict[bool, MixedIntegerProgram] = {}
        self._relax = {}

    def vindex(self, robust: bool) -> VariableIndex:
        if robust not in self._vindex:
            self._vindex[robust] = VariableIndex(self.instance, robust=robust)
        return self._vindex[robust]

    def mip(self, robust: bool) -> MixedIntegerProgram:
        if robust not in self._mip:
            vx = self.vindex(robust)
            self._mip[robust] = _build(vx)
        return self._mip[robust]

    def relaxation(self, robust: bool):
        """Root LP relaxation solution of the chosen model (cached)."""
        if robust not in self._relax:
            self._relax[robust] = solve_lp(self.mip(robust).lp, tolerances=self.tol)
        return self._relax[robust]


# -- solution documents ------------------------------------------------------


def solution_to_document(instance: Instance, solution: Solution) -> dict:
    """JSON-compatible export: routing table, schedule table, cost summary."""
    return {
        "routing": [
            {
                "commodity": instance.commodities[c].id,
                "period": t,
                "path_index": p,
            }
            for c, p, t in solution.routing.triples()
        ],
        "schedule": {eid: list(v) for eid, v in solution.schedule.installs.items()},
        "cost": solution.cost,
        "bound": solution.lower_bound,
        "gap_pct": solution.gap,
    }


def solution_from_document(instance: Instance, doc: dict) -> Solution:
    """Rebuild a Solution from its document; dimension errors are explicit."""
    cid_to_idx = {c.id: i for i, c in enumerate(instance.commodities)}
    routing = RoutingState()
    if not isinstance(doc, dict) or "routing" not in doc or "schedule" not in doc:
        raise DimensionMismatchError("solution document missing routing/schedule")
    for row in doc["routing"]:
        cid = row["commodity"]
        if cid not in cid_to_idx:
            raise DimensionMismatchError(f"solution routes unknown commodity {cid!r}")
        ci = cid_to_idx[cid]
        t = int(row["period"])
        p = int(row["path_index"])
        if t < 0 or t >= instance.num_periods:
            raise DimensionMismatchError(f"solution period {t} outside horizon")
        if p < 0 or p >= len(instance.path_set.paths[cid]):
            raise DimensionMismatchError(f"solution path index {p} unknown for {cid!r}")
        routing.assign(ci, p, t)
    installs: dict[str, list[int]] = {}
    edge_ids = {e.id for e in instance.network.edges}
    for eid, vals in doc["schedule"].items():
        if eid not in edge_ids:
            raise DimensionMismatchError(f"solution schedules unknown edge {eid!r}")
        if len(vals) != instance.num_periods:
            raise DimensionMismatchError(f"schedule for edge {eid!r} has wrong period count")
        installs[eid] = [int(v) for v in vals]
    for eid in edge_ids:
        installs.setdefault(eid, [0] * instance.num_periods)
    schedule = CapacitySchedule(installs=installs)
    return Solution(
        routing=routing,
        schedule=schedule,
        cost=float(doc.get("cost", schedule.total_cost(instance))),
        lower_bound=doc.get("bound"),
        gap=doc.get("gap_pct"),
    )
