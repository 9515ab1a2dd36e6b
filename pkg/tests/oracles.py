"""Independent brute-force oracles used to validate solver outputs.

Each oracle computes the target quantity by exhaustive enumeration and shares
no code with the implementation paths it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

INF = float("inf")


def vertex_enumeration_lp(c, rows, lower, upper, tol=1e-7):
    """Exact (status, objective) of a box-bounded LP by active-set enumeration.

    ``rows`` is a list of (dense coefficients, sense, rhs); every variable
    must have finite bounds so that the feasible set, when non-empty, is a
    polytope whose optimum sits on an enumerated vertex.  Candidate points
    are generated per active-set pattern and screened in batches.
    """
    c = np.asarray(c, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = c.shape[0]
    assert np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))
    A = np.array([np.asarray(a, dtype=float) for a, _, _ in rows]).reshape(len(rows), n)
    senses = np.array([s for _, s, _ in rows])
    rhs = np.array([float(b) for _, _, b in rows])
    m = len(rows)
    row_scale = np.maximum(1.0, np.maximum(np.abs(A).max(axis=1, initial=1.0), np.abs(rhs)))

    def best_feasible(points: np.ndarray) -> float | None:
        ok = np.all(points >= lower - tol, axis=1) & np.all(points <= upper + tol, axis=1)
        if m:
            lhs = points @ A.T
            le = senses == "<="
            ge = senses == ">="
            eq = senses == "="
            ok &= np.all(lhs[:, le] <= rhs[le] + tol * row_scale[le], axis=1)
            ok &= np.all(lhs[:, ge] >= rhs[ge] - tol * row_scale[ge], axis=1)
            ok &= np.all(np.abs(lhs[:, eq] - rhs[eq]) <= tol * row_scale[eq], axis=1)
        if not np.any(ok):
            return None
        return float((points[ok] @ c).min())

    best = None

    def consider(val: float | None) -> None:
        nonlocal best
        if val is not None and (best is None or val < best):
            best = val

    # iterate over free-variable sets and active-row subsets; all 2^(n-f)
    # lower/upper patterns of the fixed variables share one factorization
    bound_patterns: dict[int, np.ndarray] = {}

    def patterns(k: int) -> np.ndarray:
        if k not in bound_patterns:
            if k == 0:
                bound_patterns[k] = np.zeros((1, 0), dtype=bool)
            else:
                bound_patterns[k] = np.array(
                    list(itertools.product((False, True), repeat=k)), dtype=bool
                )
        return bound_patterns[k]

    all_idx = np.arange(n)
    for f in range(0, min(n, m) + 1):
        for free in itertools.combinations(range(n), f):
            free = np.array(free, dtype=int)
            fixed = np.setdiff1d(all_idx, free)
            pats = patterns(len(fixed))
            base = np.where(pats, upper[fixed], lower[fixed])  # (P, n-f)
            points = np.empty((pats.shape[0], n))
            points[:, fixed] = base
            if f == 0:
                consider(best_feasible(points))
                continue
            for rowset in itertools.combinations(range(m), f):
                rowset = list(rowset)
                M = A[rowset][:, free]
                if abs(np.linalg.det(M)) <= 1e-10:
                    continue
                # rhs per pattern: b_R - A_R[:, fixed] @ base^T
                rhs_eff = rhs[rowset][:, None] - A[rowset][:, fixed] @ base.T
                sols = np.linalg.solve(M, rhs_eff).T  # (P, f)
                ok = np.all(np.isfinite(sols), axis=1)
                if not np.any(ok):
                    continue
                pts = points[ok].copy()
                pts[:, free] = sols[ok]
                consider(best_feasible(pts))
    if best is None:
        return "infeasible", None
    return "optimal", best


def brute_force_deviation(deltas: list[list[float]], thetas: list[int]) -> float:
    """Max total deviation assigning each commodity to at most one band.

    ``deltas[i][k-1]`` is commodity i's deviation in band k; ``thetas[k-1]``
    caps how many commodities band k takes.  Enumerates every assignment.
    """
    n = len(deltas)
    nbands = len(thetas)
    best = 0.0
    for combo in itertools.product(range(nbands + 1), repeat=n):
        counts = [0] * (nbands + 1)
        for b in combo:
            counts[b] += 1
        if any(counts[k] > thetas[k - 1] for k in range(1, nbands + 1)):
            continue
        total = sum(deltas[i][b - 1] for i, b in enumerate(combo) if b >= 1)
        best = max(best, total)
    return best


def brute_force_schedule_cost(loads: list[float], costs: list[float], phi: float,
                              max_modules: int) -> float:
    """Cheapest feasible install vector for one edge by full enumeration."""
    T = len(loads)
    req = [max(0, math.ceil(load / phi - 1e-9)) for load in loads]
    best = INF
    for combo in itertools.product(range(max_modules + 1), repeat=T):
        cum = 0
        ok = True
        for t in range(T):
            cum += combo[t]
            if cum < req_running_max(req, t):
                ok = False
                break
        if ok:
            cost = sum(c * y for c, y in zip(costs, combo))
            best = min(best, cost)
    return best


def req_running_max(req: list[int], t: int) -> int:
    return max(req[: t + 1])


def enumerate_routings(instance):
    """Yield every complete RoutingState of an instance."""
    from robustnd.model import RoutingState

    slots = []
    for ci, c in enumerate(instance.commodities):
        npaths = len(instance.path_set.paths[c.id])
        for t in range(instance.num_periods):
            slots.append((ci, t, npaths))
    for combo in itertools.product(*(range(np_) for _, _, np_ in slots)):
        routing = RoutingState()
        for (ci, t, _), p in zip(slots, combo):
            routing.assign(ci, p, t)
        yield routing


def nominal_optimum_by_enumeration(instance) -> float:
    """Exact optimum of the uncertainty-free problem by exhaustive search.

    Uses a vectorized sweep when every admissible path is a single edge
    (parallel-trunk instances); otherwise enumerates complete routings and
    prices each with the zero-deviation evaluator.
    """
    single_edge = all(
        len(p) == 1
        for plist in instance.path_set.paths.values()
        for p in plist
    )
    periods = instance.num_periods
    comms = instance.commodities
    if single_edge:
        edge_ids = [e.id for e in instance.network.edges]
        pos = {eid: i for i, eid in enumerate(edge_ids)}
        # per commodity: the trunk index of each path choice
        choices = [
            [pos[p[0]] for p in instance.path_set.paths[c.id]] for c in comms
        ]
        grids = np.array(list(itertools.product(*[range(len(ch)) for ch in choices])),
                         dtype=np.int8)
        total = np.zeros(grids.shape[0])
        phi = instance.module_capacity
        for ei, eid in enumerate(edge_ids):
            # with period-constant costs the cheapest schedule for a trunk is
            # its peak requirement times the unit price
            assert all(
                instance.cost(eid, tt) == instance.cost(eid, 0) for tt in range(periods)
            ), "vectorized oracle assumes period-constant module costs"
            on_mask = [
                np.isin(grids[:, ci], [k for k, tr in enumerate(ch) if tr == ei])
                for ci, ch in enumerate(choices)
            ]
            req = np.zeros(grids.shape[0])
            for t in range(periods):
                loads = np.zeros(grids.shape[0])
                for ci in range(len(comms)):
                    loads += np.where(on_mask[ci], comms[ci].nominal_demand[t], 0.0)
                req = np.maximum(req, np.ceil(loads / phi - 1e-9))
            total += req * instance.cost(eid, 0)
        return float(total.min())
    from robustnd.model import evaluate_routing

    zero = _zero_deviation_copy(instance)
    best = INF
    for routing in enumerate_routings(zero):
        best = min(best, evaluate_routing(zero, routing).cost)
    return best


def _zero_deviation_copy(instance):
    import copy

    zero = copy.deepcopy(instance)
    for c in zero.commodities:
        c.band_deviations = [[0.0] * len(row) for row in c.band_deviations]
    for eid in zero.profile.band_counts:
        for row in zero.profile.band_counts[eid]:
            for k in range(1, len(row)):
                row[k] = 0
    return zero


def all_simple_paths(network, source: str, target: str) -> list[list[str]]:
    """Every simple path as an edge-id list, sorted by (length, edge ids)."""
    adj: dict[str, list[tuple[str, str]]] = {v: [] for v in network.vertices}
    for e in network.edges:
        adj[e.a].append((e.id, e.b))
        adj[e.b].append((e.id, e.a))
    out: list[tuple[str, ...]] = []

    def dfs(node, visited, edges):
        if node == target:
            out.append(tuple(edges))
            return
        for eid, other in sorted(adj[node]):
            if other in visited:
                continue
            dfs(other, visited | {other}, edges + [eid])

    dfs(source, {source}, [])
    out.sort(key=lambda p: (len(p), p))
    return [list(p) for p in out]
