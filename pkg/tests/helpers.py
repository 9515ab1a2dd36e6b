"""Shared instance builders for the test suite."""

from __future__ import annotations

import random

from robustnd.instance import (
    Commodity,
    Edge,
    Instance,
    Network,
    PathSet,
    UncertaintyProfile,
)


def make_instance(
    edges,
    commodities,
    paths,
    num_periods=1,
    num_bands=1,
    band_counts=None,
    module_capacity=100.0,
    module_cost=None,
):
    """Assemble and validate an Instance from compact test data.

    ``edges``: list of (id, a, b); ``commodities``: list of
    (id, source, target, demands per period, deviation rows per period);
    ``paths``: dict commodity id -> list of edge-id lists.
    """
    vertices = sorted({v for _, a, b in edges for v in (a, b)})
    network = Network(vertices=vertices, edges=[Edge(*e) for e in edges])
    comms = [Commodity(cid, s, t, list(d), [list(r) for r in devs])
             for cid, s, t, d, devs in commodities]
    if band_counts is None:
        band_counts = {
            eid: [[0] + [len(comms)] * num_bands for _ in range(num_periods)]
            for eid, _, _ in edges
        }
    if module_cost is None:
        module_cost = {eid: [1.0] * num_periods for eid, _, _ in edges}
    inst = Instance(
        network=network,
        commodities=comms,
        path_set=PathSet({cid: [list(p) for p in plist] for cid, plist in paths.items()}),
        profile=UncertaintyProfile(num_bands=num_bands, band_counts=band_counts),
        module_capacity=module_capacity,
        module_cost=module_cost,
        num_periods=num_periods,
    )
    inst.validate()
    return inst


def two_parallel_edges_instance(
    demands=(100.0,),
    num_periods=1,
    num_bands=1,
    deviation_fraction=0.1,
    theta=1,
    module_capacity=60.0,
    costs=((1.0, 1.0),),
):
    """All commodities share endpoints a-b with two parallel edges to pick from."""
    edges = [("e1", "a", "b"), ("e2", "a", "b")]
    comms = []
    for i, d in enumerate(demands):
        dem = [d] * num_periods
        devs = [
            [(k / num_bands) * deviation_fraction * d for k in range(num_bands + 1)]
            for _ in range(num_periods)
        ]
        comms.append((f"c{i+1}", "a", "b", dem, devs))
    paths = {f"c{i+1}": [["e1"], ["e2"]] for i in range(len(demands))}
    band_counts = {
        eid: [[0] + [theta] * num_bands for _ in range(num_periods)] for eid, _, _ in edges
    }
    cost_map = {
        "e1": [costs[0][0]] * num_periods if len(costs[0]) == 1 else list(costs[0]),
        "e2": [costs[-1][0]] * num_periods if len(costs[-1]) == 1 else list(costs[-1]),
    }
    cost_map = {eid: (vals * num_periods)[:num_periods] for eid, vals in cost_map.items()}
    return make_instance(
        edges,
        comms,
        paths,
        num_periods=num_periods,
        num_bands=num_bands,
        band_counts=band_counts,
        module_capacity=module_capacity,
        module_cost=cost_map,
    )


def random_dualization_instance(rng: random.Random) -> Instance:
    """Random instance whose complete-routing space stays enumerable.

    Sizes reach the acceptance caps (3 edges, 5 commodities, 2 periods, 2
    bands) but at most three commodities keep a second admissible path, so
    the number of complete routings stays small.
    """
    inst = random_instance(rng, max_commodities=5, max_periods=2, max_bands=2, max_paths=2)
    choice_budget = rng.randint(0, 3 if inst.num_periods == 1 else 2)
    kept = 0
    for c in inst.commodities:
        plist = inst.path_set.paths[c.id]
        if len(plist) > 1:
            if kept < choice_budget:
                kept += 1
            else:
                inst.path_set.paths[c.id] = plist[:1]
    inst.validate()
    return inst


_TOPOLOGIES = (
    # (edges, terminal pairs usable as commodity endpoints)
    ([("e1", "a", "b"), ("e2", "a", "b")], [("a", "b")]),
    ([("e1", "a", "b"), ("e2", "a", "b"), ("e3", "a", "b")], [("a", "b")]),
    ([("e1", "a", "b"), ("e2", "b", "c"), ("e3", "a", "c")], [("a", "b"), ("a", "c"), ("b", "c")]),
    ([("e1", "a", "b"), ("e2", "b", "c")], [("a", "c"), ("a", "b"), ("b", "c")]),
)


def random_instance(
    rng: random.Random,
    max_commodities=5,
    max_periods=2,
    max_bands=2,
    max_paths=2,
    max_theta=None,
    demand_range=(20, 120),
    module_capacity_range=(30, 100),
) -> Instance:
    """Small random instance with adversarial band/count structure.

    Deviations are independent strictly increasing values (not proportional
    splits) and band counts range over 0..|C|, including the corner cases.
    """
    from robustnd.paths import k_shortest_paths

    edges, pairs = _TOPOLOGIES[rng.randrange(len(_TOPOLOGIES))]
    vertices = sorted({v for _, a, b in edges for v in (a, b)})
    network = Network(vertices=vertices, edges=[Edge(*e) for e in edges])
    T = rng.randint(1, max_periods)
    K = rng.randint(1, max_bands)
    n_comm = rng.randint(1, max_commodities)
    comms = []
    paths = {}
    for i in range(n_comm):
        src, dst = pairs[rng.randrange(len(pairs))]
        demands = [float(rng.randint(*demand_range)) for _ in range(T)]
        devs = []
        for t in range(T):
            row = [0.0]
            cur = 0.0
            for _ in range(K):
                cur += rng.randint(1, max(2, int(demands[t] * 0.2)))
                row.append(float(cur))
            devs.append(row)
        cid = f"c{i+1}"
        comms.append(Commodity(cid, src, dst, demands, devs))
        plist = k_shortest_paths(network, src, dst, max_paths)
        paths[cid] = plist
    cap = max_theta if max_theta is not None else n_comm
    band_counts = {
        e.id: [[0] + [rng.randint(0, cap) for _ in range(K)] for _ in range(T)]
        for e in network.edges
    }
    module_cost = {
        e.id: [float(rng.randint(1, 9)) for _ in range(T)] for e in network.edges
    }
    inst = Instance(
        network=network,
        commodities=comms,
        path_set=PathSet(paths),
        profile=UncertaintyProfile(num_bands=K, band_counts=band_counts),
        module_capacity=float(rng.randint(*module_capacity_range)),
        module_cost=module_cost,
        num_periods=T,
    )
    inst.validate()
    return inst
