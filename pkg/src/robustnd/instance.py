"""Instance data model, generation and the canonical serialized format.

An instance bundles an undirected network, commodities with per-period
nominal demands and deviation bands, admissible routing paths, per-edge
band-count limits, and module capacity/cost data.  The canonical on-disk
representation is a JSON document whose exact field names are frozen in
FORMAT.md at the repository root.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .paths import generate_paths, walk_nodes


class InstanceError(Exception):
    """Instance data violating a structural invariant."""


class SchemaError(Exception):
    """Canonical-format document that does not match the schema.

    ``path`` points at the offending field, e.g. ``commodities[2].source``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Edge:
    id: str
    a: str
    b: str


@dataclass
class Network:
    """Undirected graph; a path may traverse an edge in either direction."""

    vertices: list[str]
    edges: list[Edge]

    def validate(self) -> None:
        seen_v = set()
        for v in self.vertices:
            if v in seen_v:
                raise InstanceError(f"duplicate vertex id {v!r}")
            seen_v.add(v)
        seen_e = set()
        for e in self.edges:
            if e.id in seen_e:
                raise InstanceError(f"duplicate edge id {e.id!r}")
            seen_e.add(e.id)
            if e.a == e.b:
                raise InstanceError(f"edge {e.id!r} is a self-loop")
            for end in (e.a, e.b):
                if end not in seen_v:
                    raise InstanceError(f"edge {e.id!r} endpoint {end!r} is not a vertex")

    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}


@dataclass
class Commodity:
    """One traffic demand with per-period nominal values and deviation bands.

    ``band_deviations[t]`` lists the deviation value of each band from the
    null band (always 0) up to the highest positive band, in traffic units.
    """

    id: str
    source: str
    target: str
    nominal_demand: list[float]
    band_deviations: list[list[float]]


@dataclass
class PathSet:
    """Admissible simple paths per commodity, as edge-id sequences."""

    paths: dict[str, list[list[str]]]

    def for_commodity(self, commodity_id: str) -> list[list[str]]:
        return self.paths[commodity_id]


@dataclass
class UncertaintyProfile:
    """Per-edge, per-period, per-band limits on how many demands may deviate.

    ``band_counts[e][t]`` has ``num_bands + 1`` entries; index 0 is the null
    band whose count is ignored, indices 1..num_bands limit the number of
    commodities deviating in that band.
    """

    num_bands: int
    band_counts: dict[str, list[list[int]]]


@dataclass
class Instance:
    network: Network
    commodities: list[Commodity]
    path_set: PathSet
    profile: UncertaintyProfile
    module_capacity: float
    module_cost: dict[str, list[float]]
    num_periods: int

    # -- validation -----------------------------------------------------

    def validate(self) -> None:
        self.network.validate()
        if self.num_periods < 1:
            raise InstanceError("num_periods must be at least 1")
        if not self.module_capacity > 0:
            raise InstanceError("module_capacity must be positive")
        t_count = self.num_periods
        vertex_set = set(self.network.vertices)
        edge_map = self.network.edge_by_id()
        n_comm = len(self.commodities)
        seen_c = set()
        for c in self.commodities:
            if c.id in seen_c:
                raise InstanceError(f"duplicate commodity id {c.id!r}")
            seen_c.add(c.id)
            if c.source == c.target:
                raise InstanceError(f"commodity {c.id!r}: source equals target")
            for v in (c.source, c.target):
                if v not in vertex_set:
                    raise InstanceError(f"commodity {c.id!r}: unknown node {v!r}")
            if len(c.nominal_demand) != t_count:
                raise InstanceError(f"commodity {c.id!r}: expected {t_count} demand values")
            if any(not d > 0 for d in c.nominal_demand):
                raise InstanceError(f"commodity {c.id!r}: demands must be positive")
            if len(c.band_deviations) != t_count:
                raise InstanceError(f"commodity {c.id!r}: expected {t_count} deviation rows")
            for t, devs in enumerate(c.band_deviations):
                if len(devs) != self.profile.num_bands + 1:
                    raise InstanceError(
                        f"commodity {c.id!r}: period {t} needs"
                        f" {self.profile.num_bands + 1} deviation values"
                    )
                if devs[0] != 0.0:
                    raise InstanceError(f"commodity {c.id!r}: null-band deviation must be 0")
                degenerate = all(v == 0.0 for v in devs)
                for k in range(1, len(devs)):
                    if degenerate:
                        continue
                    if devs[k] <= devs[k - 1]:
                        raise InstanceError(
                            f"commodity {c.id!r}: deviations must increase with the band index"
                        )
        # paths
        for c in self.commodities:
            plist = self.path_set.paths.get(c.id)
            if not plist:
                raise InstanceError(f"commodity {c.id!r}: no admissible paths")
            seen_p = set()
            for path in plist:
                key = tuple(path)
                if key in seen_p:
                    raise InstanceError(f"commodity {c.id!r}: duplicate path {list(key)}")
                seen_p.add(key)
                nodes = walk_nodes(edge_map, c.source, path)
                if nodes is None or nodes[-1] != c.target:
                    raise InstanceError(
                        f"commodity {c.id!r}: path {path} does not connect"
                        f" {c.source!r} to {c.target!r}"
                    )
                if len(set(nodes)) != len(nodes):
                    raise InstanceError(f"commodity {c.id!r}: path {path} repeats a vertex")
        # uncertainty profile
        if self.profile.num_bands < 1:
            raise InstanceError("profile must have at least one positive band")
        for e in self.network.edges:
            rows = self.profile.band_counts.get(e.id)
            if rows is None or len(rows) != t_count:
                raise InstanceError(f"edge {e.id!r}: band counts missing or wrong period count")
            for t, row in enumerate(rows):
                if len(row) != self.profile.num_bands + 1:
                    raise InstanceError(f"edge {e.id!r}: period {t} band-count row wrong length")
                for k, v in enumerate(row):
                    if v < 0 or v != int(v):
                        raise InstanceError(f"edge {e.id!r}: band counts must be non-negative integers")
                    if k >= 1 and v > n_comm:
                        raise InstanceError(
                            f"edge {e.id!r}: band {k} count {v} exceeds commodity count {n_comm}"
                        )
            costs = self.module_cost.get(e.id)
            if costs is None or len(costs) != t_count:
                raise InstanceError(f"edge {e.id!r}: module costs missing or wrong period count")
            if any(g < 0 for g in costs):
                raise InstanceError(f"edge {e.id!r}: module costs must be non-negative")

    # -- convenience accessors used by the model layer --------------------

    def demand(self, commodity_idx: int, t: int) -> float:
        return self.commodities[commodity_idx].nominal_demand[t]

    def deviation(self, commodity_idx: int, t: int, band: int) -> float:
        return self.commodities[commodity_idx].band_deviations[t][band]

    def band_count(self, edge_id: str, t: int, band: int) -> int:
        return self.profile.band_counts[edge_id][t][band]

    def cost(self, edge_id: str, t: int) -> float:
        return self.module_cost[edge_id][t]


# -- canonical serialized format ------------------------------------------


def serialize_instance(instance: Instance) -> str:
    """Render an instance as the canonical JSON document (deterministic bytes)."""
    doc = {
        "network": {
            "nodes": list(instance.network.vertices),
            "edges": [{"id": e.id, "a": e.a, "b": e.b} for e in instance.network.edges],
        },
        "commodities": [
            {
                "id": c.id,
                "source": c.source,
                "target": c.target,
                "nominal_demand": list(c.nominal_demand),
                "band_deviations": [list(row) for row in c.band_deviations],
            }
            for c in instance.commodities
        ],
        "paths": {cid: [list(p) for p in plist] for cid, plist in instance.path_set.paths.items()},
        "uncertainty": {
            "num_bands": instance.profile.num_bands,
            "band_counts": {
                eid: [list(row) for row in rows]
                for eid, rows in instance.profile.band_counts.items()
            },
        },
        "module_capacity": instance.module_capacity,
        "module_cost": {eid: list(v) for eid, v in instance.module_cost.items()},
        "num_periods": instance.num_periods,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _need(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise SchemaError(f"{path}.{key}" if path else key, "missing required field")
    val = doc[key]
    where = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise SchemaError(where, "expected a number")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise SchemaError(where, "expected an integer")
        return val
    if not isinstance(val, kind):
        raise SchemaError(where, f"expected {kind.__name__}")
    return val


def _num_list(raw, path: str) -> list[float]:
    if not isinstance(raw, list):
        raise SchemaError(path, "expected a list of numbers")
    out = []
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"{path}[{i}]", "expected a number")
        out.append(float(v))
    return out


def deserialize_instance(text: str) -> Instance:
    """Parse the canonical JSON document; invalid documents raise SchemaError
    (malformed shape) or InstanceError (invariant violation)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("<document>", f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("<document>", "top level must be an object")

    net_doc = _need(doc, "network", dict, "")
    nodes = _need(net_doc, "nodes", list, "network")
    for i, v in enumerate(nodes):
        if not isinstance(v, str):
            raise SchemaError(f"network.nodes[{i}]", "expected a string")
    edges_doc = _need(net_doc, "edges", list, "network")
    edges = []
    for i, e in enumerate(edges_doc):
        if not isinstance(e, dict):
            raise SchemaError(f"network.edges[{i}]", "expected an object")
        edges.append(
            Edge(
                id=_need(e, "id", str, f"network.edges[{i}]"),
                a=_need(e, "a", str, f"network.edges[{i}]"),
                b=_need(e, "b", str, f"network.edges[{i}]"),
            )
        )
    network = Network(vertices=list(nodes), edges=edges)

    comm_doc = _need(doc, "commodities", list, "")
    commodities = []
    for i, c in enumerate(comm_doc):
        where = f"commodities[{i}]"
        if not isinstance(c, dict):
            raise SchemaError(where, "expected an object")
        devs_raw = _need(c, "band_deviations", list, where)
        devs = [_num_list(row, f"{where}.band_deviations[{t}]") for t, row in enumerate(devs_raw)]
        commodities.append(
            Commodity(
                id=_need(c, "id", str, where),
                source=_need(c, "source", str, where),
                target=_need(c, "target", str, where),
                nominal_demand=_num_list(
                    _need(c, "nominal_demand", list, where), f"{where}.nominal_demand"
                ),
                band_deviations=devs,
            )
        )

    paths_doc = _need(doc, "paths", dict, "")
    paths: dict[str, list[list[str]]] = {}
    for cid, plist in paths_doc.items():
        if not isinstance(plist, list):
            raise SchemaError(f"paths.{cid}", "expected a list of paths")
        out = []
        for i, p in enumerate(plist):
            if not isinstance(p, list) or any(not isinstance(e, str) for e in p):
                raise SchemaError(f"paths.{cid}[{i}]", "expected a list of edge ids")
            out.append(list(p))
        paths[cid] = out

    unc = _need(doc, "uncertainty", dict, "")
    num_bands = _need(unc, "num_bands", int, "uncertainty")
    counts_doc = _need(unc, "band_counts", dict, "uncertainty")
    band_counts: dict[str, list[list[int]]] = {}
    for eid, rows in counts_doc.items():
        if not isinstance(rows, list):
            raise SchemaError(f"uncertainty.band_counts.{eid}", "expected a list")
        parsed_rows = []
        for t, row in enumerate(rows):
            where = f"uncertainty.band_counts.{eid}[{t}]"
            if not isinstance(row, list):
                raise SchemaError(where, "expected a list of integers")
            vals = []
            for k, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, int):
                    raise SchemaError(f"{where}[{k}]", "expected an integer")
                vals.append(v)
            parsed_rows.append(vals)
        band_counts[eid] = parsed_rows

    module_capacity = _need(doc, "module_capacity", float, "")
    cost_doc = _need(doc, "module_cost", dict, "")
    module_cost = {
        eid: _num_list(v, f"module_cost.{eid}") for eid, v in cost_doc.items()
    }
    num_periods = _need(doc, "num_periods", int, "")

    instance = Instance(
        network=network,
        commodities=commodities,
        path_set=PathSet(paths=paths),
        profile=UncertaintyProfile(num_bands=num_bands, band_counts=band_counts),
        module_capacity=module_capacity,
        module_cost=module_cost,
        num_periods=num_periods,
    )
    instance.validate()
    return instance


# -- multiperiod / uncertainty generation ----------------------------------


def _modal_capacity(capacities: dict[str, float]) -> float:
    counts: dict[float, int] = {}
    for v in capacities.values():
        counts[v] = counts.get(v, 0) + 1
    best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return best[0][0]


def generate_multiperiod(
    base,
    periods: int,
    growth: float = 1.0,
    deviation_fraction: float = 0.1,
    bands: int = 1,
    theta_fraction: float = 0.2,
    seed: int = 0,
    num_paths: int = 5,
    cost_decay: float = 1.0,
    module_capacity: float | None = None,
) -> Instance:
    """Expand parsed single-period data into a multiperiod robust instance.

    Conventions (the source data carries no multiperiod information):
    demands grow geometrically per period, the deviation range is an equal
    split of ``deviation_fraction * demand`` across ``bands`` positive bands,
    and every positive band admits ``ceil(theta_fraction * |C|)`` deviating
    commodities.  Output is deterministic; ``seed`` is recorded for future
    randomized variants and currently influences nothing.
    """
    del seed  # reserved: all current generation rules are closed-form
    if periods < 1:
        raise InstanceError("periods must be at least 1")
    if not 0 <= deviation_fraction < 1:
        raise InstanceError("deviation_fraction must lie in [0, 1)")
    if bands < 1:
        raise InstanceError("bands must be at least 1")
    if not base.demands:
        raise InstanceError("no demands in the source data")

    n_comm = len(base.demands)
    commodities = []
    for did, src, dst, value in base.demands:
        demand_row = [value * growth ** t for t in range(periods)]
        devs = [
            [(k / bands) * deviation_fraction * demand_row[t] for k in range(bands + 1)]
            for t in range(periods)
        ]
        commodities.append(
            Commodity(
                id=did,
                source=src,
                target=dst,
                nominal_demand=demand_row,
                band_deviations=devs,
            )
        )

    path_set = generate_paths(
        base.network, [(c.id, c.source, c.target) for c in commodities], num_paths
    )

    theta = math.ceil(theta_fraction * n_comm)
    band_counts = {
        e.id: [[0] + [theta] * bands for _ in range(periods)] for e in base.network.edges
    }
    module_cost = {
        e.id: [base.module_cost[e.id] * cost_decay ** t for t in range(periods)]
        for e in base.network.edges
    }
    capacity = module_capacity if module_capacity is not None else _modal_capacity(base.module_capacity)

    instance = Instance(
        network=base.network,
        commodities=commodities,
        path_set=path_set,
        profile=UncertaintyProfile(num_bands=bands, band_counts=band_counts),
        module_capacity=capacity,
        module_cost=module_cost,
        num_periods=periods,
    )
    instance.validate()
    return instance
