"""Loopless shortest-path generation (Yen's algorithm, hop-count metric).

Paths are ordered by (hop count, lexicographic edge-id sequence), which makes
the generated path lists deterministic for a given network.
"""

from __future__ import annotations

import heapq


class PathGenerationError(Exception):
    """Raised when a commodity's endpoints are not connected."""


def walk_nodes(edge_map, source: str, path: list[str]) -> list[str] | None:
    """Resolve the vertex sequence of an edge-id path starting at ``source``.

    Returns None when an edge is unknown or does not touch the current node.
    """
    nodes = [source]
    cur = source
    for eid in path:
        e = edge_map.get(eid)
        if e is None:
            return None
        if e.a == cur:
            cur = e.b
        elif e.b == cur:
            cur = e.a
        else:
            return None
        nodes.append(cur)
    return nodes


def _adjacency(network) -> dict[str, list[tuple[str, str]]]:
    adj: dict[str, list[tuple[str, str]]] = {v: [] for v in network.vertices}
    for e in network.edges:
        adj[e.a].append((e.id, e.b))
        adj[e.b].append((e.id, e.a))
    for lst in adj.values():
        lst.sort()
    return adj


def _shortest(
    adj,
    source: str,
    target: str,
    banned_nodes: frozenset[str],
    banned_edges: frozenset[str],
) -> tuple[str, ...] | None:
    """Hop-minimal path from source to target, lexicographically smallest
    edge sequence among ties; banned nodes/edges are skipped."""
    if source == target:
        return ()
    best: set[str] = set()
    heap: list[tuple[int, tuple[str, ...], str]] = [(0, (), source)]
    while heap:
        dist, edges, node = heapq.heappop(heap)
        if node in best:
            continue
        best.add(node)
        if node == target:
            return edges
        for eid, other in adj[node]:
            if eid in banned_edges or other in banned_nodes or other in best:
                continue
            heapq.heappush(heap, (dist + 1, edges + (eid,), other))
    return None


def k_shortest_paths(network, source: str, target: str, k: int) -> list[list[str]]:
    """Up to ``k`` loopless paths in (hop count, lexicographic) order."""
    if k < 1:
        raise ValueError("k must be at least 1")
    adj = _adjacency(network)
    if source not in adj or target not in adj:
        return []
    edge_map = network.edge_by_id()
    first = _shortest(adj, source, target, frozenset(), frozenset())
    if first is None:
        return []
    accepted: list[tuple[str, ...]] = [first]
    candidates: set[tuple[str, ...]] = set()
    while len(accepted) < k:
        prev = accepted[-1]
        prev_nodes = walk_nodes(edge_map, source, list(prev))
        for spur_idx in range(len(prev_nodes) - 1):
            root = prev[:spur_idx]
            spur_node = prev_nodes[spur_idx]
            banned_edges = {
                p[spur_idx] for p in accepted if len(p) > spur_idx and p[:spur_idx] == root
            }
            banned_edges |= {
                p[spur_idx] for p in candidates if len(p) > spur_idx and p[:spur_idx] == root
            }
            banned_nodes = frozenset(prev_nodes[:spur_idx])
            spur = _shortest(adj, spur_node, target, banned_nodes, frozenset(banned_edges))
            if spur is None:
                continue
            cand = root + spur
            if cand not in candidates and cand not in set(accepted):
                candidates.add(cand)
        if not candidates:
            break
        nxt = min(candidates, key=lambda p: (len(p), p))
        candidates.remove(nxt)
        accepted.append(nxt)
    return [list(p) for p in accepted]


def generate_paths(network, commodities, k: int):
    """Build a PathSet with up to ``k`` admissible paths per commodity.

    ``commodities`` is an iterable of (id, source, target) triples or objects
    with those attributes.  A disconnected pair raises PathGenerationError
    naming the commodity.
    """
    from .instance import PathSet  # local import to avoid a cycle

    result: dict[str, list[list[str]]] = {}
    for item in commodities:
        if isinstance(item, tuple):
            cid, src, dst = item
        else:
            cid, src, dst = item.id, item.source, item.target
        plist = k_shortest_paths(network, src, dst, k)
        if not plist:
            raise PathGenerationError(
                f"commodity {cid!r}: no path between {src!r} and {dst!r}"
            )
        result[cid] = plist
    return PathSet(paths=result)
