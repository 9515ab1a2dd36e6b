"""Reader for the SNDlib native (plain text) format.

Understands the NODES, LINKS and DEMANDS sections; any other section is
skipped and reported in the warning list.  Multi-module links are reduced to
their first capacity/cost entry, falling back to the pre-installed
capacity/cost pair when no module list is given.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .instance import Edge, InstanceError, Network


class SndlibParseError(Exception):
    """Syntactic problem; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class SndlibValidationError(Exception):
    """Structurally parsed document with inconsistent references."""


@dataclass
class SndlibData:
    """Parse result: topology plus single-period demand and cost data."""

    network: Network
    demands: list[tuple[str, str, str, float]]  # (id, source, target, value)
    module_capacity: dict[str, float]  # per edge, first module of the link
    module_cost: dict[str, float]  # per edge, first module of the link
    warnings: list[str] = field(default_factory=list)


_KNOWN = {"NODES", "LINKS", "DEMANDS"}


def _tokens(line: str) -> list[str]:
    return line.replace("(", " ( ").replace(")", " ) ").split()


def _floats(toks: list[str], line_no: int) -> list[float]:
    out = []
    for t in toks:
        try:
            out.append(float(t))
        except ValueError:
            if t.upper() == "UNLIMITED":
                out.append(float("inf"))
            else:
                raise SndlibParseError(line_no, f"expected a number, got {t!r}")
    return out


def parse_sndlib(text: str) -> SndlibData:
    """Parse an SNDlib native document into topology, demands and costs.

    Sections may appear in any order; cross-references are validated after
    the whole document has been read.
    """
    nodes: list[str] = []
    links: list[tuple[int, str, str, str, list[str]]] = []  # (line, id, a, b, rest)
    demands: list[tuple[int, str, str, str, float]] = []
    warnings: list[str] = []

    section: str | None = None
    skip_depth = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("?"):
            continue  # format header
        if skip_depth > 0:
            skip_depth += line.count("(") - line.count(")")
            continue
        if section is None:
            toks = line.split()
            name = toks[0].upper()
            rest = "".join(toks[1:])
            if rest not in ("(", ""):
                raise SndlibParseError(line_no, f"malformed section header {line!r}")
            if rest == "" and len(toks) == 1 and name != ")":
                raise SndlibParseError(line_no, f"malformed section header {line!r}")
            if name in _KNOWN:
                section = name
            else:
                warnings.append(f"ignoring unsupported section {name!r} (line {line_no})")
                skip_depth = 1
            continue
        if line == ")":
            section = None
            continue
        toks = _tokens(line)
        if section == "NODES":
            nodes.append(toks[0])
        elif section == "LINKS":
            if len(toks) < 5 or toks[1] != "(" or toks[4] != ")":
                raise SndlibParseError(line_no, f"malformed link line {line!r}")
            links.append((line_no, toks[0], toks[2], toks[3], toks[5:]))
        elif section == "DEMANDS":
            if len(toks) < 7 or toks[1] != "(" or toks[4] != ")":
                raise SndlibParseError(line_no, f"malformed demand line {line!r}")
            value = _floats([toks[6]], line_no)[0]
            demands.append((line_no, toks[0], toks[2], toks[3], value))
    if section is not None:
        raise SndlibParseError(line_no, f"section {section} never closed")
    if skip_depth > 0:
        raise SndlibParseError(line_no, "unterminated ignored section")

    node_set = set(nodes)
    edges: list[Edge] = []
    capacity: dict[str, float] = {}
    cost: dict[str, float] = {}
    for line_no, lid, a, b, rest in links:
        for end in (a, b):
            if end not in node_set:
                raise SndlibValidationError(f"link {lid!r} references unknown node {end!r}")
        # rest: preCap preCost routingCost setupCost ( c1 p1 c2 p2 ... )
        module_pairs: list[float] = []
        head: list[str] = []
        if "(" in rest:
            i = rest.index("(")
            head = rest[:i]
            inner = rest[i + 1 :]
            if ")" in inner:
                inner = inner[: inner.index(")")]
            module_pairs = _floats(inner, line_no)
        else:
            head = rest
        head_vals = _floats(head, line_no) if head else []
        if len(module_pairs) >= 2:
            cap, price = module_pairs[0], module_pairs[1]
        elif len(head_vals) >= 2 and head_vals[0] > 0:
            cap, price = head_vals[0], head_vals[1]
        else:
            raise SndlibParseError(line_no, f"link {lid!r} has no usable capacity/cost module")
        edges.append(Edge(id=lid, a=a, b=b))
        capacity[lid] = cap
        cost[lid] = price

    network = Network(vertices=nodes, edges=edges)
    try:
        network.validate()
    except InstanceError as exc:
        raise SndlibValidationError(str(exc)) from exc

    out_demands: list[tuple[str, str, str, float]] = []
    for line_no, did, src, dst, value in demands:
        for end in (src, dst):
            if end not in node_set:
                raise SndlibValidationError(
                    f"demand {did!r} references unknown node {end!r}"
                )
        out_demands.append((did, src, dst, value))

    return SndlibData(
        network=network,
        demands=out_demands,
        module_capacity=capacity,
        module_cost=cost,
        warnings=warnings,
    )
