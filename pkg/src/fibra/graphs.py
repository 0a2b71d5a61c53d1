"""Directed multigraphs, phase-space labels, and maps between labelled networks.

A network is a finite directed multigraph together with a coordinate phase
space attached to each node.  States of the whole network live in the product
of the node spaces, realised as a flat float vector under a deterministic
(lexicographic) node order.  Maps of networks act contravariantly on these
flat vectors by slice copying.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import PreconditionError

NodeId = str
EdgeId = str

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhaseSpace:
    """Coordinate phase space of a single node: R^dim, or the circle (angle mod 2pi)."""

    kind: str  # "R" | "S1"
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("R", "S1"):
            raise ValueError(f"unknown phase-space kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("phase-space dim must be >= 1")
        if self.kind == "S1" and self.dim != 1:
            raise ValueError("circle phase space has dim 1")

    @property
    def name(self) -> str:
        return "S1" if self.kind == "S1" else f"R{self.dim}"

    @property
    def is_circle(self) -> bool:
        return self.kind == "S1"


def euclidean(dim: int) -> PhaseSpace:
    return PhaseSpace("R", dim)


def circle() -> PhaseSpace:
    return PhaseSpace("S1", 1)


R1 = euclidean(1)
R2 = euclidean(2)
S1 = circle()


@dataclass(frozen=True)
class Edge:
    edge_id: EdgeId
    src: NodeId
    tgt: NodeId


@dataclass(frozen=True)
class Graph:
    """Finite directed multigraph; loops and parallel edges allowed."""

    nodes: tuple[NodeId, ...]
    edges: tuple[Edge, ...]

    @classmethod
    def build(cls, nodes: Iterable[NodeId], edges: Iterable[tuple[str, str, str]]) -> "Graph":
        """Construct from node ids and (edge_id, src, tgt) triples."""
        return cls(tuple(nodes), tuple(Edge(*e) for e in edges))

    def in_edges(self, node: NodeId) -> tuple[Edge, ...]:
        """In-edges of ``node`` sorted by edge id."""
        return _in_edge_map(self).get(node, ())

    def edge_by_id(self, edge_id: EdgeId) -> Edge:
        return _edge_index(self)[edge_id]

    @property
    def node_set(self) -> frozenset[NodeId]:
        return frozenset(self.nodes)


@lru_cache(maxsize=None)
def _in_edge_map(graph: Graph) -> dict[NodeId, tuple[Edge, ...]]:
    acc: dict[NodeId, list[Edge]] = {a: [] for a in graph.nodes}
    for e in graph.edges:
        acc.setdefault(e.tgt, []).append(e)
    return {a: tuple(sorted(es, key=lambda e: e.edge_id)) for a, es in acc.items()}


@lru_cache(maxsize=None)
def _edge_index(graph: Graph) -> dict[EdgeId, Edge]:
    return {e.edge_id: e for e in graph.edges}


@dataclass(frozen=True)
class Network:
    """A graph plus a total assignment of phase spaces to its nodes."""

    graph: Graph
    phase: Mapping[NodeId, PhaseSpace]

    def space(self, node: NodeId) -> PhaseSpace:
        return self.phase[node]

    def in_edges(self, node: NodeId) -> tuple[Edge, ...]:
        return self.graph.in_edges(node)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return self.graph.nodes

    def is_same(self, other: "Network") -> bool:
        """Structural equality up to node/edge listing order."""
        return (
            set(self.graph.nodes) == set(other.graph.nodes)
            and set(self.graph.edges) == set(other.graph.edges)
            and dict(self.phase) == dict(other.phase)
        )


def network(nodes: Iterable[tuple[str, PhaseSpace]], edges: Iterable[tuple[str, str, str]]) -> Network:
    """Build a network from (node_id, space) pairs and (edge_id, src, tgt) triples."""
    pairs = list(nodes)
    return Network(Graph.build((n for n, _ in pairs), edges), {n: s for n, s in pairs})


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str


def validate_network(net: Network) -> list[Violation]:
    """Report every violated structural invariant; an empty list means valid."""
    out: list[Violation] = []
    seen_nodes: set[str] = set()
    for a in net.graph.nodes:
        if a in seen_nodes:
            out.append(Violation("duplicate-node", a, f"node id {a!r} repeated"))
        seen_nodes.add(a)
    seen_edges: set[str] = set()
    for e in net.graph.edges:
        if e.edge_id in seen_edges:
            out.append(Violation("duplicate-edge", e.edge_id, f"edge id {e.edge_id!r} repeated"))
        seen_edges.add(e.edge_id)
        if e.src not in seen_nodes and e.src not in net.graph.nodes:
            out.append(Violation("dangling-src", e.edge_id, f"edge {e.edge_id!r} has unknown source {e.src!r}"))
        if e.tgt not in net.graph.nodes:
            out.append(Violation("dangling-tgt", e.edge_id, f"edge {e.edge_id!r} has unknown target {e.tgt!r}"))
    for a in net.graph.nodes:
        if a not in net.phase:
            out.append(Violation("missing-phase", a, f"node {a!r} has no phase space"))
    for a in net.phase:
        if a not in net.graph.node_set:
            out.append(Violation("extra-phase", a, f"phase space assigned to unknown node {a!r}"))
    return out


@dataclass(frozen=True)
class NetworkMap:
    """A pair of node/edge maps between networks.

    Validity (graph homomorphism plus phase compatibility) is checked by
    :func:`check_network_map`, not enforced on construction.
    """

    domain: Network
    codomain: Network
    node_map: Mapping[NodeId, NodeId]
    edge_map: Mapping[EdgeId, EdgeId]

    def node(self, a: NodeId) -> NodeId:
        return self.node_map[a]

    def edge(self, e: EdgeId) -> EdgeId:
        return self.edge_map[e]


def identity_map(net: Network) -> NetworkMap:
    return NetworkMap(
        net,
        net,
        {a: a for a in net.graph.nodes},
        {e.edge_id: e.edge_id for e in net.graph.edges},
    )


def check_network_map(m: NetworkMap) -> list[Violation]:
    """Report every homomorphism or phase-compatibility violation."""
    out: list[Violation] = []
    cod_nodes = m.codomain.graph.node_set
    cod_edges = {e.edge_id: e for e in m.codomain.graph.edges}
    for a in m.domain.graph.nodes:
        if a not in m.node_map:
            out.append(Violation("unmapped-node", a, f"node {a!r} has no image"))
        elif m.node_map[a] not in cod_nodes:
            out.append(Violation("bad-node-image", a, f"node {a!r} maps outside the codomain"))
    for e in m.domain.graph.edges:
        if e.edge_id not in m.edge_map:
            out.append(Violation("unmapped-edge", e.edge_id, f"edge {e.edge_id!r} has no image"))
        elif m.edge_map[e.edge_id] not in cod_edges:
            out.append(Violation("bad-edge-image", e.edge_id, f"edge {e.edge_id!r} maps outside the codomain"))
    if out:
        return out
    for e in m.domain.graph.edges:
        img = cod_edges[m.edge_map[e.edge_id]]
        if m.node_map[e.src] != img.src or m.node_map[e.tgt] != img.tgt:
            out.append(
                Violation(
                    "homomorphism",
                    e.edge_id,
                    f"edge {e.edge_id!r}: endpoints map to ({m.node_map[e.src]!r},{m.node_map[e.tgt]!r}) "
                    f"but its image {img.edge_id!r} runs ({img.src!r},{img.tgt!r})",
                )
            )
    for a in m.domain.graph.nodes:
        if m.codomain.space(m.node_map[a]) != m.domain.space(a):
            out.append(
                Violation(
                    "phase",
                    a,
                    f"node {a!r}: domain space {m.domain.space(a).name} != "
                    f"codomain space {m.codomain.space(m.node_map[a]).name} at {m.node_map[a]!r}",
                )
            )
    return out


def compose_maps(m1: NetworkMap, m2: NetworkMap) -> NetworkMap:
    """Diagrammatic composite of m1: A -> B and m2: B -> C."""
    if not m1.codomain.is_same(m2.domain):
        raise PreconditionError("compose_maps: codomain of the first map is not the domain of the second")
    return NetworkMap(
        m1.domain,
        m2.codomain,
        {a: m2.node_map[b] for a, b in m1.node_map.items()},
        {e: m2.edge_map[f] for e, f in m1.edge_map.items()},
    )


@dataclass(frozen=True)
class StateIndex:
    """Flat-vector layout of the total state of a network.

    Nodes are laid out in lexicographic id order; each node owns a contiguous
    slice of length equal to its phase-space dimension.
    """

    order: tuple[NodeId, ...]
    slices: Mapping[NodeId, tuple[int, int]]
    spaces: Mapping[NodeId, PhaseSpace]
    total_dim: int

    def slice_of(self, node: NodeId) -> slice:
        off, length = self.slices[node]
        return slice(off, off + length)

    def circle_mask(self) -> np.ndarray:
        mask = np.zeros(self.total_dim, dtype=bool)
        for a in self.order:
            if self.spaces[a].is_circle:
                mask[self.slice_of(a)] = True
        return mask

    def pack(self, by_node: Mapping[NodeId, np.ndarray]) -> np.ndarray:
        x = np.zeros(self.total_dim)
        for a in self.order:
            x[self.slice_of(a)] = np.asarray(by_node[a], dtype=float)
        return x

    def unpack(self, x: np.ndarray) -> dict[NodeId, np.ndarray]:
        return {a: np.asarray(x)[self.slice_of(a)].copy() for a in self.order}


def total_phase_space(net: Network) -> StateIndex:
    """Deterministic flat layout of the product of the node phase spaces."""
    order = tuple(sorted(net.graph.nodes))
    slices: dict[NodeId, tuple[int, int]] = {}
    off = 0
    for a in order:
        d = net.space(a).dim
        slices[a] = (off, d)
        off += d
    return StateIndex(order, slices, {a: net.space(a) for a in order}, off)


class PhaseSpaceMap:
    """Coordinate realisation of the contravariant total-state map of a network map.

    Sends a codomain state x' to the domain state x with x_a = x'_{phi(a)}.
    The map is linear in coordinates, so its differential is the same slice
    copy acting on tangent vectors.
    """

    def __init__(self, nmap: NetworkMap):
        self.network_map = nmap
        self.domain_index = total_phase_space(nmap.domain)
        self.codomain_index = total_phase_space(nmap.codomain)
        self._pairs = [
            (self.domain_index.slice_of(a), self.codomain_index.slice_of(nmap.node_map[a]))
            for a in self.domain_index.order
        ]

    def __call__(self, x_codomain: np.ndarray) -> np.ndarray:
        x_codomain = np.asarray(x_codomain, dtype=float)
        if x_codomain.shape != (self.codomain_index.total_dim,):
            raise PreconditionError(
                f"state has dimension {x_codomain.shape}, expected ({self.codomain_index.total_dim},)"
            )
        out = np.empty(self.domain_index.total_dim)
        for dst, src in self._pairs:
            out[dst] = x_codomain[src]
        return out

    def differential(self, v_codomain: np.ndarray) -> np.ndarray:
        """Tangent-level action; identical slice copy since the map is linear."""
        return self(v_codomain)


def phase_space_map(m: NetworkMap) -> PhaseSpaceMap:
    violations = check_network_map(m)
    if violations:
        raise PreconditionError(
            "phase_space_map requires a valid network map; first violation: " + violations[0].message
        )
    return PhaseSpaceMap(m)


def wrap_angle(theta: np.ndarray | float) -> np.ndarray | float:
    """Wrap angles to (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta) + np.pi, TWO_PI) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def circle_distance(a: float, b: float) -> float:
    """Distance on the circle between two (possibly unwrapped) angles."""
    d = float(np.mod(a - b, TWO_PI))
    return min(d, TWO_PI - d)


def coordinate_distance(x: np.ndarray, y: np.ndarray, index: StateIndex) -> float:
    """Max over coordinates of the per-coordinate distance, circle-aware."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    worst = 0.0
    for a in index.order:
        sl = index.slice_of(a)
        if index.spaces[a].is_circle:
            worst = max(worst, circle_distance(float(x[sl][0]), float(y[sl][0])))
        else:
            diff = np.abs(x[sl] - y[sl])
            if diff.size:
                worst = max(worst, float(diff.max()))
    return worst
