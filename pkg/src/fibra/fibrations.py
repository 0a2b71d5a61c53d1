"""Fibration checking, factorization, balanced partitions, and quotient networks.

A map of graphs is a fibration when every codomain edge ending at the image
of a node lifts uniquely to an in-edge of that node.  Surjective fibrations
carve synchrony subspaces (polydiagonals) out of the total state space;
injective fibrations exhibit driving subsystems.  The coarsest balanced
partition is computed by iterated refinement of the phase-homogeneity
partition and realised as a quotient network with a projection fibration.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import FibrationRequired, PreconditionError
from .graphs import (
    Edge,
    Graph,
    Network,
    NetworkMap,
    NodeId,
    StateIndex,
    check_network_map,
    circle_distance,
    total_phase_space,
)
from .input_trees import symmetry_groupoid


@dataclass(frozen=True)
class LiftFailure:
    node: NodeId
    codomain_edge: str
    lift_count: int


@dataclass(frozen=True)
class FibrationReport:
    is_fibration: bool
    failures: tuple[LiftFailure, ...]
    surjective_on_nodes: bool
    injective_on_nodes: bool
    surjective_on_edges: bool
    injective_on_edges: bool


def check_fibration(m: NetworkMap) -> FibrationReport:
    """Count lifts of every codomain in-edge at every domain node; unique lifts everywhere = fibration."""
    violations = check_network_map(m)
    if violations:
        raise PreconditionError(
            "check_fibration requires a valid network map; first violation: " + violations[0].message
        )
    failures: list[LiftFailure] = []
    for a in sorted(m.domain.graph.nodes):
        image = m.node(a)
        preimages_by_edge = Counter(m.edge(e.edge_id) for e in m.domain.in_edges(a))
        for e_prime in m.codomain.in_edges(image):
            n = preimages_by_edge.get(e_prime.edge_id, 0)
            if n != 1:
                failures.append(LiftFailure(a, e_prime.edge_id, n))
    node_images = set(m.node_map.values())
    edge_images = set(m.edge_map.values())
    return FibrationReport(
        is_fibration=not failures,
        failures=tuple(failures),
        surjective_on_nodes=node_images == m.codomain.graph.node_set,
        injective_on_nodes=len(node_images) == len(m.node_map),
        surjective_on_edges=edge_images == {e.edge_id for e in m.codomain.graph.edges},
        injective_on_edges=len(edge_images) == len(m.edge_map),
    )


def factorize(m: NetworkMap) -> tuple[NetworkMap, NetworkMap]:
    """Split a fibration into a surjection onto its image followed by the inclusion."""
    if not check_fibration(m).is_fibration:
        raise FibrationRequired("factorize requires a fibration")
    image_nodes = tuple(sorted(set(m.node_map.values())))
    image_edge_ids = set(m.edge_map.values())
    image_edges = tuple(
        sorted((e for e in m.codomain.graph.edges if e.edge_id in image_edge_ids), key=lambda e: e.edge_id)
    )
    image_net = Network(
        Graph(image_nodes, image_edges),
        {a: m.codomain.space(a) for a in image_nodes},
    )
    surjection = NetworkMap(m.domain, image_net, dict(m.node_map), dict(m.edge_map))
    injection = NetworkMap(
        image_net,
        m.codomain,
        {a: a for a in image_nodes},
        {e.edge_id: e.edge_id for e in image_edges},
    )
    return surjection, injection


@dataclass(frozen=True)
class Partition:
    """Disjoint node blocks covering a node set; block id = least member."""

    blocks: tuple[tuple[NodeId, ...], ...]

    @classmethod
    def of(cls, blocks: Iterable[Iterable[NodeId]]) -> "Partition":
        materialized = [tuple(sorted(b)) for b in blocks]
        return cls(tuple(sorted((b for b in materialized if b), key=lambda b: b[0])))

    def block_of(self, node: NodeId) -> tuple[NodeId, ...]:
        for b in self.blocks:
            if node in b:
                return b
        raise PreconditionError(f"node {node!r} not covered by the partition")

    def block_id(self, node: NodeId) -> NodeId:
        return self.block_of(node)[0]

    def block_index(self) -> dict[NodeId, NodeId]:
        return {a: b[0] for b in self.blocks for a in b}

    def refines(self, other: "Partition") -> bool:
        """True when every block of self lies inside a block of other."""
        other_idx = other.block_index()
        return all(len({other_idx[a] for a in b}) == 1 for b in self.blocks)

    def node_set(self) -> frozenset[NodeId]:
        return frozenset(a for b in self.blocks for a in b)


def _check_phase_homogeneous(net: Network, p: Partition) -> None:
    if p.node_set() != net.graph.node_set:
        raise PreconditionError("partition does not cover exactly the node set")
    for b in p.blocks:
        spaces = {net.space(a) for a in b}
        if len(spaces) > 1:
            raise PreconditionError(f"block {b[0]!r} mixes phase spaces")


@dataclass(frozen=True)
class BalanceWitness:
    block: NodeId
    left: NodeId
    right: NodeId


def _in_block_signature(net: Network, idx: Mapping[NodeId, NodeId], a: NodeId) -> tuple:
    return tuple(sorted(idx[e.src] for e in net.in_edges(a)))


def is_balanced(net: Network, p: Partition) -> tuple[bool, BalanceWitness | None]:
    """True iff the induced quotient map is a fibration.

    Equivalent formulation checked here: within each block, all members see
    the same multiset of source blocks over their in-edges.  The witness
    names the first offending pair.
    """
    _check_phase_homogeneous(net, p)
    idx = p.block_index()
    for b in p.blocks:
        ref_sig = _in_block_signature(net, idx, b[0])
        for a in b[1:]:
            if _in_block_signature(net, idx, a) != ref_sig:
                return False, BalanceWitness(b[0], b[0], a)
    return True, None


def quotient_of(net: Network, p: Partition) -> tuple[Network, NetworkMap]:
    """Quotient network of a balanced partition plus the projection fibration.

    The quotient reuses the in-edges of each block's least member, with edge
    ids prefixed by the block id; member in-edges are matched to those edges
    within same-source-block groups in edge-id order.
    """
    ok, witness = is_balanced(net, p)
    if not ok:
        assert witness is not None
        raise PreconditionError(
            f"partition is not balanced: nodes {witness.left!r} and {witness.right!r} "
            f"in block {witness.block!r} have mismatched in-edge block multisets"
        )
    idx = p.block_index()
    q_nodes = tuple(sorted(b[0] for b in p.blocks))
    q_edges: list[Edge] = []
    rep_edge_groups: dict[NodeId, dict[NodeId, list[str]]] = {}
    for b in p.blocks:
        rep = b[0]
        groups: dict[NodeId, list[str]] = {}
        for e in net.in_edges(rep):
            groups.setdefault(idx[e.src], []).append(e.edge_id)
            q_edges.append(Edge(f"{rep}:{e.edge_id}", idx[e.src], rep))
        rep_edge_groups[rep] = groups
    quotient = Network(
        Graph(q_nodes, tuple(sorted(q_edges, key=lambda e: e.edge_id))),
        {b[0]: net.space(b[0]) for b in p.blocks},
    )
    edge_map: dict[str, str] = {}
    for b in p.blocks:
        rep = b[0]
        for a in b:
            groups: dict[NodeId, list[str]] = {}
            for e in net.in_edges(a):
                groups.setdefault(idx[e.src], []).append(e.edge_id)
            for src_block, ids in groups.items():
                for own, reps in zip(ids, rep_edge_groups[rep][src_block]):
                    edge_map[own] = f"{rep}:{reps}"
    projection = NetworkMap(net, quotient, dict(idx), edge_map)
    report = check_fibration(projection)
    if not report.is_fibration:  # guards the construction, not the input
        raise RuntimeError("internal error: quotient projection is not a fibration")
    return quotient, projection


def coarsest_balanced(net: Network) -> tuple[Partition, Network, NetworkMap]:
    """Coarsest phase-homogeneous partition whose quotient map is a fibration.

    Iterated refinement: start from phase classes, split blocks by the
    multiset of source blocks over in-edges until stable.
    """
    block_of: dict[NodeId, tuple] = {a: (net.space(a).name,) for a in net.graph.nodes}
    while True:
        sigs = {
            a: (block_of[a], tuple(sorted(block_of[e.src] for e in net.in_edges(a))))
            for a in net.graph.nodes
        }
        if len(set(sigs.values())) == len(set(block_of.values())):
            break
        block_of = sigs  # type: ignore[assignment]
    groups: dict[tuple, list[NodeId]] = {}
    for a, key in block_of.items():
        groups.setdefault(key, []).append(a)
    partition = Partition.of(groups.values())
    quotient, projection = quotient_of(net, partition)
    return partition, quotient, projection


@dataclass(frozen=True)
class Polydiagonal:
    """Synchrony constraint set of a surjective fibration: equal slices along each fiber."""

    network: Network
    partition: Partition
    index: StateIndex

    def violation(self, x: np.ndarray) -> float:
        """Max deviation from the fiber constraints, circle coordinates mod 2pi."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for block in self.partition.blocks:
            ref = block[0]
            ref_state = x[self.index.slice_of(ref)]
            is_circle = self.index.spaces[ref].is_circle
            for a in block[1:]:
                other = x[self.index.slice_of(a)]
                if is_circle:
                    worst = max(worst, circle_distance(float(ref_state[0]), float(other[0])))
                else:
                    worst = max(worst, float(np.abs(ref_state - other).max()))
        return worst

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return self.violation(x) <= tol


def polydiagonal_of(m: NetworkMap) -> Polydiagonal:
    """Fiber partition of a surjective fibration, with a tolerance-based membership test."""
    report = check_fibration(m)
    if not report.is_fibration:
        raise FibrationRequired("polydiagonal_of requires a fibration")
    if not report.surjective_on_nodes:
        raise PreconditionError("polydiagonal_of requires a surjective fibration")
    fibers: dict[NodeId, list[NodeId]] = {}
    for a in m.domain.graph.nodes:
        fibers.setdefault(m.node(a), []).append(a)
    partition = Partition.of(fibers.values())
    return Polydiagonal(m.domain, partition, total_phase_space(m.domain))


def essential_image(m: NetworkMap) -> frozenset[NodeId]:
    """Codomain nodes whose input network is isomorphic to that of some image node."""
    groupoid = symmetry_groupoid(m.codomain)
    image = set(m.node_map.values())
    out: set[NodeId] = set()
    for cls in groupoid.classes:
        if image.intersection(cls.members):
            out.update(cls.members)
    return frozenset(out)
