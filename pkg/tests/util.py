"""Seeded random generators and independent brute-force oracles for the tests."""

from __future__ import annotations

import itertools
import random

from fibra import (
    Network,
    NetworkMap,
    Partition,
    R1,
    R2,
    S1,
    input_tree,
    network,
)

SPACES = (R1, R2, S1)


def random_network(rng: random.Random, max_nodes: int = 6, max_edges: int = 8,
                   spaces=SPACES) -> Network:
    n = rng.randint(1, max_nodes)
    names = [f"n{i}" for i in range(n)]
    node_spaces = [(a, rng.choice(spaces)) for a in names]
    n_edges = rng.randint(0, max_edges)
    edges = [(f"e{j}", rng.choice(names), rng.choice(names)) for j in range(n_edges)]
    return network(node_spaces, edges)


def random_map_onto(rng: random.Random, codomain: Network, max_nodes: int = 6,
                    max_edges: int = 8) -> NetworkMap:
    """A valid (not necessarily fibration) map into ``codomain``."""
    n = rng.randint(1, max_nodes)
    names = [f"d{i}" for i in range(n)]
    node_map = {a: rng.choice(codomain.graph.nodes) for a in names}
    preimg: dict[str, list[str]] = {}
    for a, b in node_map.items():
        preimg.setdefault(b, []).append(a)
    edges, edge_map = [], {}
    cod_edges = list(codomain.graph.edges)
    if cod_edges:
        for j in range(rng.randint(0, max_edges)):
            e = rng.choice(cod_edges)
            if e.src in preimg and e.tgt in preimg:
                eid = f"de{j}"
                edges.append((eid, rng.choice(preimg[e.src]), rng.choice(preimg[e.tgt])))
                edge_map[eid] = e.edge_id
    dom = network([(a, codomain.space(node_map[a])) for a in names], edges)
    return NetworkMap(dom, codomain, node_map, edge_map)


def random_surjective_fibration(rng: random.Random, max_fiber: int = 3,
                                cod_max_nodes: int = 4, cod_max_edges: int = 5) -> NetworkMap:
    cod = random_network(rng, cod_max_nodes, cod_max_edges)
    node_map: dict[str, str] = {}
    i = 0
    for b in cod.graph.nodes:
        for _ in range(rng.randint(1, max_fiber)):
            node_map[f"d{i}"] = b
            i += 1
    preimg: dict[str, list[str]] = {}
    for a, b in node_map.items():
        preimg.setdefault(b, []).append(a)
    edges, edge_map = [], {}
    j = 0
    for a in sorted(node_map):
        for e in cod.in_edges(node_map[a]):
            eid = f"de{j}"
            j += 1
            edges.append((eid, rng.choice(preimg[e.src]), a))
            edge_map[eid] = e.edge_id
    dom = network([(a, cod.space(node_map[a])) for a in sorted(node_map)], edges)
    return NetworkMap(dom, cod, node_map, edge_map)


def random_injective_fibration(rng: random.Random, base_max_nodes: int = 4,
                               base_max_edges: int = 5, extra_max: int = 4) -> NetworkMap:
    """Inclusion of a random graph into an extension where new edges only feed new nodes."""
    dom = random_network(rng, base_max_nodes, base_max_edges)
    phase = dict(dom.phase)
    extra = [f"x{i}" for i in range(rng.randint(1, extra_max))]
    for a in extra:
        phase[a] = rng.choice(SPACES)
    all_nodes = list(dom.graph.nodes) + extra
    edges = [(e.edge_id, e.src, e.tgt) for e in dom.graph.edges]
    for j in range(rng.randint(0, 6)):
        edges.append((f"xe{j}", rng.choice(all_nodes), rng.choice(extra)))
    cod = network([(a, phase[a]) for a in all_nodes], edges)
    return NetworkMap(
        dom, cod,
        {a: a for a in dom.graph.nodes},
        {e.edge_id: e.edge_id for e in dom.graph.edges},
    )


# --- independent oracles -------------------------------------------------------


def naive_is_fibration(m: NetworkMap) -> bool:
    """Explicit lift search straight from the unique-lift definition."""
    for a in m.domain.graph.nodes:
        for e_prime in m.codomain.graph.edges:
            if e_prime.tgt != m.node_map[a]:
                continue
            lifts = [
                e for e in m.domain.graph.edges
                if e.tgt == a and m.edge_map[e.edge_id] == e_prime.edge_id
            ]
            if len(lifts) != 1:
                return False
    return True


def naive_tree_isos(net: Network, a: str, b: str) -> list[dict[str, str]]:
    """All leaf bijections preserving types, found by filtering every permutation."""
    ta, tb = input_tree(net, a), input_tree(net, b)
    if ta.root_type != tb.root_type or len(ta.leaves) != len(tb.leaves):
        return []
    type_of_a = {l.edge_id: l.leaf_type for l in ta.leaves}
    type_of_b = {l.edge_id: l.leaf_type for l in tb.leaves}
    ids_a = sorted(type_of_a)
    out = []
    for perm in itertools.permutations(sorted(type_of_b)):
        if all(type_of_a[x] == type_of_b[y] for x, y in zip(ids_a, perm)):
            out.append(dict(zip(ids_a, perm)))
    return out


def set_partitions(items: list) -> list[list[list]]:
    """All set partitions of ``items``."""
    if not items:
        return [[]]
    first, rest = items[0], items[1:]
    out = []
    for sub in set_partitions(rest):
        for i in range(len(sub)):
            out.append(sub[:i] + [[first] + sub[i]] + sub[i + 1:])
        out.append([[first]] + sub)
    return out


def all_phase_homogeneous_partitions(net: Network) -> list[Partition]:
    """Every partition refining the phase-space classes."""
    by_space: dict[str, list[str]] = {}
    for a in sorted(net.graph.nodes):
        by_space.setdefault(net.space(a).name, []).append(a)
    per_class = [set_partitions(nodes) for nodes in by_space.values()]
    out = []
    for combo in itertools.product(*per_class):
        blocks = [block for part in combo for block in part]
        out.append(Partition.of(blocks))
    return out


def oracle_balanced(net: Network, p: Partition) -> bool:
    """Balance via explicit matching of in-edges against the block's first member."""
    block_id = {a: b[0] for b in p.blocks for a in b}
    for block in p.blocks:
        ref = [block_id[e.src] for e in net.in_edges(block[0])]
        for a in block[1:]:
            own = [block_id[e.src] for e in net.in_edges(a)]
            if sorted(own) != sorted(ref):
                return False
    return True
