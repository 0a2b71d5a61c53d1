#!/usr/bin/env python3
"""Graph fibrations on a three-node network.

The network g3 has nodes 1, 2, 3 with edges 1 -> 2, 2 -> 1, 2 -> 3.  Three
structure-preserving maps connect it to smaller graphs: a collapse onto a
one-node loop, a collapse onto a two-cycle (merging nodes 1 and 3), and the
embedding of the two-cycle back into g3.  All three satisfy the unique-lift
property that makes them fibrations, which is what later turns them into
maps of dynamical systems.
"""

from fibra import check_fibration, check_network_map, compose_maps, factorize
from fibra.fixtures import c2_into_g3, double_collapse, fork_to_chain, g3_to_c2, g3_to_loop

for name, m in [
    ("collapse g3 -> loop", g3_to_loop()),
    ("collapse g3 -> 2-cycle", g3_to_c2()),
    ("embed 2-cycle -> g3", c2_into_g3()),
]:
    assert check_network_map(m) == []
    report = check_fibration(m)
    kind = "surjective" if report.surjective_on_nodes else "injective"
    print(f"{name}: fibration={report.is_fibration} ({kind} on nodes)")

# A map can fail the unique-lift property: collapsing a double edge a => b
# onto the loop gives the loop edge *two* lifts at b and none at a.
bad = double_collapse()
report = check_fibration(bad)
print(f"\ncollapse of the double edge: fibration={report.is_fibration}")
for f in report.failures:
    print(f"  node {f.node}: edge {f.codomain_edge} has {f.lift_count} lifts")

# Every fibration factors as a surjection onto its image followed by the
# inclusion of the image; both factors are fibrations again.
m = fork_to_chain()
surjection, injection = factorize(m)
print(f"\nfork-to-chain image nodes: {surjection.codomain.graph.nodes}")
recomposed = compose_maps(surjection, injection)
assert recomposed.node_map == dict(m.node_map)
print("surjection ; injection == original map: True")
