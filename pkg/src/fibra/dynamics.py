"""Virtual vector fields, control transport, interconnection, and pullback.

A virtual vector field assigns to each node a control whose arguments are the
node's own state plus one typed input per in-edge.  Interconnection feeds the
in-edge source states into those controls, yielding a genuine vector field on
the flat total state.  Along a fibration, controls transport backwards
through the induced input-tree isomorphisms; since all phase spaces here are
coordinate spaces, the root differential is the identity and transport is
pure input re-indexing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import FibrationRequired, PreconditionError, SignatureMismatch
from .expr_dsl import ControlExpr, ControlSignature, RawControl, evaluate
from .fibrations import check_fibration, essential_image
from .graphs import Network, NetworkMap, NodeId, PhaseSpace, total_phase_space
from .input_trees import (
    InputTree,
    SymmetryGroupoid,
    TreeIso,
    induced_tree_map,
    input_tree,
    symmetry_groupoid,
)

LabelledInput = tuple[str, PhaseSpace, np.ndarray]  # (edge id, source space, state)


@dataclass(frozen=True)
class TransportedControl:
    """A control moved to another input tree by re-indexing its inputs.

    ``source_to_current`` maps the base control's leaf edge ids to leaf edge
    ids of the tree the control now lives on.
    """

    base: Union[ControlExpr, RawControl]
    source_to_current: Mapping[str, str]

    @property
    def signature(self) -> ControlSignature:
        return self.base.signature


Control = Union[ControlExpr, RawControl, TransportedControl]


def signature_at(net: Network, a: NodeId) -> ControlSignature:
    tree = input_tree(net, a)
    return ControlSignature(tree.root_type, tuple(l.leaf_type for l in tree.leaves))


def eval_control(ctrl: Control, root: np.ndarray, inputs: Sequence[LabelledInput]) -> np.ndarray:
    """Evaluate any control kind on labelled inputs (edge id, space, state)."""
    if isinstance(ctrl, ControlExpr):
        return evaluate(ctrl, root, [(space, state) for _, space, state in inputs])
    if isinstance(ctrl, RawControl):
        root = np.asarray(root, dtype=float).reshape(-1)
        if root.shape[0] != ctrl.signature.root.dim:
            raise SignatureMismatch(
                f"root state has dimension {root.shape[0]}, expected {ctrl.signature.root.dim}"
            )
        pairs = tuple((eid, np.asarray(state, dtype=float).reshape(-1)) for eid, _, state in inputs)
        out = np.asarray(ctrl.fn(root, pairs), dtype=float).reshape(-1)
        if out.shape[0] != ctrl.signature.root.dim:
            raise SignatureMismatch("raw control returned a tangent vector of the wrong dimension")
        return out
    if isinstance(ctrl, TransportedControl):
        by_id = {eid: (eid, space, state) for eid, space, state in inputs}
        relabelled = []
        for src_id in sorted(ctrl.source_to_current):
            cur_id = ctrl.source_to_current[src_id]
            _, space, state = by_id[cur_id]
            relabelled.append((src_id, space, state))
        return eval_control(ctrl.base, root, relabelled)
    raise TypeError(f"not a control: {ctrl!r}")


def ctrl_transport(iso: TreeIso, ctrl: Control) -> Control:
    """Transport a control along an input-tree isomorphism.

    Expression controls are symmetric in same-type inputs and leaf types are
    preserved, so they transport to themselves; opaque controls acquire a
    re-indexing layer.  The root differential is the identity on coordinate
    spaces.
    """
    if isinstance(ctrl, ControlExpr):
        return ctrl
    if iso.is_identity:
        return ctrl
    if isinstance(ctrl, RawControl):
        return TransportedControl(ctrl, dict(iso.leaf_bijection))
    if isinstance(ctrl, TransportedControl):
        composed = {
            src: iso.leaf_bijection[cur] for src, cur in ctrl.source_to_current.items()
        }
        return TransportedControl(ctrl.base, composed)
    raise TypeError(f"not a control: {ctrl!r}")


def _check_signature(ctrl: Control, expected: ControlSignature, where: str) -> None:
    if ctrl.signature != expected:
        raise SignatureMismatch(
            f"control at {where} has signature ({ctrl.signature.root.name}; "
            f"{[s.name for s in ctrl.signature.inputs]}), expected ({expected.root.name}; "
            f"{[s.name for s in expected.inputs]})"
        )


@dataclass(frozen=True)
class VirtualVectorField:
    """Controls for every node, stored per node or once per groupoid class."""

    network: Network
    mode: str  # "per_node" | "per_class"
    controls: Mapping[NodeId, Control]
    groupoid: SymmetryGroupoid | None = None

    def control_at(self, a: NodeId) -> Control:
        if self.mode == "per_node":
            return self.controls[a]
        assert self.groupoid is not None
        cls = self.groupoid.class_of(a)
        ctrl = self.controls[cls.representative]
        if a == cls.representative:
            return ctrl
        return ctrl_transport(cls.witnesses[a].inverse(), ctrl)


def per_node_field(net: Network, controls: Mapping[NodeId, Control]) -> VirtualVectorField:
    for a in net.graph.nodes:
        if a not in controls:
            raise PreconditionError(f"no control for node {a!r}")
        _check_signature(controls[a], signature_at(net, a), f"node {a!r}")
    return VirtualVectorField(net, "per_node", dict(controls))


def per_class_field(
    net: Network,
    controls: Mapping[NodeId, Control],
    groupoid: SymmetryGroupoid | None = None,
) -> VirtualVectorField:
    g = groupoid if groupoid is not None else symmetry_groupoid(net)
    for cls in g.classes:
        if cls.representative not in controls:
            raise PreconditionError(f"no control for class of {cls.representative!r}")
        _check_signature(
            controls[cls.representative],
            signature_at(net, cls.representative),
            f"class representative {cls.representative!r}",
        )
    extra = set(controls) - set(g.representatives())
    if extra:
        raise PreconditionError(f"controls keyed by non-representatives: {sorted(extra)}")
    return VirtualVectorField(net, "per_class", dict(controls), g)


def lift_to_nodes(g: SymmetryGroupoid, per_class: Mapping[NodeId, Control]) -> VirtualVectorField:
    """Materialise a per-class assignment as a per-node field via the stored witnesses."""
    field = per_class_field(g.network, per_class, g)
    return VirtualVectorField(
        g.network, "per_node", {a: field.control_at(a) for a in g.network.graph.nodes}
    )


class GlobalField:
    """The interconnected vector field on the flat total state of a network."""

    def __init__(self, net: Network, w: VirtualVectorField):
        if not w.network.is_same(net):
            raise PreconditionError("virtual vector field was built for a different network")
        self.network = net
        self.index = total_phase_space(net)
        self._bindings = []
        for a in self.index.order:
            in_slices = [
                (e.edge_id, net.space(e.src), self.index.slice_of(e.src))
                for e in net.in_edges(a)
            ]
            self._bindings.append((self.index.slice_of(a), w.control_at(a), in_slices))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.index.total_dim,):
            raise PreconditionError(
                f"state has shape {x.shape}, expected ({self.index.total_dim},)"
            )
        out = np.empty(self.index.total_dim)
        for sl, ctrl, in_slices in self._bindings:
            inputs = [(eid, space, x[ssl]) for eid, space, ssl in in_slices]
            out[sl] = eval_control(ctrl, x[sl], inputs)
        return out


def interconnect(net: Network, w: VirtualVectorField) -> GlobalField:
    """Assemble node controls into a vector field: each node eats its own slice plus its in-edge source slices."""
    return GlobalField(net, w)


def pullback(m: NetworkMap, w_prime: VirtualVectorField) -> VirtualVectorField:
    """Pull a codomain virtual vector field back along a fibration.

    Each node receives the control of its image, re-indexed through the
    inverse of the induced input-tree isomorphism.  Per-class fields stay
    per-class (domain classes map into codomain classes).
    """
    if not check_fibration(m).is_fibration:
        raise FibrationRequired("pullback requires a fibration")
    if not w_prime.network.is_same(m.codomain):
        raise PreconditionError("field is not defined on the codomain of the map")

    def pulled(a: NodeId) -> Control:
        iso = induced_tree_map(m, a).as_iso()
        return ctrl_transport(iso.inverse(), w_prime.control_at(m.node(a)))

    if w_prime.mode == "per_class":
        g = symmetry_groupoid(m.domain)
        return VirtualVectorField(
            m.domain, "per_class", {r: pulled(r) for r in g.representatives()}, g
        )
    return VirtualVectorField(
        m.domain, "per_node", {a: pulled(a) for a in m.domain.graph.nodes}
    )


def _sample_control_value(
    ctrl: Control, tree: InputTree, rng: np.random.Generator
) -> np.ndarray:
    from .sampling import sample_space

    root = sample_space(tree.root_type, rng)
    inputs = [(l.edge_id, l.leaf_type, sample_space(l.leaf_type, rng)) for l in tree.leaves]
    return eval_control(ctrl, root, inputs)


def pullback_kernel_check(
    m: NetworkMap,
    w_prime: VirtualVectorField,
    samples: int = 100,
    seed: int = 0,
    tol: float = 0.0,
) -> bool:
    """Numerical surrogate for the kernel description of the pullback.

    Returns True when "the pulled-back field vanishes at all samples" agrees
    with "the codomain field vanishes on every class meeting the essential
    image".
    """
    if w_prime.mode != "per_class":
        raise PreconditionError("pullback_kernel_check expects a per-class field")
    pulled = pullback(m, w_prime)
    rng = np.random.default_rng(seed)
    pulled_zero = True
    for a in sorted(m.domain.graph.nodes):
        tree = input_tree(m.domain, a)
        ctrl = pulled.control_at(a)
        for _ in range(samples):
            if np.abs(_sample_control_value(ctrl, tree, rng)).max() > tol:
                pulled_zero = False
                break
        if not pulled_zero:
            break
    essim = essential_image(m)
    assert w_prime.groupoid is not None
    field_zero = True
    for cls in w_prime.groupoid.classes:
        if not essim.intersection(cls.members):
            continue
        tree = input_tree(m.codomain, cls.representative)
        ctrl = w_prime.control_at(cls.representative)
        for _ in range(samples):
            if np.abs(_sample_control_value(ctrl, tree, rng)).max() > tol:
                field_zero = False
                break
        if not field_zero:
            break
    return pulled_zero == field_zero
