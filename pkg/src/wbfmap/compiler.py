"""Compile a Bayesian network plus evidence into a weighted boolean-function DAG.

Node values are either domain value indices (plain ``int``, only on image
nodes) or one of the flags ``T``, ``F``, ``U``. Every BN node gets a gadget:

* roots: one choice root per value feeding an exclusive-or image node;
* non-roots: per CPT entry a cost root and a selector matching the parent
  tuple, all selectors feeding the exclusive-or image node.

A single evidence node ANDs the evidence findings and must be ``T``.
Node ids are topologically ordered, so labels can be evaluated in id order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from wbfmap.network import (
    Assignment,
    BeliefNetwork,
    check_evidence,
    components,
    topological_order,
)

# Finite stand-in for an infinite cost; nodes carrying it are never committed to T.
PENALTY = 1e12


class Flag(enum.Enum):
    T = "T"
    F = "F"
    U = "U"

    def __repr__(self):
        return self.value


T, F, U = Flag.T, Flag.F, Flag.U

WbfValue = Union[int, Flag]


class NodeKind(enum.Enum):
    CHOICE_ROOT = "choice_root"
    COST_ROOT = "cost_root"
    SELECTOR = "selector"
    IMAGE = "image"
    EVIDENCE_AND = "evidence_and"


ROOT_KINDS = (NodeKind.CHOICE_ROOT, NodeKind.COST_ROOT)


@dataclass(frozen=True)
class XorImage:
    # value carried by the image when parent at this position is the unique T
    value_of_branch: tuple[int, ...]


@dataclass(frozen=True)
class SelectorMatch:
    required_tuple: tuple[int, ...]
    cost_parent_position: Optional[int]


@dataclass(frozen=True)
class EvidenceMatch:
    required: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ConstTrue:
    pass


Label = Union[XorImage, SelectorMatch, EvidenceMatch, ConstTrue, None]


@dataclass(frozen=True)
class WbfNode:
    id: int
    kind: NodeKind
    parents: tuple[int, ...] = ()
    label: Label = None
    bn_node: Optional[int] = None
    own_value: Optional[int] = None
    parent_tuple: Optional[tuple[int, ...]] = None
    cost_true: float = 0.0
    # P = 0 entry kept (unpruned compile); inadmissible for search.
    forbidden: bool = False
    cost_root: Optional[int] = None  # selectors only

    @property
    def is_root(self) -> bool:
        return self.kind in ROOT_KINDS


@dataclass(frozen=True)
class WbfDag:
    nodes: tuple[WbfNode, ...]
    evidence: tuple[int, Flag]
    image_of: tuple[int, ...]
    findings: Mapping[int, int]
    # per BN node: own value -> selector ids (non-roots) or choice root ids (roots)
    options_of: tuple[Mapping[int, tuple[int, ...]], ...]
    # images of nodes in evidence-free components, in BN topological order
    free_images: tuple[int, ...]
    bn_order: tuple[int, ...]
    domain_sizes: tuple[int, ...]
    bn_parents: tuple[tuple[int, ...], ...]
    prune01: bool = True
    zero_nonprior: bool = False
    bn_of_image: Mapping[int, int] = field(default_factory=dict)

    @property
    def sink(self) -> int:
        return self.evidence[0]

    def __len__(self):
        return len(self.nodes)

    def cost(self, node_id: int, value: WbfValue) -> float:
        node = self.nodes[node_id]
        if not admissible(node, value, self):
            raise ValueError(f"value {value!r} not admissible for node {node_id}")
        if node.is_root and value is T:
            return node.cost_true
        return 0.0

    def kind_counts(self) -> dict[NodeKind, int]:
        counts = {k: 0 for k in NodeKind}
        for node in self.nodes:
            counts[node.kind] += 1
        return counts

    def edge_counts(self) -> dict[NodeKind, int]:
        """Edges grouped by the kind of their target node."""
        counts = {k: 0 for k in NodeKind}
        for node in self.nodes:
            counts[node.kind] += len(node.parents)
        return counts


def admissible(node: WbfNode, value: WbfValue, dag: WbfDag) -> bool:
    if node.kind is NodeKind.IMAGE:
        if value is U:
            return True
        return isinstance(value, int) and 0 <= value < dag.domain_sizes[node.bn_node]
    return value is T or value is F


def _neg_log(p: float) -> float:
    return -math.log(p) if p > 0 else PENALTY


def compile_network(
    net: BeliefNetwork,
    ev: Optional[Mapping[int, int]] = None,
    prune01: bool = True,
    zero_nonprior: bool = False,
) -> WbfDag:
    """Build the WBF DAG for ``net`` conditioned on hard evidence ``ev``.

    With ``prune01`` a zero-probability entry drops its cost root and selector
    (or its choice root, for priors) and a probability-one entry drops its cost
    root, leaving a selector that matches on the parent tuple alone.
    ``zero_nonprior`` zeroes every cost-root cost so only root priors count.
    """
    findings = check_evidence(net, ev or {})
    nodes: list[WbfNode] = []
    image_of = [-1] * net.size
    options_of: list[dict[int, tuple[int, ...]]] = [{} for _ in range(net.size)]

    def add(**kw) -> int:
        nid = len(nodes)
        nodes.append(WbfNode(id=nid, **kw))
        return nid

    order = topological_order(net)
    for v in order:
        cpt = net.cpts[v]
        m = net.domain_size(v)
        branches: list[int] = []
        branch_values: list[int] = []
        if net.is_root(v):
            for i in range(m):
                p = cpt.rows[0][i]
                if prune01 and p == 0.0:
                    continue
                cid = add(
                    kind=NodeKind.CHOICE_ROOT,
                    bn_node=v,
                    own_value=i,
                    cost_true=_neg_log(p) if p < 1.0 else 0.0,
                    forbidden=p == 0.0,
                )
                branches.append(cid)
                branch_values.append(i)
        else:
            parent_images = tuple(image_of[p] for p in net.parents[v])
            for _, config in cpt.parent_configs():
                row = cpt.rows[cpt.row_index(config)]
                for d0 in range(m):
                    p = row[d0]
                    if prune01 and p == 0.0:
                        continue
                    cost_root = None
                    if not (prune01 and p == 1.0):
                        cost = 0.0 if zero_nonprior or p == 1.0 else _neg_log(p)
                        cost_root = add(
                            kind=NodeKind.COST_ROOT,
                            bn_node=v,
                            own_value=d0,
                            parent_tuple=config,
                            cost_true=PENALTY if p == 0.0 else cost,
                            forbidden=p == 0.0,
                        )
                    parents = parent_images if cost_root is None else parent_images + (cost_root,)
                    sid = add(
                        kind=NodeKind.SELECTOR,
                        parents=parents,
                        label=SelectorMatch(
                            config, None if cost_root is None else len(parent_images)
                        ),
                        bn_node=v,
                        own_value=d0,
                        parent_tuple=config,
                        cost_root=cost_root,
                    )
                    branches.append(sid)
                    branch_values.append(d0)
        image_of[v] = add(
            kind=NodeKind.IMAGE,
            parents=tuple(branches),
            label=XorImage(tuple(branch_values)),
            bn_node=v,
        )
        grouped: dict[int, list[int]] = {}
        for bid, d in zip(branches, branch_values):
            grouped.setdefault(d, []).append(bid)
        options_of[v] = {d: tuple(ids) for d, ids in sorted(grouped.items())}

    ev_nodes = sorted(findings)
    if ev_nodes:
        sink_label: Label = EvidenceMatch(tuple((i, findings[b]) for i, b in enumerate(ev_nodes)))
    else:
        sink_label = ConstTrue()
    sink = add(
        kind=NodeKind.EVIDENCE_AND,
        parents=tuple(image_of[b] for b in ev_nodes),
        label=sink_label,
    )

    position = {v: i for i, v in enumerate(order)}
    free = []
    for comp in components(net):
        if not any(v in findings for v in comp):
            free.extend(comp)
    free.sort(key=position.__getitem__)

    return WbfDag(
        nodes=tuple(nodes),
        evidence=(sink, T),
        image_of=tuple(image_of),
        findings=dict(findings),
        options_of=tuple(options_of),
        free_images=tuple(image_of[v] for v in free),
        bn_order=tuple(order),
        domain_sizes=tuple(net.domain_size(v) for v in range(net.size)),
        bn_parents=net.parents,
        prune01=prune01,
        zero_nonprior=zero_nonprior,
        bn_of_image={image_of[v]: v for v in range(net.size)},
    )


def evaluate_label(node: WbfNode, parent_values) -> WbfValue:
    """Apply the node's label to the values of its parents."""
    if node.is_root:
        raise ValueError("root nodes carry no label")
    if len(parent_values) != len(node.parents):
        raise ValueError(
            f"node {node.id} expects {len(node.parents)} parent values, got {len(parent_values)}"
        )
    label = node.label
    if isinstance(label, XorImage):
        chosen = None
        for pos, value in enumerate(parent_values):
            if value is T:
                if chosen is not None:
                    return U
                chosen = pos
            elif value is not F:
                return U
        return U if chosen is None else label.value_of_branch[chosen]
    if isinstance(label, SelectorMatch):
        cp = label.cost_parent_position
        if cp is not None and parent_values[cp] is not T:
            return F
        for want, got in zip(label.required_tuple, parent_values):
            if isinstance(got, Flag) or got != want:
                return F
        return T
    if isinstance(label, EvidenceMatch):
        for pos, want in label.required:
            got = parent_values[pos]
            if isinstance(got, Flag) or got != want:
                return F
        return T
    if isinstance(label, ConstTrue):
        return T
    raise TypeError(f"unknown label {label!r}")


def is_model(dag: WbfDag, f: Mapping[int, WbfValue]) -> bool:
    """Check the functional constraints wherever a node and all its parents are assigned."""
    for nid, value in f.items():
        node = dag.nodes[nid]
        if not admissible(node, value, dag):
            return False
        if node.is_root:
            continue
        if all(p in f for p in node.parents):
            if evaluate_label(node, [f[p] for p in node.parents]) != value:
                return False
    return True


def is_satisfying(dag: WbfDag, f: Mapping[int, WbfValue]) -> bool:
    sink, required = dag.evidence
    return f.get(sink) is required


def model_cost(dag: WbfDag, f: Mapping[int, WbfValue]) -> float:
    return math.fsum(dag.cost(nid, value) for nid, value in f.items())


def induced_assignment(dag: WbfDag, f: Mapping[int, WbfValue], partial: bool = False) -> Assignment:
    """BN values read off the image nodes of ``f``.

    An image at U means ``f`` is not satisfying, unless ``partial`` is set:
    then U images (nodes the model leaves undetermined) are skipped.
    """
    out = {}
    for v, img in enumerate(dag.image_of):
        if img not in f:
            continue
        value = f[img]
        if value is U:
            if partial:
                continue
            raise ValueError(f"image of BN node {v} holds U; model is not satisfying")
        out[v] = value
    return out


def complete_model(dag: WbfDag, partial: Mapping[int, WbfValue]) -> dict[int, WbfValue]:
    """Extend ``partial`` to every node: free roots get F, the rest follow their labels."""
    f = dict(partial)
    for node in dag.nodes:
        if node.id in f:
            continue
        if node.is_root:
            f[node.id] = F
        else:
            f[node.id] = evaluate_label(node, [f[p] for p in node.parents])
    return f


def model_from_assignment(dag: WbfDag, a: Mapping[int, int]) -> Optional[dict[int, WbfValue]]:
    """The canonical model inducing the (possibly partial, parent-closed) assignment ``a``.

    Returns None when some CPT entry used by ``a`` has no surviving gadget or
    is forbidden, i.e. ``a`` has probability zero.
    """
    partial: dict[int, WbfValue] = {}
    for v, value in a.items():
        chosen = None
        for oid in dag.options_of[v].get(value, ()):
            node = dag.nodes[oid]
            if node.kind is NodeKind.CHOICE_ROOT:
                chosen = node
                break
            if all(a.get(p_bn) == want for p_bn, want in _parent_pairs(dag, node)):
                chosen = node
                break
        if chosen is None:
            return None
        if chosen.kind is NodeKind.CHOICE_ROOT:
            if chosen.forbidden:
                return None
            partial[chosen.id] = T
        else:
            if chosen.cost_root is not None:
                if dag.nodes[chosen.cost_root].forbidden:
                    return None
                partial[chosen.cost_root] = T
        partial[dag.image_of[v]] = value
    model = complete_model(dag, partial)
    if not is_model(dag, model):
        return None
    return model


def _parent_pairs(dag: WbfDag, selector: WbfNode):
    """(BN parent id, required value) pairs of a selector."""
    n_images = len(selector.parent_tuple)
    for img, want in zip(selector.parents[:n_images], selector.parent_tuple):
        yield dag.bn_of_image[img], want

