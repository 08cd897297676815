"""Graphviz DOT rendering of a compiled WBF DAG."""

from __future__ import annotations

from wbfmap.compiler import NodeKind, WbfDag, WbfNode
from wbfmap.network import BeliefNetwork

SHAPES = {
    NodeKind.CHOICE_ROOT: "box",
    NodeKind.COST_ROOT: "diamond",
    NodeKind.SELECTOR: "ellipse",
    NodeKind.IMAGE: "doubleoctagon",
    NodeKind.EVIDENCE_AND: "house",
}


def _family(net: BeliefNetwork, node: WbfNode) -> str:
    v = node.bn_node
    text = f"{net.names[v]}={net.values[v][node.own_value]}"
    if node.parent_tuple is not None:
        given = ",".join(
            f"{net.names[p]}={net.values[p][d]}" for p, d in zip(net.parents[v], node.parent_tuple)
        )
        text += f" | {given}"
    return text


def _label(dag: WbfDag, net: BeliefNetwork, node: WbfNode) -> str:
    lines = [node.kind.value]
    if node.kind is NodeKind.IMAGE:
        lines.append(net.names[node.bn_node])
    elif node.kind is NodeKind.EVIDENCE_AND:
        lines.extend(f"{net.names[v]}={net.values[v][d]}" for v, d in sorted(dag.findings.items()))
    else:
        lines.append(_family(net, node))
    if node.is_root:
        lines.append("cost(T)=forbidden" if node.forbidden else f"cost(T)={node.cost_true:.6f}")
    return "\\n".join(line.replace('"', '\\"') for line in lines)


def to_dot(dag: WbfDag, net: BeliefNetwork) -> str:
    out = ["digraph wbf {"]
    for node in dag.nodes:
        out.append(f'  n{node.id} [shape={SHAPES[node.kind]}, label="{_label(dag, net, node)}"];')
    for node in dag.nodes:
        for p in node.parents:
            out.append(f"  n{p} -> n{node.id};")
    out.append("}")
    return "\n".join(out) + "\n"
