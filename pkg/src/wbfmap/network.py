"""Discrete Bayesian networks: data model, JSON I/O and exact probability."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

NORMALIZATION_TOL = 1e-9

# NodeId -> ValueId maps. Evidence is partial, an Assignment total.
Evidence = dict[int, int]
Assignment = dict[int, int]


class NetworkError(ValueError):
    """Raised for malformed network documents, evidence and assignments."""


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table.

    Rows are ordered row-major over parent configurations with the last
    listed parent varying fastest; columns index the node's own values.
    """

    parent_domain_sizes: tuple[int, ...]
    own_domain_size: int
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        expected = math.prod(self.parent_domain_sizes)
        if len(self.rows) != expected:
            raise NetworkError(f"expected {expected} rows, got {len(self.rows)}")
        for i, row in enumerate(self.rows):
            if len(row) != self.own_domain_size:
                raise NetworkError(
                    f"row {i} has {len(row)} entries, expected {self.own_domain_size}"
                )
            if any(not (0.0 <= p <= 1.0) for p in row):
                raise NetworkError(f"row {i} has an entry outside [0, 1]")
            if abs(math.fsum(row) - 1.0) > NORMALIZATION_TOL:
                raise NetworkError(f"row {i} is not normalized (sums to {math.fsum(row)!r})")

    def row_index(self, parent_values: Sequence[int]) -> int:
        index = 0
        for size, value in zip(self.parent_domain_sizes, parent_values):
            index = index * size + value
        return index

    def parent_configs(self):
        """Yield (row index, parent value tuple) in row order."""
        sizes = self.parent_domain_sizes
        for index in range(len(self.rows)):
            config = []
            rest = index
            for size in reversed(sizes):
                config.append(rest % size)
                rest //= size
            yield index, tuple(reversed(config))

    def prob(self, value: int, parent_values: Sequence[int] = ()) -> float:
        return self.rows[self.row_index(parent_values)][value]


@dataclass(frozen=True)
class BeliefNetwork:
    names: tuple[str, ...]
    values: tuple[tuple[str, ...], ...]
    parents: tuple[tuple[int, ...], ...]
    cpts: tuple[Cpt, ...]

    def __post_init__(self):
        n = len(self.names)
        if n == 0:
            raise NetworkError("network has no nodes")
        if not (len(self.values) == len(self.parents) == len(self.cpts) == n):
            raise NetworkError("node field lists have different lengths")
        if len(set(self.names)) != n:
            raise NetworkError("duplicate node names")
        for v in range(n):
            name = self.names[v]
            if not self.values[v]:
                raise NetworkError(f"node {name} has an empty domain")
            if len(set(self.values[v])) != len(self.values[v]):
                raise NetworkError(f"node {name} has duplicate value names")
            pa = self.parents[v]
            if len(set(pa)) != len(pa):
                raise NetworkError(f"node {name} lists a parent twice")
            if any(not (0 <= p < n) for p in pa):
                raise NetworkError(f"node {name} has a parent id out of range")
            cpt = self.cpts[v]
            shape = tuple(len(self.values[p]) for p in pa)
            if cpt.parent_domain_sizes != shape or cpt.own_domain_size != len(self.values[v]):
                raise NetworkError(f"CPT shape mismatch at node {name}")
        _check_acyclic(self.parents, self.names)

    @property
    def size(self) -> int:
        return len(self.names)

    def domain_size(self, node: int) -> int:
        return len(self.values[node])

    def is_root(self, node: int) -> bool:
        return not self.parents[node]

    def node_id(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise NetworkError(f"unknown node {name!r}") from None

    def value_id(self, node: int, value: str) -> int:
        try:
            return self.values[node].index(value)
        except ValueError:
            raise NetworkError(
                f"unknown value {value!r} for node {self.names[node]!r}"
            ) from None

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in self.names]
        for v, pa in enumerate(self.parents):
            for p in pa:
                kids[p].append(v)
        return kids

    def prob(self, node: int, assignment: Mapping[int, int]) -> float:
        """P(node = assignment[node] | its parents as in assignment)."""
        pa = tuple(assignment[p] for p in self.parents[node])
        return self.cpts[node].prob(assignment[node], pa)


def _check_acyclic(parents, names):
    state = [0] * len(parents)  # 0 new, 1 on stack, 2 done
    for start in range(len(parents)):
        if state[start]:
            continue
        stack = [(start, iter(parents[start]))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
            elif state[nxt] == 1:
                raise NetworkError(f"cycle detected through node {names[nxt]}")
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(parents[nxt])))


def network_from_dict(doc: Mapping) -> BeliefNetwork:
    if not isinstance(doc, Mapping) or not isinstance(doc.get("nodes"), list):
        raise NetworkError("document must be an object with a 'nodes' list")
    entries = doc["nodes"]
    index: dict[str, int] = {}
    for i, entry in enumerate(entries):
        if not isinstance(entry, Mapping) or not isinstance(entry.get("name"), str):
            raise NetworkError(f"node entry {i} has no name")
        if entry["name"] in index:
            raise NetworkError(f"duplicate node name {entry['name']!r}")
        index[entry["name"]] = i

    names, values, parents, cpts = [], [], [], []
    for entry in entries:
        name = entry["name"]
        vals = tuple(str(x) for x in entry.get("values", ()))
        try:
            pa = tuple(index[p] for p in entry.get("parents", ()))
        except KeyError as exc:
            raise NetworkError(f"node {name}: unknown parent {exc.args[0]!r}") from None
        if len(set(pa)) != len(pa):
            raise NetworkError(f"node {name} lists a parent twice")
        raw_rows = entry.get("cpt")
        if not isinstance(raw_rows, list):
            raise NetworkError(f"node {name}: missing cpt")
        try:
            rows = tuple(tuple(float(p) for p in row) for row in raw_rows)
        except (TypeError, ValueError):
            raise NetworkError(f"node {name}: cpt entries must be numbers") from None
        # CPT shapes need every domain, so rows are checked after this pass
        names.append(name)
        values.append(vals)
        parents.append(pa)
        cpts.append(rows)

    built = []
    for v, rows in enumerate(cpts):
        sizes = tuple(len(values[p]) for p in parents[v])
        try:
            built.append(Cpt(sizes, len(values[v]), rows))
        except NetworkError as exc:
            raise NetworkError(f"node {names[v]}: {exc}") from None
    return BeliefNetwork(tuple(names), tuple(values), tuple(parents), tuple(built))


def parse_network(text: str) -> BeliefNetwork:
    """Parse a network JSON document; node order follows the document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"syntax error: {exc}") from None
    return network_from_dict(doc)


def load_network(path) -> BeliefNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def network_to_dict(net: BeliefNetwork) -> dict:
    return {
        "nodes": [
            {
                "name": net.names[v],
                "values": list(net.values[v]),
                "parents": [net.names[p] for p in net.parents[v]],
                "cpt": [list(row) for row in net.cpts[v].rows],
            }
            for v in range(net.size)
        ]
    }


def dump_network(net: BeliefNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def check_evidence(net: BeliefNetwork, ev: Mapping[int, int]) -> Evidence:
    out = {}
    for node, value in ev.items():
        if not (0 <= node < net.size):
            raise NetworkError(f"evidence references unknown node id {node}")
        if not (0 <= value < net.domain_size(node)):
            raise NetworkError(
                f"evidence value {value} out of range for node {net.names[node]}"
            )
        out[node] = value
    return out


def joint_probability(net: BeliefNetwork, a: Mapping[int, int]) -> float:
    """Product over nodes of P(v | parents(v)) under the total assignment a."""
    if len(a) != net.size or any(v not in a for v in range(net.size)):
        raise NetworkError("assignment is not total")
    p = 1.0
    for v in range(net.size):
        p *= net.prob(v, a)
    return p


def topological_order(net: BeliefNetwork) -> list[int]:
    """Kahn's algorithm; ties go to the smallest node id."""
    indegree = [len(pa) for pa in net.parents]
    kids = net.children()
    ready = [v for v in range(net.size) if indegree[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in kids[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    return order


def components(net: BeliefNetwork) -> list[list[int]]:
    """Weakly connected components, each sorted, ordered by smallest member."""
    adj: list[set[int]] = [set() for _ in range(net.size)]
    for v, pa in enumerate(net.parents):
        for p in pa:
            adj[v].add(p)
            adj[p].add(v)
    seen = [False] * net.size
    out = []
    for start in range(net.size):
        if seen[start]:
            continue
        seen[start] = True
        comp, stack = [], [start]
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        out.append(sorted(comp))
    return out


def is_polytree(net: BeliefNetwork) -> bool:
    """True iff the undirected skeleton is a forest."""
    edges = sum(len(pa) for pa in net.parents)
    return edges == net.size - len(components(net))
