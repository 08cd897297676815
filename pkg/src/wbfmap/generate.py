"""Seeded random networks and evidence for property tests and the ``gen`` command."""

from __future__ import annotations

import numpy as np

from wbfmap.network import BeliefNetwork, Cpt, Evidence, topological_order


def _row(rng: np.random.Generator, m: int, deterministic: float) -> tuple[float, ...]:
    u = rng.random()
    if u < deterministic:
        row = [0.0] * m
        row[int(rng.integers(m))] = 1.0
        return tuple(row)
    probs = rng.dirichlet(np.ones(m))
    if m > 2 and u < 2 * deterministic:
        probs[int(rng.integers(m))] = 0.0
        probs = probs / probs.sum()
    # force an exact-sum row so validation never trips on rounding
    probs = [float(x) for x in probs]
    top = max(range(m), key=probs.__getitem__)
    probs[top] = 1.0 - sum(p for i, p in enumerate(probs) if i != top)
    return tuple(probs)


def random_network(
    rng: np.random.Generator,
    n_nodes: int,
    max_values: int = 3,
    max_parents: int = 3,
    deterministic: float = 0.0,
    polytree: bool = False,
    min_values: int = 2,
) -> BeliefNetwork:
    """Random DAG over ``n_nodes`` with Dirichlet(1) CPT rows.

    ``deterministic`` is the chance that a row is one-hot; with at least
    three values a further row of that share gets a single zero entry.
    With ``polytree`` each node's parents come from distinct components of
    the graph built so far, so the skeleton stays a forest.
    """
    sizes = [int(rng.integers(min_values, max_values + 1)) for _ in range(n_nodes)]
    comp = list(range(n_nodes))

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    parents: list[tuple[int, ...]] = []
    for v in range(n_nodes):
        k = int(rng.integers(0, min(max_parents, v) + 1))
        candidates = [int(x) for x in rng.permutation(v)]
        chosen: list[int] = []
        for c in candidates:
            if len(chosen) == k:
                break
            if polytree:
                if find(c) == find(v) or any(find(c) == find(o) for o in chosen):
                    continue
            chosen.append(c)
        if polytree:
            for c in chosen:
                comp[find(c)] = find(v)
        parents.append(tuple(sorted(chosen)))

    cpts = []
    for v in range(n_nodes):
        psizes = tuple(sizes[p] for p in parents[v])
        n_rows = int(np.prod(psizes)) if psizes else 1
        rows = tuple(_row(rng, sizes[v], deterministic) for _ in range(n_rows))
        cpts.append(Cpt(psizes, sizes[v], rows))

    names = tuple(f"X{v}" for v in range(n_nodes))
    values = tuple(tuple(f"v{i}" for i in range(m)) for m in sizes)
    return BeliefNetwork(names, values, tuple(parents), tuple(cpts))


def forward_sample(rng: np.random.Generator, net: BeliefNetwork) -> dict[int, int]:
    sample: dict[int, int] = {}
    for v in topological_order(net):
        cpt = net.cpts[v]
        row = cpt.rows[cpt.row_index([sample[p] for p in net.parents[v]])]
        sample[v] = int(rng.choice(len(row), p=np.asarray(row) / sum(row)))
    return sample


def random_evidence(
    rng: np.random.Generator, net: BeliefNetwork, max_findings: int = 2, possible: bool = True
) -> Evidence:
    """Hard evidence on 0..max_findings random nodes.

    With ``possible`` the values come from a forward sample, so the evidence
    has nonzero probability; otherwise they are uniform.
    """
    k = int(rng.integers(0, min(max_findings, net.size) + 1))
    nodes = sorted(int(x) for x in rng.choice(net.size, size=k, replace=False))
    if possible:
        sample = forward_sample(rng, net)
        return {v: sample[v] for v in nodes}
    return {v: int(rng.integers(net.domain_size(v))) for v in nodes}
