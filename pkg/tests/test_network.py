import json
import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _nets import DATA, binary
from wbfmap.generate import random_network
from wbfmap.network import (
    NetworkError,
    dump_network,
    is_polytree,
    joint_probability,
    parse_network,
    topological_order,
)

seeds = st.integers(0, 2**32 - 1)


def chain2_doc():
    return json.loads((DATA / "chain2.json").read_text())


def test_parse_chain2(chain2):
    assert chain2.names == ("A", "B")
    assert chain2.parents == ((), (0,))
    assert chain2.cpts[1].rows == ((0.9, 0.1), (0.5, 0.5))


def test_unnormalized_row_names_node_and_row():
    doc = chain2_doc()
    doc["nodes"][1]["cpt"][0] = [0.9, 0.2]
    with pytest.raises(NetworkError, match=r"node B: row 0 is not normalized"):
        parse_network(json.dumps(doc))


def test_two_cycle_rejected():
    doc = chain2_doc()
    doc["nodes"][0]["parents"] = ["B"]
    doc["nodes"][0]["cpt"] = [[0.8, 0.2], [0.3, 0.7]]
    with pytest.raises(NetworkError, match="cycle"):
        parse_network(json.dumps(doc))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["nodes"][1].update(parents=["Z"]), "unknown parent"),
        (lambda d: d["nodes"][1].update(cpt=[[0.9, 0.1]]), "expected 2 rows"),
        (lambda d: d["nodes"][1].update(cpt=[[0.9, 0.1, 0.0], [0.5, 0.5, 0.0]]), "entries"),
        (lambda d: d["nodes"][1].update(parents=["A", "A"]), "twice"),
        (lambda d: d["nodes"][0].update(cpt=[[1.2, -0.2]]), "outside"),
    ],
)
def test_malformed_documents(mutate, message):
    doc = chain2_doc()
    mutate(doc)
    with pytest.raises(NetworkError, match=message):
        parse_network(json.dumps(doc))


def test_syntax_error():
    with pytest.raises(NetworkError, match="syntax"):
        parse_network('{"nodes": [')


def test_joint_probability_chain2(chain2):
    assert joint_probability(chain2, {0: 0, 1: 0}) == pytest.approx(0.8 * 0.9, rel=1e-15)
    assert joint_probability(chain2, {0: 1, 1: 0}) == pytest.approx(0.2 * 0.5, rel=1e-15)


def test_joint_probability_zero_factor():
    net = binary(["A", "B"], {"A": [], "B": ["A"]}, {"A": [[0.8, 0.2]], "B": [[1.0, 0.0], [0.5, 0.5]]})
    assert joint_probability(net, {0: 0, 1: 1}) == 0.0


def test_joint_probability_needs_total_assignment(chain2):
    with pytest.raises(NetworkError):
        joint_probability(chain2, {0: 0})


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_joint_sums_to_one(seed):
    net = random_network(np.random.default_rng(seed), 6, max_values=3, max_parents=3, deterministic=0.3)
    total = 0.0
    for combo in product(*(range(net.domain_size(v)) for v in range(net.size))):
        p = joint_probability(net, dict(enumerate(combo)))
        assert 0.0 <= p <= 1.0
        total += p
    assert total == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_round_trip(seed):
    net = random_network(np.random.default_rng(seed), 7, deterministic=0.2)
    again = parse_network(dump_network(net))
    assert again == net
    assert parse_network(dump_network(again)) == net


def test_is_polytree_examples(chain2, diamond):
    assert is_polytree(chain2)
    assert not is_polytree(diamond)
    single = binary(["X"], {"X": []}, {"X": [[0.3, 0.7]]})
    assert is_polytree(single)


def _has_undirected_cycle(net):
    parent = list(range(net.size))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for v, pa in enumerate(net.parents):
        for p in pa:
            a, b = find(v), find(p)
            if a == b:
                return True
            parent[a] = b
    return False


@settings(max_examples=100, deadline=None)
@given(seeds, st.booleans())
def test_is_polytree_matches_union_find(seed, polytree):
    net = random_network(np.random.default_rng(seed), 8, max_parents=2, polytree=polytree)
    assert is_polytree(net) == (not _has_undirected_cycle(net))
    if polytree:
        assert is_polytree(net)


def test_topological_order_examples(chain2, diamond):
    assert topological_order(chain2) == [0, 1]
    pair = binary(["X", "Y"], {"X": [], "Y": []}, {"X": [[0.5, 0.5]], "Y": [[0.5, 0.5]]})
    assert topological_order(pair) == [0, 1]
    assert topological_order(diamond) == [0, 1, 2, 3]


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_topological_order_puts_parents_first(seed):
    net = random_network(np.random.default_rng(seed), 10)
    order = topological_order(net)
    assert sorted(order) == list(range(net.size))
    position = {v: i for i, v in enumerate(order)}
    for v, pa in enumerate(net.parents):
        assert all(position[p] < position[v] for p in pa)


def test_row_order_last_parent_fastest():
    net = binary(
        ["A", "B", "C"],
        {"A": [], "B": [], "C": ["A", "B"]},
        {"A": [[0.5, 0.5]], "B": [[0.5, 0.5]], "C": [[0.1, 0.9], [0.2, 0.8], [0.3, 0.7], [0.4, 0.6]]},
    )
    # (A=f, B=t) is row 2
    assert net.cpts[2].prob(0, (1, 0)) == 0.3
    assert list(net.cpts[2].parent_configs()) == [(0, (0, 0)), (1, (0, 1)), (2, (1, 0)), (3, (1, 1))]
    assert math.isclose(joint_probability(net, {0: 1, 1: 0, 2: 0}), 0.25 * 0.3)
