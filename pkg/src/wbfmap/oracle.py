"""Brute-force reference answers by enumerating every total assignment.

Assignments are enumerated in lexicographic (NodeId, ValueId) order, so
"first maximum" is the lexicographic tiebreak. Kept deliberately separate
from the WBF DAG machinery: it reads the CPTs directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from wbfmap.network import Assignment, BeliefNetwork, check_evidence

MAX_ASSIGNMENTS = 10**7


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class RankedAssignment:
    assignment: Assignment
    probability: float


def _enumerate(net: BeliefNetwork, ev: Mapping[int, int]) -> np.ndarray:
    """All total assignments consistent with ``ev``, one row each, lexicographic."""
    ev = check_evidence(net, ev)
    shape = [1 if v in ev else net.domain_size(v) for v in range(net.size)]
    count = math.prod(shape)
    if count > MAX_ASSIGNMENTS:
        raise OracleTooLarge(f"{count} assignments exceed the oracle limit {MAX_ASSIGNMENTS}")
    grid = np.indices(shape).reshape(net.size, -1).T
    for v, value in ev.items():
        grid[:, v] = value
    return grid


def _factors(net: BeliefNetwork, grid: np.ndarray) -> np.ndarray:
    """Per-node CPT entries selected by each assignment, shape (rows, nodes)."""
    out = np.empty(grid.shape, dtype=float)
    for v in range(net.size):
        cpt = net.cpts[v]
        table = np.asarray(cpt.rows, dtype=float)
        row = np.zeros(len(grid), dtype=np.int64)
        for p, size in zip(net.parents[v], cpt.parent_domain_sizes):
            row = row * size + grid[:, p]
        out[:, v] = table[row, grid[:, v]]
    return out


def _ranked(grid, scores, index) -> RankedAssignment:
    return RankedAssignment({v: int(x) for v, x in enumerate(grid[index])}, float(scores[index]))


def all_probabilities(net: BeliefNetwork, ev: Optional[Mapping[int, int]] = None):
    """(assignments, joint probabilities) for every assignment consistent with ``ev``."""
    grid = _enumerate(net, ev or {})
    factors = _factors(net, grid)
    probs = np.ones(len(grid))
    for v in range(net.size):
        probs = probs * factors[:, v]
    return grid, probs


def map_oracle(net: BeliefNetwork, ev: Mapping[int, int]) -> Optional[RankedAssignment]:
    grid, probs = all_probabilities(net, ev)
    best = int(np.argmax(probs))
    if probs[best] <= 0.0:
        return None
    return _ranked(grid, probs, best)


def kbest_oracle(net: BeliefNetwork, ev: Mapping[int, int], k: int) -> list[RankedAssignment]:
    if k <= 0:
        return []
    grid, probs = all_probabilities(net, ev)
    order = np.argsort(-probs, kind="stable")
    out = []
    for index in order[:k]:
        if probs[index] <= 0.0:
            break
        out.append(_ranked(grid, probs, index))
    return out


def partial_roots_oracle(net: BeliefNetwork, ev: Mapping[int, int]) -> Optional[RankedAssignment]:
    """Best product of root priors over assignments whose every CPT entry is positive.

    This maximizes, it does not sum out the non-root nodes.
    """
    grid = _enumerate(net, ev)
    factors = _factors(net, grid)
    feasible = np.all(factors > 0.0, axis=1)
    score = np.ones(len(grid))
    for v in range(net.size):
        if net.is_root(v):
            score = score * factors[:, v]
    score = np.where(feasible, score, -1.0)
    best = int(np.argmax(score))
    if score[best] <= 0.0:
        return None
    return _ranked(grid, score, best)
