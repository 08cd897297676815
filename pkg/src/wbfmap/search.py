"""Best-first search for minimum-cost satisfying models of a WBF DAG.

Search states are partial models grown backwards from the evidence node.
Each state carries a FIFO of open demands ``(node, value)``; resolving an
image demand branches over the gadget entries that can produce the value
(one per choice root or surviving selector), committing the entry's cost
and demanding the parent images its selector requires.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from wbfmap.compiler import (
    F,
    T,
    Flag,
    NodeKind,
    WbfDag,
    WbfValue,
    complete_model,
    induced_assignment,
    is_model,
    is_satisfying,
    model_cost,
    model_from_assignment,
)
from wbfmap.network import Assignment, BeliefNetwork, components, is_polytree


class Mode(enum.Enum):
    COMPLETE = "complete"
    ANCESTRAL = "ancestral"


class _Any:
    """Demand marker: the image must take some domain value, any one."""

    def __repr__(self):
        return "ANY"


ANY = _Any()


class NoModelError(Exception):
    """No satisfying model exists (the evidence has probability zero)."""


class NotPolytreeError(ValueError):
    pass


@dataclass(slots=True)
class PartialSolution:
    committed: dict[int, WbfValue]
    open: tuple[tuple[int, object], ...]
    g: float = 0.0
    seq: int = 0

    @property
    def is_goal(self) -> bool:
        return not self.open


@dataclass
class SearchStats:
    expansions: int = 0
    peak_queue: int = 0
    generated: int = 0


@dataclass
class SolverResult:
    assignment: Assignment
    cost: float
    probability: float
    stats: SearchStats
    model: dict[int, WbfValue] = field(repr=False, default_factory=dict)


class Heuristic:
    """Lower bound on the cost still to be collected from a partial solution.

    ``bounds[v]`` bounds the cost of BN node ``v``'s gadget; it is counted
    while the image of ``v`` is uncommitted. ``None`` bounds means zero.
    """

    def __init__(self, name: str, bounds=None, image_of=(), relevant=None):
        self.name = name
        self.bounds = bounds
        self.image_of = image_of
        self.relevant = relevant

    def restricted(self, bn_nodes) -> Heuristic:
        return Heuristic(self.name, self.bounds, self.image_of, tuple(sorted(bn_nodes)))

    def __call__(self, state: PartialSolution) -> float:
        if self.bounds is None:
            return 0.0
        nodes = range(len(self.bounds)) if self.relevant is None else self.relevant
        committed = state.committed
        total = 0.0
        for v in nodes:
            if self.image_of[v] not in committed:
                total += self.bounds[v]
        return total


def heuristic_zero() -> Heuristic:
    """Score a state by the cost collected so far only."""
    return Heuristic("zero")


def gadget_costs(dag: WbfDag, v: int) -> list[float]:
    """T-costs of every admissible entry in BN node ``v``'s gadget."""
    costs = []
    for options in dag.options_of[v].values():
        for oid in options:
            cost = _option_cost(dag, oid)
            if cost is not None:
                costs.append(cost)
    return costs


def heuristic_min_entry(dag: WbfDag) -> Heuristic:
    """Sum of the cheapest admissible entry of every unresolved gadget.

    Admissible because any satisfying model selects exactly one entry per
    gadget it touches, and consistent since resolving a gadget adds at
    least its minimum to ``g`` while removing exactly that from ``h``.
    """
    bounds = []
    for v in range(len(dag.image_of)):
        costs = gadget_costs(dag, v)
        bounds.append(min(costs) if costs else 0.0)
    return Heuristic("min-entry", tuple(bounds), dag.image_of)


def _option_cost(dag: WbfDag, oid: int) -> Optional[float]:
    """Cost of committing a choice root or selector to T; None if forbidden."""
    node = dag.nodes[oid]
    if node.kind is NodeKind.CHOICE_ROOT:
        return None if node.forbidden else node.cost_true
    if node.cost_root is None:
        return 0.0
    root = dag.nodes[node.cost_root]
    return None if root.forbidden else root.cost_true


def initial_state(dag: WbfDag, mode: Mode = Mode.COMPLETE) -> PartialSolution:
    demands: list[tuple[int, object]] = [dag.evidence]
    if mode is Mode.COMPLETE:
        demands.extend((dag.image_of[v], ANY) for v in dag.bn_order)
    return PartialSolution({}, tuple(demands))


def _same(a: WbfValue, b: WbfValue) -> bool:
    return a is b if isinstance(a, Flag) or isinstance(b, Flag) else a == b


def expand(dag: WbfDag, p: PartialSolution) -> list[PartialSolution]:
    """Resolve the front demand of ``p``; return the successor states."""
    if not p.open:
        raise ValueError("state has no open demand")
    (nid, want), rest = p.open[0], p.open[1:]
    committed = p.committed
    node = dag.nodes[nid]

    if nid in committed:
        have = committed[nid]
        if want is ANY:
            ok = not isinstance(have, Flag)
        else:
            ok = _same(have, want)
        return [PartialSolution(committed, rest, p.g)] if ok else []

    if node.kind is NodeKind.EVIDENCE_AND:
        if want is not T:
            raise ValueError(f"unsupported demand {want!r} on the evidence node")
        new = dict(committed)
        new[nid] = T
        demands = [(dag.image_of[b], val) for b, val in sorted(dag.findings.items())]
        demands.extend((img, ANY) for img in dag.free_images)
        return [PartialSolution(new, tuple(demands) + rest, p.g)]

    if node.kind is not NodeKind.IMAGE:
        raise ValueError(f"demand on non-image node {nid} ({node.kind.value})")
    if want is not ANY and (isinstance(want, Flag) or want not in range(dag.domain_sizes[node.bn_node])):
        raise ValueError(f"inadmissible demand {want!r} on image {nid}")

    options = dag.options_of[node.bn_node]
    values = options if want is ANY else ([want] if want in options else [])
    out = []
    for value in values:
        for oid in options[value]:
            opt = dag.nodes[oid]
            cost = _option_cost(dag, oid)
            if cost is None:
                continue
            if opt.kind is NodeKind.CHOICE_ROOT:
                new = dict(committed)
                for sibling in node.parents:
                    new[sibling] = F
                new[oid] = T
                new[nid] = value
                out.append(PartialSolution(new, rest, p.g + cost))
                continue
            demands = []
            consistent = True
            for img, required in zip(opt.parents, opt.parent_tuple):
                have = committed.get(img)
                if have is None:
                    demands.append((img, required))
                elif not _same(have, required):
                    consistent = False
                    break
            if not consistent:
                continue
            new = dict(committed)
            new[oid] = T
            if opt.cost_root is not None:
                new[opt.cost_root] = T
            new[nid] = value
            out.append(PartialSolution(new, tuple(demands) + rest, p.g + cost))
    return out


def required_nodes(dag: WbfDag, mode: Mode):
    """BN nodes whose gadgets every goal state resolves."""
    if mode is Mode.COMPLETE:
        return tuple(range(len(dag.image_of)))
    seeds = list(dag.findings) + [dag.bn_of_image[img] for img in dag.free_images]
    seen = set()
    while seeds:
        v = seeds.pop()
        if v in seen:
            continue
        seen.add(v)
        seeds.extend(dag.bn_parents[v])
    return tuple(sorted(seen))


class BestFirstSearch:
    """Iterate over satisfying models in non-decreasing cost order.

    The queue is ordered by ``g + h`` with FIFO tie-breaking on creation
    sequence. Every goal popped is completed into a full model and checked.
    """

    def __init__(self, dag: WbfDag, h: Optional[Heuristic] = None, mode: Mode = Mode.COMPLETE,
                 start: Optional[PartialSolution] = None, on_expand=None):
        self.dag = dag
        self.mode = mode
        h = h or heuristic_zero()
        if mode is Mode.ANCESTRAL and h.bounds is not None:
            h = h.restricted(required_nodes(dag, mode))
        self.h = h
        self.stats = SearchStats()
        self.on_expand = on_expand
        self._seq = itertools.count()
        self._queue: list = []
        self._push(start or initial_state(dag, mode))

    def _push(self, state: PartialSolution):
        state.seq = next(self._seq)
        self.stats.generated += 1
        heapq.heappush(self._queue, (state.g + self.h(state), state.seq, state))
        self.stats.peak_queue = max(self.stats.peak_queue, len(self._queue))

    def __iter__(self) -> Iterator[SolverResult]:
        last = -math.inf
        while self._queue:
            f, _, state = heapq.heappop(self._queue)
            if f < last - 1e-9 * max(1.0, abs(last)):
                raise AssertionError("frontier cost decreased; heuristic is inconsistent")
            last = f
            if state.is_goal:
                yield self._finish(state)
                continue
            self.stats.expansions += 1
            if self.on_expand is not None:
                self.on_expand(state)
            for child in expand(self.dag, state):
                self._push(child)

    def _finish(self, state: PartialSolution) -> SolverResult:
        model = complete_model(self.dag, state.committed)
        if not (is_model(self.dag, model) and is_satisfying(self.dag, model)):
            raise AssertionError("goal state did not complete to a satisfying model")
        cost = model_cost(self.dag, model)
        stats = SearchStats(self.stats.expansions, self.stats.peak_queue, self.stats.generated)
        assignment = induced_assignment(self.dag, model, partial=self.mode is Mode.ANCESTRAL)
        return SolverResult(assignment, cost, math.exp(-cost), stats, model)


def solve_map(dag: WbfDag, h: Optional[Heuristic] = None, mode: Mode = Mode.COMPLETE) -> SolverResult:
    for result in BestFirstSearch(dag, h, mode):
        return result
    raise NoModelError("no satisfying model: the evidence has probability zero")


def solve_kbest(dag: WbfDag, k: int, h: Optional[Heuristic] = None,
                mode: Mode = Mode.COMPLETE) -> list[SolverResult]:
    if k < 1:
        raise ValueError("k must be at least 1")
    results: list[SolverResult] = []
    seen = set()
    for result in BestFirstSearch(dag, h, mode):
        key = tuple(sorted(result.assignment.items()))
        assert key not in seen, "two goals induced the same assignment"
        seen.add(key)
        results.append(result)
        if len(results) == k:
            break
    return results


def solve_map_polytree(net: BeliefNetwork, ev: Mapping[int, int], dag: WbfDag) -> SolverResult:
    """MAP on a polytree by caching, per (image, value), the best cost below it.

    Each component is rooted at its smallest node id. A CPT family is
    charged to its topmost member in that rooting: the node itself when its
    tree parent is one of its children (or it is the root), else the parent
    it hangs from. Every gadget entry is then examined exactly once, so the
    number of demand resolutions equals the number of surviving entries.
    """
    if not is_polytree(net):
        raise NotPolytreeError("network is not a polytree")
    if dict(ev) != dict(dag.findings):
        raise ValueError("evidence does not match the compiled DAG")
    stats = SearchStats()
    n = net.size
    kids = net.children()
    findings = dag.findings
    sizes = dag.domain_sizes
    inf = math.inf

    # option tuples (value, option id, cost, parent tuple) per BN node
    entries: list[list[tuple[int, int, float, tuple[int, ...]]]] = []
    for v in range(n):
        rows = []
        for value, options in dag.options_of[v].items():
            for oid in options:
                cost = _option_cost(dag, oid)
                if cost is not None:
                    rows.append((value, oid, cost, dag.nodes[oid].parent_tuple or ()))
        entries.append(rows)

    tree_parent = [-1] * n
    order: list[int] = []
    roots = []
    for comp in components(net):
        root = comp[0]
        roots.append(root)
        tree_parent[root] = root
        frontier = deque([root])
        while frontier:
            v = frontier.popleft()
            order.append(v)
            for w in sorted(set(net.parents[v]) | set(kids[v])):
                if tree_parent[w] == -1:
                    tree_parent[w] = v
                    frontier.append(w)

    def owns_family(v: int) -> bool:
        return tree_parent[v] == v or tree_parent[v] not in net.parents[v]

    best = [[inf] * sizes[v] for v in range(n)]
    own_choice: dict[tuple[int, int], tuple] = {}
    child_choice: dict[tuple[int, int, int], tuple] = {}

    for v in reversed(order):
        own = owns_family(v)
        tree_kids = [c for c in kids[v] if tree_parent[c] == v and c != v]
        grouped: dict[int, list] = {}
        for c in tree_kids:
            pos = net.parents[c].index(v)
            by_value: dict[int, list] = {}
            for entry in entries[c]:
                by_value.setdefault(entry[3][pos], []).append(entry)
            grouped[c] = by_value
        own_by_value: dict[int, list] = {}
        if own:
            for entry in entries[v]:
                own_by_value.setdefault(entry[0], []).append(entry)

        for d in range(sizes[v]):
            stats.generated += 1
            if v in findings and findings[v] != d:
                # entries still count as examined for the linear bound
                stats.expansions += len(own_by_value.get(d, ())) + sum(
                    len(grouped[c].get(d, ())) for c in tree_kids)
                continue
            total = 0.0
            if own:
                pick, pick_cost = None, inf
                for entry in own_by_value.get(d, ()):
                    stats.expansions += 1
                    cost = entry[2] + sum(
                        best[p][val] for p, val in zip(net.parents[v], entry[3]))
                    if cost < pick_cost:
                        pick, pick_cost = entry, cost
                own_choice[v, d] = pick
                total += pick_cost
            for c in tree_kids:
                pick, pick_cost = None, inf
                for entry in grouped[c].get(d, ()):
                    stats.expansions += 1
                    cost = entry[2] + best[c][entry[0]] + sum(
                        best[p][val] for p, val in zip(net.parents[c], entry[3]) if p != v)
                    if cost < pick_cost:
                        pick, pick_cost = entry, cost
                child_choice[v, d, c] = pick
                total += pick_cost
            best[v][d] = total

    assignment: dict[int, int] = {}
    expected = 0.0
    for root in roots:
        value = min(range(sizes[root]), key=lambda d: (best[root][d], d))
        if best[root][value] == inf:
            raise NoModelError("no satisfying model: the evidence has probability zero")
        expected += best[root][value]
        stack = [(root, value)]
        while stack:
            v, d = stack.pop()
            assignment[v] = d
            if owns_family(v):
                entry = own_choice[v, d]
                stack.extend(zip(net.parents[v], entry[3]))
            for c in kids[v]:
                if tree_parent[c] != v or c == v:
                    continue
                entry = child_choice[v, d, c]
                stack.append((c, entry[0]))
                stack.extend((p, val) for p, val in zip(net.parents[c], entry[3]) if p != v)

    model = model_from_assignment(dag, assignment)
    if model is None or not is_satisfying(dag, model):
        raise AssertionError("polytree solution does not map to a satisfying model")
    cost = model_cost(dag, model)
    assert abs(cost - expected) <= 1e-9 * max(1.0, expected)
    return SolverResult(dict(sorted(assignment.items())), cost, math.exp(-cost), stats, model)
