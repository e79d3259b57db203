"""Constrained two-level map-equation community detection.

The objective is the two-level map equation for an undirected weighted
network, with node visit rates proportional to strength.  Writing
``plogp(x) = x * log2(x)``, module exit rates ``q_i`` and module flows
``p_i``, the codelength is::

    L = plogp(sum q_i) - 2 sum plogp(q_i) - sum_a plogp(p_a)
        + sum plogp(q_i + p_i)

Prior knowledge enters as must-link groups, contracted into unsplittable
blocks, and cannot-link pairs, which the optimizer never co-locates.
Optimization is greedy: node moves to neighbouring modules, then
aggregation of modules into super-nodes, repeated until nothing improves,
followed by a fine-tuning round that re-runs node moves from the current
solution.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import ConstraintError, DomainError, ParseError
from .graph_core import IngredientNetwork, pair
from .seeds import child_rng

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 5
_EPS = 1e-12
_MIN_GAIN = 1e-10


def plogp(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Flat assignment of nodes to communities ``0 .. k-1``.

    Community ids are numbered by the smallest member identifier, so two
    partitions describing the same grouping compare equal.
    """

    assignment: Mapping[str, int]
    codelength: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "assignment", MappingProxyType(dict(self.assignment)))

    @classmethod
    def from_labels(cls, labels: Mapping[str, object], codelength: float = 0.0) -> "Partition":
        """Build a partition from arbitrary hashable labels."""
        first = {}
        for node in sorted(labels):
            first.setdefault(labels[node], len(first))
        return cls({node: first[labels[node]] for node in labels}, codelength)

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[str]], codelength: float = 0.0):
        labels = {}
        for i, group in enumerate(groups):
            for node in group:
                labels[node] = i
        return cls.from_labels(labels, codelength)

    def __reduce__(self):
        return (Partition, (dict(self.assignment), self.codelength))

    def __contains__(self, node):
        return node in self.assignment

    def __len__(self):
        return len(self.assignment)

    def community_of(self, node: str) -> int:
        return self.assignment[node]

    def same_community(self, a: str, b: str) -> bool:
        return a in self.assignment and b in self.assignment and (
            self.assignment[a] == self.assignment[b]
        )

    def number_of_communities(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> list[set]:
        out = [set() for _ in range(self.number_of_communities())]
        for node, c in self.assignment.items():
            out[c].add(node)
        return out

    def same_grouping(self, other: "Partition") -> bool:
        """True if both partitions group the nodes identically."""
        return sorted(map(sorted, self.communities())) == sorted(map(sorted, other.communities()))


@dataclass(frozen=True)
class ConstraintSet:
    """Must-link and cannot-link pairs; pairs are stored canonically."""

    must_link: frozenset = frozenset()
    cannot_link: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self, "must_link", frozenset(pair(a, b) for a, b in self.must_link if a != b)
        )
        object.__setattr__(self, "cannot_link", frozenset(pair(a, b) for a, b in self.cannot_link))

    def nodes(self) -> set:
        return {v for p in self.must_link | self.cannot_link for v in p}

    def restrict(self, nodes) -> tuple["ConstraintSet", int]:
        """Drop pairs with an endpoint outside ``nodes``; return the drop count."""
        nodes = set(nodes)
        must = {p for p in self.must_link if p[0] in nodes and p[1] in nodes}
        cannot = {p for p in self.cannot_link if p[0] in nodes and p[1] in nodes}
        dropped = len(self.must_link) - len(must) + len(self.cannot_link) - len(cannot)
        return ConstraintSet(frozenset(must), frozenset(cannot)), dropped

    def groups(self, nodes: Iterable[str] = ()) -> list[frozenset]:
        """Transitive closure of must-link over ``nodes`` plus constrained nodes.

        Groups are returned sorted by their smallest member.
        """
        parent = {v: v for v in set(nodes) | self.nodes()}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a, b in sorted(self.must_link):
            ra, rb = find(a), find(b)
            if ra != rb:
                if rb < ra:
                    ra, rb = rb, ra
                parent[rb] = ra
        members = {}
        for v in parent:
            members.setdefault(find(v), set()).add(v)
        return sorted((frozenset(g) for g in members.values()), key=min)

    def check(self) -> None:
        """Raise :class:`ConstraintError` on a cannot-link pair inside a group."""
        group_of = {}
        for i, g in enumerate(self.groups()):
            for v in g:
                group_of[v] = i
        for a, b in sorted(self.cannot_link):
            if a == b or group_of[a] == group_of[b]:
                raise ConstraintError((a, b))


# ---------------------------------------------------------------------------
# codelength
# ---------------------------------------------------------------------------


def codelength(n: IngredientNetwork, p: Partition) -> float:
    """Two-level map-equation codelength of ``p`` on ``n``, in bits."""
    if n.number_of_edges() == 0:
        raise DomainError("codelength needs a network with at least one edge")
    missing = n.nodes - p.assignment.keys()
    if missing:
        raise DomainError(f"partition misses node(s) {sorted(missing)[:5]}")
    extra = p.assignment.keys() - n.nodes
    if extra:
        raise DomainError(f"partition has node(s) absent from the network {sorted(extra)[:5]}")
    two_w = 2 * n.total_weight()
    exit_w: dict[int, float] = {}
    flow_w: dict[int, float] = {}
    node_term = 0.0
    for node in sorted(n.nodes):
        s = n.strength(node)
        m = p.assignment[node]
        flow_w[m] = flow_w.get(m, 0.0) + s
        node_term += plogp(s / two_w)
    for (a, b), w in n.edges.items():
        ma, mb = p.assignment[a], p.assignment[b]
        if ma != mb:
            exit_w[ma] = exit_w.get(ma, 0.0) + w
            exit_w[mb] = exit_w.get(mb, 0.0) + w
    q = [exit_w.get(m, 0.0) / two_w for m in flow_w]
    total = plogp(sum(q)) - 2 * sum(plogp(x) for x in q) - node_term
    total += sum(plogp(exit_w.get(m, 0.0) / two_w + f / two_w) for m, f in flow_w.items())
    return max(total, 0.0)


# ---------------------------------------------------------------------------
# constrained search context
# ---------------------------------------------------------------------------


@dataclass
class ConstrainedGraph:
    """The network as seen by the optimizer.

    ``blocks`` are the must-link groups (singletons for unconstrained
    nodes), indexed in order of their smallest member.  ``adjacency[i][j]``
    is the summed weight between blocks ``i`` and ``j``; ``self_weight[i]``
    the weight of edges inside block ``i``, which counts twice towards the
    block's strength.
    """

    network: IngredientNetwork
    blocks: list
    block_of: dict
    adjacency: list
    self_weight: list
    strength: list
    forbidden: list
    dropped_pairs: int = 0
    cannot_link: frozenset = field(default_factory=frozenset)

    def block_weight(self, group_a, group_b) -> float:
        i = self.block_of[min(group_a)]
        j = self.block_of[min(group_b)]
        if i == j:
            return self.self_weight[i]
        return self.adjacency[i].get(j, 0)


def apply_constraints(n: IngredientNetwork, c: ConstraintSet) -> ConstrainedGraph:
    """Contract must-link groups and register cannot-link pairs.

    Pairs touching nodes absent from ``n`` are dropped (and counted).  Any
    direct edge between a cannot-link pair is removed from the search
    network.
    """
    c, dropped = c.restrict(n.nodes)
    if dropped:
        logger.warning("dropped %d constraint pair(s) referencing unknown nodes", dropped)
    c.check()
    search = n.without_edges(c.cannot_link) if c.cannot_link else n
    blocks = c.groups(n.nodes)
    block_of = {v: i for i, g in enumerate(blocks) for v in g}
    adjacency: list[dict[int, float]] = [{} for _ in blocks]
    self_weight = [0.0] * len(blocks)
    for (a, b), w in search.edges.items():
        i, j = block_of[a], block_of[b]
        if i == j:
            self_weight[i] += w
        else:
            adjacency[i][j] = adjacency[i].get(j, 0) + w
            adjacency[j][i] = adjacency[j].get(i, 0) + w
    strength = [sum(search.strength(v) for v in sorted(g)) for g in blocks]
    forbidden: list[set] = [set() for _ in blocks]
    for a, b in sorted(c.cannot_link):
        i, j = block_of[a], block_of[b]
        forbidden[i].add(j)
        forbidden[j].add(i)
    return ConstrainedGraph(
        search, blocks, block_of, adjacency, self_weight, strength, forbidden, dropped,
        c.cannot_link,
    )


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------


class _Level:
    """Blocks at one aggregation level, flows already normalized by 2W."""

    __slots__ = ("adj", "flow", "ext", "forbidden")

    def __init__(self, adj, flow, ext, forbidden):
        self.adj = adj
        self.flow = flow
        self.ext = ext  # exit flow of the block standing alone
        self.forbidden = forbidden

    def __len__(self):
        return len(self.flow)


def _base_level(cg: ConstrainedGraph, two_w: float) -> _Level:
    adj = [{j: w / two_w for j, w in nbrs.items()} for nbrs in cg.adjacency]
    flow = [s / two_w for s in cg.strength]
    ext = [sum(nbrs.values()) for nbrs in adj]
    return _Level(adj, flow, ext, [set(f) for f in cg.forbidden])


def _aggregate(level: _Level, mod_of: list) -> tuple[_Level, list]:
    """Collapse modules into blocks; returns the new level and old->new map."""
    relabel = {}
    for m in mod_of:
        relabel.setdefault(m, len(relabel))
    k = len(relabel)
    new_of = [relabel[m] for m in mod_of]
    adj: list[dict[int, float]] = [{} for _ in range(k)]
    flow = [0.0] * k
    forbidden: list[set] = [set() for _ in range(k)]
    for v, nbrs in enumerate(level.adj):
        a = new_of[v]
        flow[a] += level.flow[v]
        for u, w in nbrs.items():
            b = new_of[u]
            if a != b:
                adj[a][b] = adj[a].get(b, 0.0) + w
        for u in level.forbidden[v]:
            forbidden[a].add(new_of[u])
    ext = [sum(nbrs.values()) for nbrs in adj]
    return _Level(adj, flow, ext, forbidden), new_of


class _State:
    """Module bookkeeping for greedy moves on one level."""

    def __init__(self, level: _Level, mod_of: list):
        self.level = level
        self.mod_of = list(mod_of)
        n = len(level)
        self.exit = [0.0] * n
        self.flow = [0.0] * n
        for v in range(n):
            m = self.mod_of[v]
            self.flow[m] += level.flow[v]
            self.exit[m] += level.ext[v]
            for u, w in level.adj[v].items():
                if self.mod_of[u] == m:
                    self.exit[m] -= w
        self.total_exit = sum(self.exit)
        self.size = [0] * n
        for m in self.mod_of:
            self.size[m] += 1
        self.empty = {m for m in range(n) if not self.size[m]}

    def move_pass(self, order) -> int:
        lvl = self.level
        mod_of, exit_, flow = self.mod_of, self.exit, self.flow
        moved = 0
        for v in order:
            a = mod_of[v]
            links: dict[int, float] = {}
            for u, w in lvl.adj[v].items():
                m = mod_of[u]
                links[m] = links.get(m, 0.0) + w
            if not links:
                continue
            bad = {mod_of[u] for u in lvl.forbidden[v]}
            pv, ev = lvl.flow[v], lvl.ext[v]
            w_a = links.get(a, 0.0)
            qa, pa = exit_[a], flow[a]
            qa_new = max(qa - ev + 2 * w_a, 0.0)
            pa_new = pa - pv
            base_a = -2 * (plogp(qa_new) - plogp(qa)) + plogp(qa_new + pa_new) - plogp(qa + pa)
            candidates = set(links)
            if self.size[a] > 1 and self.empty:
                candidates.add(min(self.empty))
            candidates = sorted(candidates)
            best_m, best_d = a, 0.0
            for m in candidates:
                if m == a or m in bad:
                    continue
                qb, pb = exit_[m], flow[m]
                qb_new = max(qb + ev - 2 * links.get(m, 0.0), 0.0)
                tot = self.total_exit - qa - qb + qa_new + qb_new
                d = (
                    plogp(tot) - plogp(self.total_exit)
                    + base_a
                    - 2 * (plogp(qb_new) - plogp(qb))
                    + plogp(qb_new + pb + pv) - plogp(qb + pb)
                )
                if d < best_d - _EPS:
                    best_m, best_d = m, d
            if best_m != a and best_d < -_MIN_GAIN:
                b = best_m
                qb = exit_[b]
                qb_new = max(qb + ev - 2 * links.get(b, 0.0), 0.0)
                self.total_exit += qa_new + qb_new - qa - qb
                self.size[a] -= 1
                self.size[b] += 1
                if not self.size[a]:
                    self.empty.add(a)
                self.empty.discard(b)
                exit_[a], flow[a] = qa_new, pa_new
                exit_[b], flow[b] = qb_new, flow[b] + pv
                mod_of[v] = b
                moved += 1
        return moved

    def converge(self, rng) -> int:
        order = list(range(len(self.level)))
        total = 0
        while True:
            rng.shuffle(order)
            moved = self.move_pass(order)
            total += moved
            if not moved:
                return total


def _dense(labels: list) -> list:
    relabel = {}
    return [relabel.setdefault(m, len(relabel)) for m in labels]


def _multilevel(base: _Level, start: list, rng) -> list:
    """Greedy moves from ``start``, aggregating until a level stops moving.

    Returns the module label of every base block.
    """
    level = base
    assignment = list(range(len(base)))
    mod_of = _dense(start)
    while True:
        state = _State(level, mod_of)
        moved = state.converge(rng)
        if level is not base and not moved:
            return assignment
        level, new_of = _aggregate(level, state.mod_of)
        assignment = [new_of[a] for a in assignment]
        if len(level) <= 1:
            return assignment
        mod_of = list(range(len(level)))


def _module_cost(base: _Level, labels: list) -> float:
    """Codelength up to the partition-independent node term."""
    state = _State(base, _dense(labels))
    return (
        plogp(state.total_exit)
        - 2 * sum(plogp(q) for q in state.exit)
        + sum(plogp(q + p) for q, p in zip(state.exit, state.flow))
    )


def _run_trial(base: _Level, rng) -> tuple[list, float]:
    labels = _multilevel(base, list(range(len(base))), rng)
    cost = _module_cost(base, labels)
    while True:
        # fine-tune: restart node moves from the current modules
        candidate = _multilevel(base, labels, rng)
        new_cost = _module_cost(base, candidate)
        if new_cost < cost - _MIN_GAIN:
            labels, cost = candidate, new_cost
        else:
            return labels, cost


def detect(
    n: IngredientNetwork,
    c: ConstraintSet | None = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> Partition:
    """Minimize the map equation under must-link/cannot-link constraints.

    Runs ``trials`` independent greedy optimizations, each with its own RNG
    derived from ``(seed, trial)``, and keeps the lowest codelength (the
    earliest trial on ties).  Must-link groups always share a community;
    cannot-link pairs never do.  The reported codelength is measured on
    ``n`` with cannot-link edges removed.

    Parameters
    ----------
    n : IngredientNetwork
        Network to partition; isolated nodes end up as singletons.
    c : ConstraintSet, optional
        Prior knowledge; must be conflict-free.
    trials : int
        Number of independent restarts (at least 1).
    seed : int
        Root seed.
    """
    if trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    if not len(n):
        raise DomainError("cannot detect communities in an empty network")
    cg = apply_constraints(n, c or ConstraintSet())
    two_w = 2 * cg.network.total_weight()
    if two_w == 0:
        return Partition.from_groups(cg.blocks, 0.0)
    base = _base_level(cg, two_w)
    best_labels, best_cost = None, math.inf
    for t in range(trials):
        labels, cost = _run_trial(base, child_rng(seed, "detect", t))
        if cost < best_cost - _EPS:
            best_labels, best_cost = labels, cost
    node_labels = {v: best_labels[i] for i, g in enumerate(cg.blocks) for v in g}
    part = Partition.from_labels(node_labels)
    return Partition(part.assignment, codelength(cg.network, part))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def dumps_partition(p: Partition) -> str:
    lines = [f"#codelength\t{p.codelength!r}"]
    lines += [f"{node}\t{p.assignment[node]}" for node in sorted(p.assignment)]
    return "\n".join(lines) + "\n"


def write_partition(p: Partition, path) -> None:
    Path(path).write_text(dumps_partition(p), encoding="utf-8")


def load_partition(path) -> Partition:
    assignment = {}
    length = 0.0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected two tab-separated fields, got {line!r}", line=lineno)
            if parts[0] == "#codelength":
                length = float(parts[1])
            elif not parts[0].startswith("#"):
                try:
                    assignment[parts[0]] = int(parts[1])
                except ValueError:
                    raise ParseError(f"bad community id {parts[1]!r}", line=lineno) from None
    return Partition(assignment, length)
