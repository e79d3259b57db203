"""Bipartite and weighted ingredient graphs.

Covers the ingredient/compound bipartite model, its one-mode projection onto
ingredients, per-node local filtration, connected components and degree
statistics, together with the tab-separated file formats used to move these
objects between CLI stages.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import DomainError, IntegrityError, ParseError


def pair(a: str, b: str) -> tuple[str, str]:
    """Canonical key of the unordered pair ``{a, b}``."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class BipartiteGraph:
    """Ingredients, compounds and the containment edges between them."""

    ingredients: frozenset
    compounds: frozenset
    edges: frozenset

    def __post_init__(self):
        clash = self.ingredients & self.compounds
        if clash:
            raise IntegrityError(
                f"identifier(s) on both sides of the bipartition: {sorted(clash)[:5]}"
            )
        for ing, comp in self.edges:
            if ing not in self.ingredients or comp not in self.compounds:
                raise IntegrityError(f"edge ({ing!r}, {comp!r}) references an unknown node")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], ingredients=(), compounds=()):
        edges = frozenset(edges)
        ings = set(ingredients) | {e[0] for e in edges}
        comps = set(compounds) | {e[1] for e in edges}
        return cls(frozenset(ings), frozenset(comps), edges)

    def compounds_of(self) -> dict[str, set]:
        out = {ing: set() for ing in self.ingredients}
        for ing, comp in self.edges:
            out[ing].add(comp)
        return out


class IngredientNetwork:
    """Simple undirected weighted graph over ingredient identifiers.

    Edges are keyed by the canonical pair ``(min(a, b), max(a, b))``; zero
    weights are never stored and self-loops are rejected.  Instances are
    immutable once built.

    Parameters
    ----------
    nodes : iterable of str
        Node identifiers, including isolated ones.  Edge endpoints are added
        automatically.
    edges : mapping or iterable of (a, b, weight)
        Edge weights.  Giving both ``(a, b)`` and ``(b, a)`` is an error.
    """

    __slots__ = ("_nodes", "_edges", "_adj")

    def __init__(self, nodes: Iterable[str] = (), edges=None):
        node_set = set(nodes)
        weights: dict[tuple[str, str], float] = {}
        if edges is None:
            items = ()
        elif isinstance(edges, Mapping):
            items = ((a, b, w) for (a, b), w in edges.items())
        else:
            items = edges
        for a, b, w in items:
            if a == b:
                raise IntegrityError(f"self-loop on {a!r}")
            if not w > 0 or not math.isfinite(w):
                raise IntegrityError(f"edge ({a!r}, {b!r}) has non-positive weight {w!r}")
            key = pair(a, b)
            if key in weights:
                raise IntegrityError(f"duplicate edge {key!r}")
            weights[key] = w
            node_set.add(a)
            node_set.add(b)
        # sorted storage keeps float reductions independent of hash seeds
        weights = dict(sorted(weights.items()))
        adj: dict[str, dict[str, float]] = {n: {} for n in sorted(node_set)}
        for (a, b), w in weights.items():
            adj[a][b] = w
            adj[b][a] = w
        self._nodes = frozenset(node_set)
        self._edges = MappingProxyType(weights)
        self._adj = adj

    @property
    def nodes(self) -> frozenset:
        return self._nodes

    @property
    def edges(self) -> Mapping[tuple[str, str], float]:
        return self._edges

    def weight(self, a: str, b: str) -> float:
        return self._edges.get(pair(a, b), 0)

    def neighbors(self, node: str) -> Mapping[str, float]:
        return MappingProxyType(self._adj[node])

    def degree(self, node: str) -> int:
        return len(self._adj[node])

    def strength(self, node: str) -> float:
        return sum(self._adj[node].values())

    def max_weight(self, node: str) -> float:
        nbrs = self._adj[node]
        return max(nbrs.values()) if nbrs else 0

    def number_of_edges(self) -> int:
        return len(self._edges)

    def total_weight(self) -> float:
        return sum(self._edges.values())

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, node):
        return node in self._nodes

    def __eq__(self, other):
        if not isinstance(other, IngredientNetwork):
            return NotImplemented
        return self._nodes == other._nodes and dict(self._edges) == dict(other._edges)

    def __hash__(self):
        return hash((self._nodes, frozenset(self._edges.items())))

    def __reduce__(self):
        return (IngredientNetwork, (self._nodes, dict(self._edges)))

    def __repr__(self):
        return f"IngredientNetwork(nodes={len(self._nodes)}, edges={len(self._edges)})"

    def without_edges(self, pairs: Iterable[tuple[str, str]]) -> "IngredientNetwork":
        drop = {pair(a, b) for a, b in pairs}
        return IngredientNetwork(
            self._nodes, {k: w for k, w in self._edges.items() if k not in drop}
        )

    def subgraph(self, nodes: Iterable[str]) -> "IngredientNetwork":
        keep = set(nodes) & self._nodes
        return IngredientNetwork(
            keep, {k: w for k, w in self._edges.items() if k[0] in keep and k[1] in keep}
        )


@dataclass(frozen=True)
class DegreeHistogram:
    counts: dict = field(default_factory=dict)
    nodes: int = 0
    edges: int = 0
    mean_degree: float = 0.0
    density: float = 0.0

    def summary(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "mean_degree": self.mean_degree,
            "density": self.density,
        }


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _lines(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def load_bipartite(source) -> BipartiteGraph:
    """Read a tab-separated ``ingredient<TAB>compound`` edge list.

    ``source`` is a path or an iterable of text lines.  Blank lines and
    lines starting with ``#`` are ignored; duplicate rows collapse to one
    edge.
    """
    edges = set()
    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ParseError(
                f"expected 'ingredient<TAB>compound', got {line!r}", line=lineno
            )
        edges.add((parts[0], parts[1]))
    return BipartiteGraph.from_edges(edges)


def project(g: BipartiteGraph) -> IngredientNetwork:
    """Project ``g`` onto its ingredients.

    The weight of ``(a, b)`` is the number of compounds both contain; pairs
    sharing nothing get no edge.  Every ingredient is kept as a node.
    """
    holders = defaultdict(list)
    for ing, comp in g.edges:
        holders[comp].append(ing)
    counts: dict[tuple[str, str], int] = defaultdict(int)
    for ings in holders.values():
        ings.sort()
        for i, a in enumerate(ings):
            for b in ings[i + 1 :]:
                counts[(a, b)] += 1
    return IngredientNetwork(g.ingredients, counts)


def filter_local(n: IngredientNetwork, factor: float) -> IngredientNetwork:
    """Drop every edge that is weak at both of its endpoints.

    An edge ``(u, v)`` of weight ``w`` survives iff
    ``w >= factor * w_max(u)`` or ``w >= factor * w_max(v)``, where
    ``w_max`` is the strongest incident weight in ``n`` itself.  Nodes are
    never removed.
    """
    if not 0 <= factor <= 1:
        raise DomainError(f"filtration factor must lie in [0, 1], got {factor!r}")
    wmax = {node: n.max_weight(node) for node in n.nodes}
    kept = {
        (u, v): w
        for (u, v), w in n.edges.items()
        if w >= factor * wmax[u] or w >= factor * wmax[v]
    }
    return IngredientNetwork(n.nodes, kept)


def connected_components(n: IngredientNetwork) -> list[set]:
    """Maximal connected node sets, ordered by their smallest identifier."""
    seen = set()
    comps = []
    for start in sorted(n.nodes):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            node = stack.pop()
            for nbr in n.neighbors(node):
                if nbr not in seen:
                    seen.add(nbr)
                    comp.add(nbr)
                    stack.append(nbr)
        comps.append(comp)
    return comps


def degree_histogram(n: IngredientNetwork) -> DegreeHistogram:
    counts: dict[int, int] = defaultdict(int)
    for node in n.nodes:
        counts[n.degree(node)] += 1
    v, e = len(n), n.number_of_edges()
    return DegreeHistogram(
        counts=dict(sorted(counts.items())),
        nodes=v,
        edges=e,
        mean_degree=2 * e / v if v else 0.0,
        density=2 * e / (v * (v - 1)) if v >= 2 else 0.0,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def format_weight(w) -> str:
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))


def _parse_weight(text: str):
    value = float(text)
    return int(value) if value.is_integer() else value


def dumps_network(n: IngredientNetwork) -> str:
    out = io.StringIO()
    out.write(f"#nodes\t{len(n)}\n")
    for node in sorted(n.nodes):
        if not n.degree(node):
            out.write(f"#node\t{node}\n")
    for (a, b), w in sorted(n.edges.items()):
        out.write(f"{a}\t{b}\t{format_weight(w)}\n")
    return out.getvalue()


def write_network(n: IngredientNetwork, path) -> None:
    Path(path).write_text(dumps_network(n), encoding="utf-8")


def load_network(source) -> IngredientNetwork:
    """Inverse of :func:`dumps_network`; accepts a path or lines."""
    nodes = []
    edges = []
    declared = None
    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if line.startswith("#"):
            if parts[0] == "#nodes" and len(parts) == 2:
                declared = int(parts[1])
            elif parts[0] == "#node" and len(parts) == 2:
                nodes.append(parts[1])
            continue
        if len(parts) != 3:
            raise ParseError(f"expected 'a<TAB>b<TAB>weight', got {line!r}", line=lineno)
        try:
            w = _parse_weight(parts[2])
        except ValueError:
            raise ParseError(f"bad weight {parts[2]!r}", line=lineno) from None
        edges.append((parts[0], parts[1], w))
    net = IngredientNetwork(nodes, edges)
    if declared is not None and declared != len(net):
        raise IntegrityError(f"preamble declares {declared} nodes, file holds {len(net)}")
    return net


def write_histogram(h: DegreeHistogram, csv_path, json_path) -> None:
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["degree", "count"])
        for degree, count in sorted(h.counts.items()):
            writer.writerow([degree, count])
    Path(json_path).write_text(json.dumps(h.summary(), indent=2) + "\n", encoding="utf-8")
