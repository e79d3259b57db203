"""Independent reference implementations used only by the tests.

Each oracle follows the textbook definition as literally as possible and
shares no code with the package beyond its plain data types.
"""

import math
from itertools import combinations

import networkx as nx


def brute_projection(compounds_of):
    """Pairwise set intersection over every ingredient pair."""
    out = {}
    for a, b in combinations(sorted(compounds_of), 2):
        shared = len(compounds_of[a] & compounds_of[b])
        if shared:
            out[(a, b)] = shared
    return out


def entropy(probs):
    total = 0.0
    for p in probs:
        if p > 0:
            total -= p * math.log2(p)
    return total


def map_equation(edges, labels):
    """Two-level map equation written as q*H(Q) + sum_i p_i * H(P_i).

    ``edges`` maps (a, b) -> weight, ``labels`` maps node -> module.
    """
    two_w = 2 * sum(edges.values())
    strength = {v: 0.0 for v in labels}
    for (a, b), w in edges.items():
        strength[a] += w
        strength[b] += w
    p = {v: s / two_w for v, s in strength.items()}
    modules = sorted(set(labels.values()))
    q = {}
    for m in modules:
        crossing = sum(
            w for (a, b), w in edges.items() if (labels[a] == m) != (labels[b] == m)
        )
        q[m] = crossing / two_w
    q_total = sum(q.values())
    length = q_total * entropy([q[m] / q_total for m in modules]) if q_total > 0 else 0.0
    for m in modules:
        members = [v for v in labels if labels[v] == m]
        p_circ = q[m] + sum(p[v] for v in members)
        if p_circ > 0:
            length += p_circ * entropy([q[m] / p_circ] + [p[v] / p_circ for v in members])
    return length


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def exhaustive_minimum(nodes, edges, must=(), cannot=()):
    """Smallest map-equation value over all constraint-respecting partitions.

    Cannot-link edges are removed from ``edges`` before scoring.
    """
    cannot = {tuple(sorted(p)) for p in cannot}
    scored = {k: w for k, w in edges.items() if tuple(sorted(k)) not in cannot}
    best = math.inf
    best_groups = None
    for groups in set_partitions(sorted(nodes)):
        labels = {v: i for i, g in enumerate(groups) for v in g}
        if any(labels[a] != labels[b] for a, b in must):
            continue
        if any(labels[a] == labels[b] for a, b in cannot):
            continue
        value = map_equation(scored, labels)
        if value < best:
            best, best_groups = value, groups
    return best, best_groups


def discrepancy(node, component, west_edges, east_edges):
    """(d_p, d_n) straight from the set definitions, or None if D_n is empty."""
    d_n_set = [e for e in east_edges if node in e and (set(e) - {node}) <= component]
    if not d_n_set:
        return None
    d_p_set = [e for e in west_edges if node in e and (set(e) - {node}) <= component]
    d_p = sum(west_edges[e] for e in d_p_set)
    d_n = sum(east_edges[e] for e in d_n_set)
    return d_p, d_n, d_p_set, d_n_set


def sanity_check_stepwise(west_nodes, west_edges, east_edges, threshold=3):
    """Step-by-step execution of the reconciliation loop using networkx components."""
    west_edges, east_edges = dict(west_edges), dict(east_edges)
    steps = []
    while True:
        g = nx.Graph()
        g.add_nodes_from(west_nodes)
        g.add_edges_from(west_edges)
        pending = []
        for comp in sorted(nx.connected_components(g), key=min):
            comp = set(comp)
            best = None
            for v in sorted(comp):
                r = discrepancy(v, comp, west_edges, east_edges)
                if r is None:
                    continue
                d_p, d_n = r[0], r[1]
                value = math.inf if d_p == 0 else max(d_p / d_n, d_n / d_p)
                key = (value, d_p + d_n)
                if best is None or key > best[0]:
                    best = (key, v, r)
            if best is not None:
                pending.append(best)
        if not pending:
            return west_edges, east_edges, steps
        for (value, _), v, (d_p, d_n, dp_set, dn_set) in pending:
            if value < threshold:
                action = "drop_both"
            elif d_p > d_n or not dp_set:
                action = "drop_eastern"
            else:
                action = "drop_western"
            if action != "drop_eastern":
                for e in dp_set:
                    del west_edges[e]
            if action != "drop_western":
                for e in dn_set:
                    del east_edges[e]
            steps.append((v, d_p, d_n, action))
