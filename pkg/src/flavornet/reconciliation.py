"""Removal of ingredient pairs claimed by both cuisines' training graphs.

A western connected component ``C`` is contradicted at node ``n`` when the
eastern graph links ``n`` to another member of ``C``.  The node's
discrepancy compares the western evidence ``d_p`` (western weight from
``n`` into ``C``) with the eastern evidence ``d_n`` (eastern weight from
``n`` into ``C``) as ``max(d_p / d_n, d_n / d_p)``.  :func:`sanity_check`
repeatedly resolves the worst node of every component until no
contradiction is left.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import DomainError
from .graph_core import IngredientNetwork, connected_components, pair

#: Ratios below this are too balanced to trust either side.
DISCARD_BOTH_BELOW = 3


@dataclass(frozen=True)
class DiscrepancyReport:
    node: str
    d_p: float
    d_n: float
    value: float
    western_edges: tuple = ()
    eastern_edges: tuple = ()


@dataclass(frozen=True)
class AuditEntry:
    iteration: int
    component_smallest_node: str
    node: str
    d_p: float
    d_n: float
    value: float
    action: str

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.value):
            d["value"] = "inf"
        return d


def node_discrepancy(node, component, western: IngredientNetwork, eastern: IngredientNetwork):
    """Discrepancy of ``node`` inside western component ``component``.

    Returns ``None`` when the eastern graph has no edge from ``node`` into
    the component.
    """
    if node not in component:
        raise DomainError(f"node {node!r} is not in the given component")
    d_n_edges = []
    d_n = 0
    if node in eastern:
        for u, w in sorted(eastern.neighbors(node).items()):
            if u in component:
                d_n_edges.append(pair(node, u))
                d_n += w
    if not d_n_edges:
        return None
    d_p_edges = []
    d_p = 0
    if node in western:
        for u, w in sorted(western.neighbors(node).items()):
            if u in component:
                d_p_edges.append(pair(node, u))
                d_p += w
    value = math.inf if d_p == 0 else max(d_p / d_n, d_n / d_p)
    return DiscrepancyReport(node, d_p, d_n, value, tuple(d_p_edges), tuple(d_n_edges))


def _worst(reports):
    # maximal value, then more total evidence, then smallest id
    return min(reports, key=lambda r: (-r.value, -(r.d_p + r.d_n), r.node))


def sanity_check(western: IngredientNetwork, eastern: IngredientNetwork):
    """Resolve every western/eastern contradiction by deleting edges.

    Returns
    -------
    (IngredientNetwork, IngredientNetwork, list of AuditEntry)
        Cleaned western graph, cleaned eastern graph and the ordered log
        of decisions.  Weights are never modified and nodes are never
        removed.
    """
    w_edges = dict(western.edges)
    e_edges = dict(eastern.edges)
    w_nodes, e_nodes = western.nodes, eastern.nodes
    audit: list[AuditEntry] = []
    iteration = 0
    while True:
        w_cur = IngredientNetwork(w_nodes, w_edges)
        e_cur = IngredientNetwork(e_nodes, e_edges)
        decisions = []
        for comp in connected_components(w_cur):
            if len(comp) < 2:
                continue
            reports = [
                r for r in (node_discrepancy(v, comp, w_cur, e_cur) for v in sorted(comp)) if r
            ]
            if reports:
                decisions.append((min(comp), _worst(reports)))
        if not decisions:
            break
        iteration += 1
        for smallest, rep in decisions:
            if rep.value < DISCARD_BOTH_BELOW:
                action = "drop_both"
            elif rep.d_p > rep.d_n or not rep.western_edges:
                # an empty D_p cannot make progress, so the eastern side yields
                action = "drop_eastern"
            else:
                action = "drop_western"
            if action in ("drop_both", "drop_western"):
                for key in rep.western_edges:
                    del w_edges[key]
            if action in ("drop_both", "drop_eastern"):
                for key in rep.eastern_edges:
                    del e_edges[key]
            audit.append(
                AuditEntry(iteration, smallest, rep.node, rep.d_p, rep.d_n, rep.value, action)
            )
    return IngredientNetwork(w_nodes, w_edges), IngredientNetwork(e_nodes, e_edges), audit


def has_discrepancies(western: IngredientNetwork, eastern: IngredientNetwork) -> bool:
    for comp in connected_components(western):
        for v in comp:
            if node_discrepancy(v, comp, western, eastern) is not None:
                return True
    return False


def dumps_audit(audit) -> str:
    return "".join(json.dumps(e.to_dict(), sort_keys=False) + "\n" for e in audit)
