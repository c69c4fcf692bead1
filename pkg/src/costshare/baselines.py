"""Bird rule baseline.

Grow a spanning tree from the source, cheapest frontier edge first; every
node pays the cost of the edge that attached it. Payments add up to the
tree cost by construction, but the rule takes no valuations into account
and agents can lower their payment by hiding edges, which is exactly the
failure the truthful mechanisms avoid. Frontier ties go to the smaller
(cost, edge key) pair, so runs are deterministic.
"""

from __future__ import annotations

import heapq
from fractions import Fraction

from .allocation import Allocation
from .model import (Edge, Instance, ReportProfile, ValidationError, Value,
                    WeightedGraph, as_value, edge_key, induced_graph,
                    truthful_profile)
from .steiner import SteinerCache


def prim_shares(graph: WeightedGraph, source: str) -> tuple[dict[str, Value], frozenset[Edge]]:
    """Attachment cost per non-source node plus the spanning tree itself.

    Errors when the graph is disconnected; the rule must connect everyone.
    """
    if source not in graph.nodes:
        raise ValidationError(f"source {source!r} is not a node of the graph")
    shares: dict[str, Value] = {}
    tree: set[Edge] = set()
    reached = {source}
    frontier: list[tuple[Fraction, Edge, str]] = []

    def push_edges(v: str):
        for w, c in graph.adjacent(v).items():
            if w not in reached:
                heapq.heappush(frontier, (Fraction(c), edge_key(v, w), w))

    push_edges(source)
    while frontier:
        cost, e, node = heapq.heappop(frontier)
        if node in reached:
            continue
        reached.add(node)
        shares[node] = as_value(cost)
        tree.add(e)
        push_edges(node)
    if reached != graph.nodes:
        raise ValidationError("the graph must be connected to apply the attachment rule")
    return shares, frozenset(tree)


def run_bird(instance: Instance, profile: ReportProfile | None = None,
             cache: SteinerCache | None = None) -> Allocation:
    """Run the rule on the induced graph of a profile (truthful by default).

    Every agent is selected and pays its attachment cost regardless of any
    reported valuation.
    """
    profile = profile if profile is not None else truthful_profile(instance)
    cache = cache or SteinerCache()
    graph = induced_graph(profile)
    shares, tree = prim_shares(graph, instance.source)
    utilities = {i: as_value(instance.valuations[i] - shares[i])
                 for i in instance.agents}
    selected = frozenset(instance.agents)
    if selected:
        c_min = cache.solver(graph).cost(selected | {instance.source})
        sw = as_value(sum(Fraction(profile.valuation(i)) for i in selected) - c_min)
    else:
        sw = 0
    total = graph.total_cost(tree)
    return Allocation(
        mechanism="bird",
        selected=selected,
        shares=dict(shares),
        utilities=utilities,
        social_welfare=sw,
        tree_thunk=lambda: (tree, total),
        total_cost=total,
    )
