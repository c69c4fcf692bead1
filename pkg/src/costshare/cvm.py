"""Critical value based mechanism.

Selection is the welfare-maximizing set delta over all agents; the tree is
an exact minimum Steiner tree of the selected set plus the source on the
induced graph. Each selected agent pays its critical value: the welfare the
rest of the selection could reach without it, minus the welfare the rest
actually contributes alongside it,

    x_i = sw(delta(g minus i)) - (value(g minus i) - C(g)).

That price never depends on i's own reported valuation, which is what makes
overstating or understating pointless. Unselected agents pay nothing. The
payments cover at most the tree cost; they are not meant to balance it.
"""

from __future__ import annotations

from .allocation import Allocation
from .model import Instance, ReportProfile, ValidationError, Value, as_value, truthful_profile
from .model import induced_graph
from .steiner import SteinerCache
from .welfare import WelfareTable, compute_delta_table


def critical_value(table: WelfareTable, i: str) -> Value:
    """Critical value of a selected agent, read off a full welfare table.

    The welfare recurrence only ever consults subsets, so entries of the
    full table double as the recurrence over the reduced ground set.
    """
    if i not in table.agents:
        raise ValidationError(f"{i!r} is not an agent of this table")
    g_mask = table.delta_masks[table.full_mask]
    bit = 1 << table.agents.index(i)
    if not g_mask & bit:
        raise ValidationError(f"agent {i!r} is not selected, it has no critical value")
    rest = g_mask ^ bit
    alternative = table.sw_delta[rest]
    contribution = table.value_sums[rest] - table.costs[g_mask]
    return as_value(alternative - contribution)


def run_cvm(instance: Instance, profile: ReportProfile | None = None,
            cache: SteinerCache | None = None) -> Allocation:
    """Run the mechanism on a report profile (truthful by default)."""
    profile = profile if profile is not None else truthful_profile(instance)
    cache = cache or SteinerCache()
    table = compute_delta_table(profile, cache=cache)
    g_mask = table.delta_masks[table.full_mask]
    selected = table.set_of(g_mask)
    shares: dict[str, Value] = {i: 0 for i in instance.agents}
    utilities: dict[str, Value] = {i: 0 for i in instance.agents}
    for i in selected:
        shares[i] = critical_value(table, i)
        utilities[i] = as_value(instance.valuations[i] - shares[i])
    solver = cache.solver(induced_graph(profile))

    def tree_thunk():
        edges = solver.tree_for_mask(instance.source, table.agents, g_mask)
        return edges, table.costs[g_mask]

    return Allocation(
        mechanism="cvm",
        selected=selected,
        shares=shares,
        utilities=utilities,
        social_welfare=table.sw_delta[table.full_mask],
        tree_thunk=tree_thunk,
        total_cost=table.costs[g_mask],
    )
