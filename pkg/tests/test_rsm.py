"""The staged equal-share mechanism."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from costshare import (AgentReport, Instance, apply_deviation,
                       check_budget_balance, check_efficiency,
                       check_truthfulness, generate_instance, run_rsm,
                       truthful_profile)
from costshare.model import WeightedGraph, induced_graph
from costshare.rsm import stage_solve
from costshare.fixtures import (fig_line, fig_relay_recharge,
                                fig_staged_network, fig_steiner_detour,
                                fig_triangle, relay_recharge_deviation)


def test_triangle_trace_frozen():
    alloc = run_rsm(fig_triangle())
    assert alloc.shares == {"a": 2, "b": 3}
    assert alloc.total_cost == 5
    trace = alloc.stage_trace
    assert [(sorted(r.selected), r.share) for r in trace] == [(["a"], 2), (["b"], 3)]
    assert trace[0].tree_edges == frozenset({("a", "s")})
    # b's stage tree maps back to the original (a,b) edge after contraction
    assert trace[1].tree_edges == frozenset({("a", "b")})


def test_line_trace_frozen():
    alloc = run_rsm(fig_line())
    assert alloc.shares == {"a": 2, "b": 3}
    assert [(sorted(r.selected), r.share) for r in alloc.stage_trace] == [
        (["a"], 2), (["b"], 3)]


def test_staged_network_three_rounds_frozen():
    """b joins alone at 3, a rides b's paid connection at 4, then c, d, e
    split a 15-cost extension at 5 each; f (value 1) is priced out in round
    one. Collected shares equal the union tree cost exactly."""
    alloc = run_rsm(fig_staged_network())
    assert alloc.shares == {"a": 4, "b": 3, "c": 5, "d": 5, "e": 5, "f": 0}
    assert alloc.social_welfare == 3
    trace = alloc.stage_trace
    assert [(sorted(r.selected), r.share) for r in trace] == [
        (["b"], 3), (["a"], 4), (["c", "d", "e"], 5)]
    assert sorted(trace[0].excluded) == ["f"]
    assert sorted(trace[0].remaining) == ["a", "c", "d", "e"]
    assert trace[2].tree_edges == frozenset({("a", "d"), ("b", "e"), ("c", "d")})
    assert alloc.total_shares() == alloc.total_cost == 22


def test_share_ladder_boundary_is_inclusive():
    # b's value equals the stage share exactly: still selected
    inst = Instance("s", ["a", "b"], {("s", "a"): 2, ("s", "b"): 4},
                    {"a": 4, "b": 4})
    alloc = run_rsm(inst)
    assert alloc.selected == frozenset({"a", "b"})
    assert alloc.shares == {"a": 2, "b": 4}
    assert alloc.stage_trace[0].excluded == frozenset()


def test_equal_share_tie_prefers_the_larger_set():
    inst = Instance("s", ["a", "b"], {("s", "a"): 2, ("s", "b"): 2},
                    {"a": 2, "b": 2})
    alloc = run_rsm(inst)
    assert [(sorted(r.selected), r.share) for r in alloc.stage_trace] == [
        (["a", "b"], 2)]


def test_detour_serves_through_an_unpaid_relay():
    """Only b is worth its price; a sits on the tree for free. Shares still
    cover the tree exactly, but welfare 10 misses the optimum 11."""
    inst = fig_steiner_detour()
    alloc = run_rsm(inst)
    assert alloc.selected == frozenset({"b"})
    assert alloc.shares == {"a": 0, "b": 10}
    assert alloc.tree_edges == frozenset({("a", "s"), ("a", "b")})
    assert alloc.total_shares() == alloc.total_cost == 10
    assert alloc.social_welfare == 10
    assert not check_efficiency(inst, "rsm").holds
    assert check_budget_balance(inst, "rsm").holds


def test_stage_solve_units():
    g = WeightedGraph(["s", "a"], {("s", "a"): 5})
    # nobody can afford any feasible share
    assert stage_solve(g, "s", {"a"}, {"a": 1}, 0) is None
    # the share ladder only climbs: a set below x_prev is not feasible
    assert stage_solve(g, "s", {"a"}, {"a": 9}, 6) is None
    assert stage_solve(g, "s", {"a"}, {"a": 9}, 5) == (frozenset({"a"}), 5)
    assert stage_solve(g, "s", {"a"}, {"a": 9}, 0) == (frozenset({"a"}), 5)
    g2 = WeightedGraph(["s", "a", "b"], {("s", "a"): 2, ("s", "b"): 6})
    assert stage_solve(g2, "s", {"a", "b"}, {"a": 9, "b": 9}, 3) == (
        frozenset({"a", "b"}), 4)


def test_relay_recharge_truthful_run_is_balanced():
    inst = fig_relay_recharge()
    alloc = run_rsm(inst)
    assert alloc.shares == {"a": 0, "b": 1, "c": Fraction(3, 2),
                            "d": Fraction(3, 2), "e": 0}
    assert alloc.total_shares() == alloc.total_cost == 4
    assert check_budget_balance(inst, "rsm").holds


def test_relay_recharge_lie_double_buys_an_edge():
    """The recorded corner: after b's lie, stage 2 routes through a, which
    is priced out without being merged, and stage 3 buys (a,d) a second
    time. Stage costs sum to 6 while the union tree costs 5."""
    inst = fig_relay_recharge()
    agent, rep = relay_recharge_deviation()
    prof = apply_deviation(truthful_profile(inst), agent, rep)
    alloc = run_rsm(inst, prof)

    trace = alloc.stage_trace
    assert [(sorted(r.selected), r.share) for r in trace] == [
        (["e"], 0), (["c", "d"], Fraction(3, 2)), (["b"], 3)]
    assert sorted(trace[1].excluded) == ["a"]
    assert ("a", "d") in trace[1].tree_edges
    assert ("a", "d") in trace[2].tree_edges

    stage_total = sum(r.share * len(r.selected) for r in trace)
    assert alloc.total_shares() == stage_total == 6
    assert alloc.total_cost == 5

    report = check_budget_balance(prof, "rsm")
    assert not report.holds
    assert report.witness["collected"] == 6
    assert report.witness["tree_cost"] == 5
    assert report.witness["reports"] == {
        "b": {"edges": [["a", "b"]], "valuation": 3}}


def test_relay_recharge_lie_is_self_harming():
    """The double buy only opens off the truthful profile: b's lie raises
    b's own payment from 1 to 3."""
    inst = fig_relay_recharge()
    agent, rep = relay_recharge_deviation()
    truthful = run_rsm(inst)
    lied = run_rsm(inst, apply_deviation(truthful_profile(inst), agent, rep))
    assert truthful.utilities[agent] == 5
    assert lied.utilities[agent] == 3
    # integer grid covers the firing report (valuation 3, edges {(a,b)})
    assert check_truthfulness(inst, "rsm", step=1).holds


@given(seed=st.integers(min_value=0, max_value=3_000))
@settings(max_examples=50, deadline=None)
def test_shares_climb_and_cover_stage_costs(seed):
    inst = generate_instance(agents=5, edge_probability=0.55, max_cost=5,
                             max_valuation=8, seed=seed)
    alloc = run_rsm(inst)
    trace = alloc.stage_trace
    shares = [r.share for r in trace]
    assert shares == sorted(shares)
    assert alloc.total_shares() == sum(
        r.share * len(r.selected) for r in trace)
    for i in inst.agents:
        assert alloc.shares[i] >= 0
        assert alloc.shares[i] <= inst.valuations[i]


def test_hiding_edges_disconnects_cleanly():
    """A report profile that strands an agent just leaves it unserved."""
    inst = fig_line()
    prof = apply_deviation(truthful_profile(inst), "b",
                           AgentReport(frozenset(), 10))
    assert not induced_graph(prof).has_edge("a", "b")
    alloc = run_rsm(inst, prof)
    assert alloc.selected == frozenset({"a"})
    assert alloc.shares == {"a": 2, "b": 0}
