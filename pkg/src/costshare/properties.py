"""Empirical checks of the mechanism axioms on desk-scale instances.

Every check returns a PropertyReport: a verdict plus, on failure, a witness
with enough detail to replay the violation by hand. Checks never weaken a
predicate to pass; a mechanism that does not have a property is expected to
produce a violated report with a concrete witness.

Deviation sets are exhaustive at a grid resolution: an agent may hide any
subset of its incident edges and report any valuation on the step grid up
to one past the instance's largest valuation (its true value is always in
the set). The attachment-rule baseline ignores valuations, so only its edge
declarations are varied. Checks that quantify over other agents' behavior
(individual rationality) sample joint deviations with a seeded generator
instead of exhausting the product space.

The strategic checks (truthfulness, individual rationality) sweep those
deviation sets. The pointwise checks (feasibility, positiveness, budget
balance) evaluate the allocation produced for one profile: the truthful one
when handed an instance, or exactly the reports handed in as a profile, so
a suspect profile can be replayed through the same predicate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .baselines import run_bird
from .cvm import run_cvm
from .model import (AgentReport, Instance, ReportProfile, SizeCapError,
                    ValidationError, Value, as_value, apply_deviation,
                    edge_key, exact_div, induced_graph, truthful_profile,
                    value_to_json)
from .rsm import run_rsm
from .steiner import SteinerCache

MECHANISMS = {"cvm": run_cvm, "rsm": run_rsm, "bird": run_bird}

HALF = Fraction(1, 2)
MAX_AGENTS = 12
EFFICIENCY_CAP = 8


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one property check."""

    property_name: str
    mechanism: str
    verdict: str  # "holds" | "violated"
    witness: dict | None
    instances_checked: int
    seed: int | None = None

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def to_json(self) -> dict:
        return {
            "property": self.property_name,
            "mechanism": self.mechanism,
            "verdict": self.verdict,
            "witness": self.witness,
            "instances_checked": self.instances_checked,
            "seed": self.seed,
        }


def _resolve(mechanism):
    if callable(mechanism):
        return getattr(mechanism, "__name__", "custom"), mechanism
    if mechanism not in MECHANISMS:
        raise ValidationError(f"unknown mechanism {mechanism!r}")
    return mechanism, MECHANISMS[mechanism]


def report_to_json(report: AgentReport) -> dict:
    return {"edges": [list(e) for e in sorted(report.edges)],
            "valuation": value_to_json(report.valuation)}


def report_from_json(doc: dict) -> AgentReport:
    return AgentReport(frozenset(edge_key(u, v) for u, v in doc["edges"]),
                       as_value(doc["valuation"]))


def valuation_grid(instance: Instance, i: str, step: Value = HALF) -> list[Value]:
    """Grid of candidate reported valuations for one agent: multiples of the
    step from 0 to one past the largest true valuation, plus the agent's own
    true value."""
    step = as_value(step)
    if step <= 0:
        raise ValidationError("grid step must be positive")
    vmax = max(instance.valuations.values(), default=0)
    values = set()
    k = 0
    while k * step <= vmax + 1:
        values.add(as_value(k * step))
        k += 1
    values.add(instance.valuations[i])
    return sorted(values, key=Fraction)


def enumerate_deviations(instance: Instance, i: str, step: Value = HALF,
                         edges_only: bool = False) -> list[AgentReport]:
    """Every report agent i could submit: each subset of its true incident
    edges paired with each grid valuation (just the true valuation when
    edges_only is set). The truthful report is always included."""
    true_edges = sorted(instance.true_edges_of(i))
    grid = ([instance.valuations[i]] if edges_only
            else valuation_grid(instance, i, step))
    out = []
    for mask in range(1 << len(true_edges)):
        declared = frozenset(e for b, e in enumerate(true_edges) if mask >> b & 1)
        for v in grid:
            out.append(AgentReport(declared, v))
    return out


def _run_or_none(runner, instance, profile, cache):
    """Run a mechanism, treating a precondition failure (for example the
    attachment rule on a disconnected declaration) as no outcome."""
    try:
        return runner(instance, profile, cache)
    except ValidationError:
        return None


def _carried_profile(target) -> tuple[Instance, ReportProfile]:
    """Accept either an instance (checked at its truthful profile) or a
    report profile (checked exactly as submitted)."""
    if isinstance(target, ReportProfile):
        return target.instance, target
    return target, truthful_profile(target)


def _profile_note(profile: ReportProfile) -> dict:
    """Witness fragment naming any non-truthful reports, so a violation on a
    deviated profile can be replayed from the witness alone."""
    inst = profile.instance
    lies = {i: report_to_json(r) for i, r in sorted(profile.reports.items())
            if r != AgentReport(inst.true_edges_of(i), inst.valuations[i])}
    return {"reports": lies} if lies else {}


def check_truthfulness(instance: Instance, mechanism, step: Value = HALF,
                       cache: SteinerCache | None = None) -> PropertyReport:
    """No single agent can raise its utility by misreporting, over the full
    deviation grid."""
    name, runner = _resolve(mechanism)
    cache = cache or SteinerCache()
    base_profile = truthful_profile(instance)
    base = runner(instance, base_profile, cache)
    edges_only = name == "bird"
    checked = 0
    for i in sorted(instance.agents):
        truthful_rep = base_profile.reports[i]
        for rep in enumerate_deviations(instance, i, step, edges_only):
            if rep == truthful_rep:
                continue
            alloc = _run_or_none(runner, instance,
                                 apply_deviation(base_profile, i, rep), cache)
            if alloc is None:
                continue
            checked += 1
            if alloc.utilities[i] > base.utilities[i]:
                witness = {
                    "agent": i,
                    "report": report_to_json(rep),
                    "truthful_utility": value_to_json(base.utilities[i]),
                    "deviation_utility": value_to_json(alloc.utilities[i]),
                }
                return PropertyReport("truthfulness", name, "violated", witness, checked)
    return PropertyReport("truthfulness", name, "holds", None, checked)


def check_feasibility(target, mechanism,
                      cache: SteinerCache | None = None) -> PropertyReport:
    """Nobody is charged above its reported valuation in the allocation
    produced for the given instance or profile."""
    name, runner = _resolve(mechanism)
    instance, profile = _carried_profile(target)
    cache = cache or SteinerCache()
    alloc = runner(instance, profile, cache)
    for i in sorted(instance.agents):
        if alloc.shares[i] > profile.valuation(i):
            witness = {
                "agent": i,
                "share": value_to_json(alloc.shares[i]),
                "reported_valuation": value_to_json(profile.valuation(i)),
            }
            witness.update(_profile_note(profile))
            return PropertyReport("feasibility", name, "violated", witness, 1)
    return PropertyReport("feasibility", name, "holds", None, 1)


def check_positiveness(target, mechanism,
                       cache: SteinerCache | None = None) -> PropertyReport:
    """Shares are never negative: the mechanism never pays an agent."""
    name, runner = _resolve(mechanism)
    instance, profile = _carried_profile(target)
    cache = cache or SteinerCache()
    alloc = runner(instance, profile, cache)
    for i in sorted(instance.agents):
        if alloc.shares[i] < 0:
            witness = {"agent": i, "share": value_to_json(alloc.shares[i])}
            witness.update(_profile_note(profile))
            return PropertyReport("positiveness", name, "violated", witness, 1)
    return PropertyReport("positiveness", name, "holds", None, 1)


def check_budget_balance(target, mechanism,
                         cache: SteinerCache | None = None) -> PropertyReport:
    """Collected shares equal the cost of the produced tree, compared as
    exact rationals, in the allocation for the given instance or profile."""
    name, runner = _resolve(mechanism)
    instance, profile = _carried_profile(target)
    cache = cache or SteinerCache()
    alloc = runner(instance, profile, cache)
    collected = alloc.total_shares()
    if collected != alloc.total_cost:
        witness = {
            "collected": value_to_json(collected),
            "tree_cost": value_to_json(alloc.total_cost),
            "edges": [list(e) for e in sorted(alloc.tree_edges)],
        }
        witness.update(_profile_note(profile))
        return PropertyReport("budget-balance", name, "violated", witness, 1)
    return PropertyReport("budget-balance", name, "holds", None, 1)


def check_individual_rationality(instance: Instance, mechanism, samples: int = 200,
                                 seed: int = 0, step: Value = HALF,
                                 cache: SteinerCache | None = None) -> PropertyReport:
    """A truthful agent never ends up below zero, against sampled joint
    deviations of everyone else (the product space is too large to exhaust,
    so each agent gets a seeded sample budget)."""
    name, runner = _resolve(mechanism)
    cache = cache or SteinerCache()
    base = truthful_profile(instance)
    edges_only = name == "bird"
    deviations = {j: enumerate_deviations(instance, j, step, edges_only)
                  for j in instance.agents}
    rng = random.Random(seed)
    checked = 0
    for i in sorted(instance.agents):
        for _ in range(samples):
            reports = {j: (base.reports[j] if j == i
                           else deviations[j][rng.randrange(len(deviations[j]))])
                       for j in instance.agents}
            alloc = _run_or_none(runner, instance,
                                 ReportProfile(instance, reports), cache)
            if alloc is None:
                continue
            checked += 1
            if alloc.utilities[i] < 0:
                witness = {
                    "agent": i,
                    "others": {j: report_to_json(r) for j, r in sorted(reports.items())
                               if j != i},
                    "utility": value_to_json(alloc.utilities[i]),
                }
                return PropertyReport("individual-rationality", name, "violated",
                                      witness, checked, seed)
    return PropertyReport("individual-rationality", name, "holds", None, checked, seed)


def _welfare_optimum(instance: Instance, profile: ReportProfile,
                     cache: SteinerCache) -> tuple[Value, frozenset[str]]:
    """Best reachable welfare and its first witness set, by direct scan over
    agent subsets (kept independent of the recurrence used by selection)."""
    agents = tuple(sorted(instance.agents))
    solver = cache.solver(induced_graph(profile))
    costs = solver.cost_table(instance.source, agents)
    best: Value = 0
    best_mask = 0
    for mask in range(1, 1 << len(agents)):
        c = costs[mask]
        if c is None:
            continue
        sw = sum(profile.valuation(a) for b, a in enumerate(agents) if mask >> b & 1) - c
        if sw > best:
            best = sw
            best_mask = mask
    members = frozenset(a for b, a in enumerate(agents) if best_mask >> b & 1)
    return as_value(best), members


def check_efficiency(instance: Instance, mechanism,
                     cache: SteinerCache | None = None) -> PropertyReport:
    """The truthful outcome reaches the maximum social welfare, verified by
    brute force over every agent subset."""
    name, runner = _resolve(mechanism)
    if len(instance.agents) > EFFICIENCY_CAP:
        raise SizeCapError(
            f"efficiency check exhausts subsets, cap is {EFFICIENCY_CAP} agents")
    cache = cache or SteinerCache()
    profile = truthful_profile(instance)
    alloc = runner(instance, profile, cache)
    best, best_set = _welfare_optimum(instance, profile, cache)
    if alloc.social_welfare != best:
        witness = {
            "selected": sorted(alloc.selected),
            "welfare": value_to_json(alloc.social_welfare),
            "optimal_set": sorted(best_set),
            "optimal_welfare": value_to_json(best),
        }
        return PropertyReport("efficiency", name, "violated", witness, 1)
    return PropertyReport("efficiency", name, "holds", None, 1)


def _adjacency_without(instance: Instance, i: str, j: str) -> dict[str, Value]:
    adj = instance.graph.adjacent(i)
    adj.pop(j, None)
    return adj


def check_symmetry(instance: Instance, mechanism, i: str, j: str,
                   cache: SteinerCache | None = None) -> PropertyReport:
    """Two agents with the same valuation and interchangeable positions (the
    same neighbors at the same costs, each other aside) end up with the same
    utility. Errors when the pair does not satisfy that hypothesis."""
    name, runner = _resolve(mechanism)
    adj_i = _adjacency_without(instance, i, j)
    adj_j = _adjacency_without(instance, j, i)
    if adj_i != adj_j or instance.valuations[i] != instance.valuations[j]:
        raise ValidationError(f"agents {i!r} and {j!r} are not symmetric twins")
    cache = cache or SteinerCache()
    alloc = runner(instance, truthful_profile(instance), cache)
    if alloc.utilities[i] != alloc.utilities[j]:
        witness = {"agents": [i, j],
                   "utilities": [value_to_json(alloc.utilities[i]),
                                 value_to_json(alloc.utilities[j])]}
        return PropertyReport("symmetry", name, "violated", witness, 1)
    return PropertyReport("symmetry", name, "holds", None, 1)


def check_ranking(instance: Instance, mechanism, i: str, j: str,
                  cache: SteinerCache | None = None) -> PropertyReport:
    """Of two agents with the same neighbors, the one with cheaper
    connections and a valuation at least as high ends up at least as well
    off. Errors when the pair does not satisfy that hypothesis."""
    name, runner = _resolve(mechanism)
    adj_i = _adjacency_without(instance, i, j)
    adj_j = _adjacency_without(instance, j, i)
    dominates = (adj_i.keys() == adj_j.keys()
                 and all(adj_i[k] <= adj_j[k] for k in adj_i)
                 and instance.valuations[i] >= instance.valuations[j])
    if not dominates:
        raise ValidationError(f"agent {i!r} does not dominate {j!r}")
    cache = cache or SteinerCache()
    alloc = runner(instance, truthful_profile(instance), cache)
    if alloc.utilities[i] < alloc.utilities[j]:
        witness = {"agents": [i, j],
                   "utilities": [value_to_json(alloc.utilities[i]),
                                 value_to_json(alloc.utilities[j])]}
        return PropertyReport("ranking", name, "violated", witness, 1)
    return PropertyReport("ranking", name, "holds", None, 1)


def check_utility_monotonicity(instance: Instance, mechanism, edge=None,
                               delta: Value = 1,
                               cache: SteinerCache | None = None) -> PropertyReport:
    """Raising the cost of an edge never helps the agents at its endpoints,
    comparing truthful runs before and after. Checks one edge, or every
    edge when none is given."""
    name, runner = _resolve(mechanism)
    delta = as_value(delta)
    if delta < 0:
        raise ValidationError("cost increase must be nonnegative")
    cache = cache or SteinerCache()
    base = runner(instance, truthful_profile(instance), cache)
    edges = ([edge_key(*edge)] if edge is not None
             else sorted(instance.graph.edges()))
    checked = 0
    for e in edges:
        costs = instance.graph.edges()
        if e not in costs:
            raise ValidationError(f"edge {e} is not part of the instance")
        costs[e] = as_value(costs[e] + delta)
        raised = Instance(instance.source, instance.agents, costs, instance.valuations)
        alloc = runner(raised, truthful_profile(raised), cache)
        for i in e:
            if i == instance.source:
                continue
            checked += 1
            if alloc.utilities[i] > base.utilities[i]:
                witness = {
                    "edge": list(e),
                    "delta": value_to_json(delta),
                    "agent": i,
                    "utility_before": value_to_json(base.utilities[i]),
                    "utility_after": value_to_json(alloc.utilities[i]),
                }
                return PropertyReport("utility-monotonicity", name, "violated",
                                      witness, checked)
    return PropertyReport("utility-monotonicity", name, "holds", None, checked)


def budget_balance_ratio(instance: Instance, mechanism,
                         cache: SteinerCache | None = None) -> Value | None:
    """Collected shares divided by the tree cost at the truthful profile;
    None when nothing is selected or the tree costs nothing."""
    _, runner = _resolve(mechanism)
    cache = cache or SteinerCache()
    alloc = runner(instance, truthful_profile(instance), cache)
    if not alloc.selected or alloc.total_cost == 0:
        return None
    return exact_div(alloc.total_shares(), alloc.total_cost)


def welfare_ratio(instance: Instance, mechanism,
                  cache: SteinerCache | None = None) -> Value:
    """Welfare of the truthful outcome relative to the best reachable
    welfare. Errors when the optimum is not positive (no instance-wide
    surplus to compare against)."""
    _, runner = _resolve(mechanism)
    cache = cache or SteinerCache()
    profile = truthful_profile(instance)
    alloc = runner(instance, profile, cache)
    best, _ = _welfare_optimum(instance, profile, cache)
    if best <= 0:
        raise ValidationError("the optimal welfare is not positive")
    return exact_div(alloc.social_welfare, best)


def welfare_ratio_of_selection(instance: Instance, selection,
                               cache: SteinerCache | None = None) -> Value:
    """Welfare share a mechanism would reach by selecting a fixed set,
    relative to the optimum; used to study selection rules abstractly."""
    from .welfare import social_welfare

    cache = cache or SteinerCache()
    profile = truthful_profile(instance)
    sw = social_welfare(profile, selection, cache)
    if sw is None:
        raise ValidationError("the selection cannot be connected")
    best, _ = _welfare_optimum(instance, profile, cache)
    if best <= 0:
        raise ValidationError("the optimal welfare is not positive")
    return exact_div(sw, best)


_LABELS = "abcdefghijkl"


def generate_instance(agents: int = 4, edge_probability: float = 0.5,
                      max_cost: int = 5, max_valuation: int = 8,
                      seed: int = 0) -> Instance:
    """Deterministic random instance: each possible edge appears with the
    given probability, integer costs and valuations are uniform up to their
    bounds, and sampling repeats until the graph is connected."""
    if not 0 <= edge_probability <= 1:
        raise ValidationError("edge probability must lie in [0, 1]")
    if not 0 <= agents <= MAX_AGENTS:
        raise ValidationError(f"agent count must lie in [0, {MAX_AGENTS}]")
    if max_cost < 0 or max_valuation < 0:
        raise ValidationError("cost and valuation bounds must be nonnegative")
    labels = list(_LABELS[:agents])
    nodes = ["s"] + labels
    rng = random.Random(seed)
    for _ in range(1000):
        edges = {}
        for a in range(len(nodes)):
            for b in range(a + 1, len(nodes)):
                if rng.random() < edge_probability:
                    edges[(nodes[a], nodes[b])] = rng.randint(0, max_cost)
        valuations = {a: rng.randint(0, max_valuation) for a in labels}
        try:
            return Instance("s", labels, edges, valuations)
        except ValidationError:
            continue
    raise ValidationError("could not sample a connected instance; raise the "
                          "edge probability")


def make_twin_instance(seed: int = 0, extra_agents: int = 2,
                       ranked: bool = False) -> tuple[Instance, str, str]:
    """Instance containing a designated agent pair ('b', 'c') built to
    satisfy the symmetry hypothesis, or the ranking hypothesis when ranked
    is set (b dominates c). Returns (instance, better agent, other agent)."""
    if not 0 <= extra_agents <= MAX_AGENTS - 2:
        raise ValidationError(f"extra agent count must lie in [0, {MAX_AGENTS - 2}]")
    extras = [x for x in _LABELS if x not in ("b", "c")][:extra_agents]
    others = ["s"] + extras
    rng = random.Random(seed)
    for _ in range(1000):
        edges = {}
        for k in others:
            if rng.random() < 0.6:
                base = rng.randint(0, 5)
                edges[("b", k)] = base
                edges[("c", k)] = base + (rng.randint(0, 2) if ranked else 0)
        if rng.random() < 0.5:
            edges[("b", "c")] = rng.randint(0, 5)
        for a in range(len(others)):
            for b in range(a + 1, len(others)):
                if rng.random() < 0.5:
                    edges[(others[a], others[b])] = rng.randint(0, 5)
        v_c = rng.randint(0, 8)
        v_b = v_c + (rng.randint(0, 3) if ranked else 0)
        valuations = {"b": v_b, "c": v_c}
        valuations.update({a: rng.randint(0, 8) for a in extras})
        try:
            return Instance("s", ["b", "c"] + extras, edges, valuations), "b", "c"
        except ValidationError:
            continue
    raise ValidationError("could not sample a connected twin instance")


def scan_for_inefficiency(mechanism, limit: int = 500, agents: int = 4,
                          edge_probability: float = 0.6, max_cost: int = 5,
                          max_valuation: int = 8, seed: int = 0):
    """First seed in [seed, seed + limit) whose generated instance makes the
    mechanism miss the welfare optimum, or None. Used once to pin down a
    reproducible counterexample; kept because it documents how that
    counterexample was found."""
    for s in range(seed, seed + limit):
        inst = generate_instance(agents, edge_probability, max_cost,
                                 max_valuation, seed=s)
        if not check_efficiency(inst, mechanism).holds:
            return s, inst
    return None
