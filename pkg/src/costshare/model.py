"""Core data model: weighted graphs, instances, and report profiles.

An instance is a connected undirected graph over a set of agent nodes plus a
distinguished source node, with nonnegative edge costs and one private
valuation per agent. Agents report a subset of their incident edges and a
valuation; the source implicitly reports all of its true edges. An edge is
present in the induced graph only when both endpoints declare it.

All costs and valuations are exact rationals (int or fractions.Fraction);
floats are rejected at the boundary. Every type here is immutable after
construction, so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Value = Union[int, Fraction]
Edge = tuple[str, str]


class ValidationError(ValueError):
    """Raised when an instance, profile, or document violates an invariant."""


class SizeCapError(RuntimeError):
    """Raised when an operation is asked to exceed its configured size cap."""


def as_value(x) -> Value:
    """Normalize an exact number: Fractions with denominator 1 become ints.

    Accepts int, Fraction, or a string like "3", "3/2", "0.5". Floats are
    rejected so no binary rounding can leak into the arithmetic.
    """
    if isinstance(x, bool):
        raise ValidationError(f"malformed number: {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, str):
        try:
            f = Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"malformed number: {x!r}") from exc
        return int(f) if f.denominator == 1 else f
    raise ValidationError(f"malformed number: {x!r} (floats are not accepted)")


def value_to_json(v: Value):
    """Render a value for JSON output: ints stay ints, proper fractions
    become "p/q" strings so round-trips stay exact. Fractions that have
    collapsed to whole numbers (sums do that) are rendered as ints."""
    v = as_value(v)
    if isinstance(v, int):
        return v
    return f"{v.numerator}/{v.denominator}"


def exact_div(a: Value, b: Value) -> Value:
    return as_value(Fraction(a) / Fraction(b))


def edge_key(u: str, v: str) -> Edge:
    """Canonical undirected edge key: endpoints in label order."""
    if u == v:
        raise ValidationError(f"self-loop at {u!r}")
    return (u, v) if u < v else (v, u)


class WeightedGraph:
    """Immutable undirected graph with exact edge costs.

    ``origins`` maps an edge of this graph back to an edge of the graph it
    was derived from (used after contraction); it defaults to the identity.
    Hashable by content so solvers can be memoized per graph.
    """

    __slots__ = ("nodes", "_costs", "_adj", "origins", "_fingerprint")

    def __init__(self, nodes: Iterable[str], costs: Mapping[Edge, Value],
                 origins: Mapping[Edge, Edge] | None = None):
        self.nodes = frozenset(nodes)
        cleaned = {}
        adj: dict[str, dict[str, Value]] = {v: {} for v in self.nodes}
        for (u, v), c in costs.items():
            k = edge_key(u, v)
            if u not in self.nodes or v not in self.nodes:
                raise ValidationError(f"edge {k} has an undeclared endpoint")
            if k in cleaned:
                raise ValidationError(f"duplicate edge {k}")
            c = as_value(c)
            if c < 0:
                raise ValidationError(f"negative cost on edge {k}")
            cleaned[k] = c
            adj[k[0]][k[1]] = c
            adj[k[1]][k[0]] = c
        self._costs = cleaned
        self._adj = adj
        self.origins = dict(origins) if origins else {}
        self._fingerprint = (
            tuple(sorted(self.nodes)),
            tuple(sorted((u, v, Fraction(c)) for (u, v), c in cleaned.items())),
        )

    def cost(self, u: str, v: str) -> Value:
        return self._costs[edge_key(u, v)]

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self._costs

    def edges(self) -> dict[Edge, Value]:
        return dict(self._costs)

    def adjacent(self, v: str) -> dict[str, Value]:
        """Neighbors of v with the cost of the connecting edge."""
        return dict(self._adj[v])

    def origin_of(self, e: Edge) -> Edge:
        return self.origins.get(e, e)

    def total_cost(self, edges: Iterable[Edge]) -> Value:
        return as_value(sum(Fraction(self._costs[edge_key(*e)]) for e in edges))

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            for w in self._adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.nodes)

    def component_of(self, v: str) -> frozenset[str]:
        seen = {v}
        stack = [v]
        while stack:
            for w in self._adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(seen)

    @property
    def fingerprint(self):
        return self._fingerprint

    def __eq__(self, other):
        return isinstance(other, WeightedGraph) and self._fingerprint == other._fingerprint

    def __hash__(self):
        return hash(self._fingerprint)

    def __repr__(self):
        return f"WeightedGraph({sorted(self.nodes)}, {len(self._costs)} edges)"


class Instance:
    """The true world: source label, agent set, edge costs, true valuations.

    The full graph must be connected and the source must not be an agent.
    Immutable after construction.
    """

    __slots__ = ("source", "agents", "graph", "valuations")

    def __init__(self, source: str, agents: Iterable[str],
                 edges: Mapping[Edge, Value], valuations: Mapping[str, Value]):
        agents = list(agents)
        if len(agents) != len(set(agents)):
            raise ValidationError("duplicate node label in agent list")
        if source in agents:
            raise ValidationError("source label also appears in the agent set")
        self.source = source
        self.agents = frozenset(agents)
        self.graph = WeightedGraph(self.agents | {source}, edges)
        vals = {}
        for a, v in valuations.items():
            if a not in self.agents:
                raise ValidationError(f"valuation for unknown agent {a!r}")
            v = as_value(v)
            if v < 0:
                raise ValidationError(f"negative valuation for agent {a!r}")
            vals[a] = v
        missing = self.agents - vals.keys()
        if missing:
            raise ValidationError(f"missing valuation for {sorted(missing)}")
        self.valuations = vals
        if not self.graph.is_connected():
            raise ValidationError("the true graph must be connected")

    def agent_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.agents))

    def true_edges_of(self, i: str) -> frozenset[Edge]:
        """Canonical keys of the edges truly incident to node i."""
        return frozenset(edge_key(i, w) for w in self.graph.adjacent(i))

    def __repr__(self):
        return (f"Instance(source={self.source!r}, agents={sorted(self.agents)}, "
                f"{len(self.graph.edges())} edges)")


@dataclass(frozen=True)
class AgentReport:
    """One agent's declaration: a subset of its incident edges plus a value."""

    edges: frozenset[Edge]
    valuation: Value

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(edge_key(*e) for e in self.edges))
        v = as_value(self.valuation)
        if v < 0:
            raise ValidationError("reported valuation must be nonnegative")
        object.__setattr__(self, "valuation", v)


@dataclass(frozen=True)
class ReportProfile:
    """A full profile of agent reports for one instance.

    ``reports`` covers exactly the agent set. The source is not part of the
    profile; it always declares all of its true edges.
    """

    instance: Instance
    reports: Mapping[str, AgentReport]

    def __post_init__(self):
        reports = dict(self.reports)
        if set(reports) != set(self.instance.agents):
            raise ValidationError("profile must cover exactly the agent set")
        for i, rep in reports.items():
            extra = rep.edges - self.instance.true_edges_of(i)
            if extra:
                raise ValidationError(
                    f"agent {i!r} declares edges it does not have: {sorted(extra)}")
        object.__setattr__(self, "reports", reports)

    def valuation(self, i: str) -> Value:
        return self.reports[i].valuation

    def reported_valuations(self) -> dict[str, Value]:
        return {i: r.valuation for i, r in self.reports.items()}

    def is_truthful(self) -> bool:
        inst = self.instance
        return all(r.edges == inst.true_edges_of(i) and r.valuation == inst.valuations[i]
                   for i, r in self.reports.items())


def truthful_profile(instance: Instance) -> ReportProfile:
    """The profile where every agent declares all true edges and its true value."""
    return ReportProfile(instance, {
        i: AgentReport(instance.true_edges_of(i), instance.valuations[i])
        for i in instance.agents
    })


def induced_graph(profile: ReportProfile) -> WeightedGraph:
    """Graph induced by a profile: an edge survives only if both endpoints
    declare it. The source declares all its true edges, so a source edge
    survives whenever the agent endpoint declares it. The node set is kept
    whole; nodes may end up isolated."""
    inst = profile.instance
    declared = {i: r.edges for i, r in profile.reports.items()}
    costs = {}
    for e, c in inst.graph.edges().items():
        u, v = e
        u_ok = u == inst.source or e in declared[u]
        v_ok = v == inst.source or e in declared[v]
        if u_ok and v_ok:
            costs[e] = c
    return WeightedGraph(inst.graph.nodes, costs)


def neighbors(profile: ReportProfile, i: str) -> frozenset[str]:
    """Agent nodes adjacent to i in the induced graph (the source is never a
    member of the result, matching the agent-only neighborhood definition).

    i may be an agent or the source.
    """
    inst = profile.instance
    if i != inst.source and i not in inst.agents:
        raise ValidationError(f"unknown node {i!r}")
    g = induced_graph(profile)
    return frozenset(w for w in g.adjacent(i) if w != inst.source)


def apply_deviation(profile: ReportProfile, i: str, report: AgentReport) -> ReportProfile:
    """A copy of the profile where agent i reports ``report`` instead.

    Errors if the deviation declares an edge i does not truly have; profile
    validation enforces that.
    """
    if i not in profile.instance.agents:
        raise ValidationError(f"unknown agent {i!r}")
    reports = dict(profile.reports)
    reports[i] = report
    return ReportProfile(profile.instance, reports)
