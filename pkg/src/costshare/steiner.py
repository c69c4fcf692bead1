"""Exact minimum Steiner trees on small weighted graphs.

The solver runs the classic terminal-subset dynamic program over shortest
path distances: dp[mask][v] is the cheapest tree spanning the terminals in
``mask`` plus node v. One run with terminal list T answers the cost query
for every subset of T at once, which is what makes whole welfare tables
cheap. Non-terminal nodes may appear in a tree (Steiner points); an
unreachable terminal makes the query infeasible, reported as None rather
than a sentinel cost.

Witness trees are reconstructed by backtracking the DP choices under a fixed
iteration order, so equal-cost ties resolve deterministically. A separate
brute-force oracle (every node superset, cheapest spanning tree) exists only
to cross-check the solver and shares none of its code path.

Solvers are pure after construction; a SteinerCache may be shared freely
within a thread.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .model import (Edge, SizeCapError, ValidationError, Value, WeightedGraph,
                    as_value, edge_key)

MAX_NODES = 14
# Enough for a 12-agent instance plus its source; the subset dynamics are
# exponential in this, so it is the knob that actually bounds runtime.
MAX_TERMINALS = 13
ORACLE_MAX_NODES = 12


@dataclass(frozen=True)
class SteinerResult:
    """A minimum Steiner tree: the terminals, the exact cost, and a witness
    edge set forming a tree that spans the terminals."""

    terminals: frozenset[str]
    cost: Value
    tree_edges: frozenset[Edge]


class _DisjointSet:
    def __init__(self, items):
        self._parent = {x: x for x in items}

    def find(self, x):
        p = self._parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self._parent[rb] = ra
        return True


def _kruskal(nodes: Iterable[str], edges: list[tuple[Edge, Value]]):
    """Spanning tree by ascending (cost, edge key); None when disconnected."""
    nodes = list(nodes)
    ds = _DisjointSet(nodes)
    picked = []
    total = 0
    for e, c in sorted(edges, key=lambda item: (Fraction(item[1]), item[0])):
        if ds.union(*e):
            picked.append(e)
            total += c
    if len(picked) != len(nodes) - 1:
        return None
    return as_value(total), tuple(picked)


class SteinerSolver:
    """Per-graph exact Steiner solver with memoized DP runs.

    A run is keyed by (root, terminal tuple); its dp table answers the cost
    of connecting any terminal subset to the root, so callers that sweep
    subsets should route every query through one root.
    """

    def __init__(self, graph: WeightedGraph):
        if len(graph.nodes) > MAX_NODES:
            raise SizeCapError(f"graph has {len(graph.nodes)} nodes, cap is {MAX_NODES}")
        self.graph = graph
        self._labels = sorted(graph.nodes)
        self._idx = {lab: i for i, lab in enumerate(self._labels)}
        self._n = len(self._labels)
        self._dist, self._nxt = self._shortest_paths()
        self._runs: dict[tuple[int, tuple[int, ...]], tuple] = {}

    def _shortest_paths(self):
        n = self._n
        dist = [[None] * n for _ in range(n)]
        nxt = [[None] * n for _ in range(n)]
        for i in range(n):
            dist[i][i] = 0
            nxt[i][i] = i
        for (u, v), c in self.graph.edges().items():
            i, j = self._idx[u], self._idx[v]
            dist[i][j] = dist[j][i] = c
            nxt[i][j] = j
            nxt[j][i] = i
        for k in range(n):
            dk = dist[k]
            for i in range(n):
                dik = dist[i][k]
                if dik is None:
                    continue
                di = dist[i]
                ni = nxt[i]
                for j in range(n):
                    dkj = dk[j]
                    if dkj is None:
                        continue
                    alt = dik + dkj
                    if di[j] is None or alt < di[j]:
                        di[j] = alt
                        ni[j] = ni[k]
        return dist, nxt

    def _path_edges(self, i: int, j: int) -> list[Edge]:
        edges = []
        hops = 0
        while i != j:
            k = self._nxt[i][j]
            edges.append(edge_key(self._labels[i], self._labels[k]))
            i = k
            hops += 1
            if hops > self._n:
                raise AssertionError("shortest path reconstruction cycled")
        return edges

    def _term_indices(self, terminals) -> list[int]:
        out = []
        for t in terminals:
            if t not in self._idx:
                raise ValidationError(f"terminal {t!r} is not a node of the graph")
            out.append(self._idx[t])
        return out

    def _run(self, root: int, terms: tuple[int, ...]):
        key = (root, terms)
        run = self._runs.get(key)
        if run is None:
            run = self._dreyfus_wagner(root, terms)
            self._runs[key] = run
        return run

    def _dreyfus_wagner(self, root: int, terms: tuple[int, ...]):
        if len(terms) + 1 > MAX_TERMINALS:
            raise SizeCapError(
                f"{len(terms) + 1} terminals requested, cap is {MAX_TERMINALS}")
        n, dist = self._n, self._dist
        size = 1 << len(terms)
        dp: list = [None] * size
        growc: list = [None] * size
        mergec: list = [None] * size
        dp[0] = None  # mask 0 is handled by callers (cost 0, empty tree)
        for mask in range(1, size):
            if mask & (mask - 1) == 0:
                t = terms[mask.bit_length() - 1]
                dp[mask] = list(dist[t])
                continue
            low = mask & -mask
            merged = [None] * n
            mc = [None] * n
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    rest = mask ^ sub
                    dsub, drest = dp[sub], dp[rest]
                    for v in range(n):
                        a = dsub[v]
                        if a is None:
                            continue
                        b = drest[v]
                        if b is None:
                            continue
                        c = a + b
                        if merged[v] is None or c < merged[v]:
                            merged[v] = c
                            mc[v] = sub
                sub = (sub - 1) & mask
            row = [None] * n
            gc = [None] * n
            for v in range(n):
                dv = dist[v]
                best = None
                bu = None
                for u in range(n):
                    mu = merged[u]
                    if mu is None:
                        continue
                    duv = dv[u]
                    if duv is None:
                        continue
                    c = mu + duv
                    if best is None or c < best:
                        best = c
                        bu = u
                row[v] = best
                gc[v] = bu
            dp[mask] = row
            growc[mask] = gc
            mergec[mask] = mc
        return dp, growc, mergec

    def cost_table(self, root_label: str, terminal_labels: tuple[str, ...]):
        """Exact connection cost of {root} plus every subset of the terminal
        list, indexed by subset bitmask over the given order. None marks an
        infeasible (disconnected) subset."""
        root = self._term_indices([root_label])[0]
        terms = tuple(self._term_indices(terminal_labels))
        dp, _, _ = self._run(root, terms)
        out = [0] * (1 << len(terms))
        for mask in range(1, 1 << len(terms)):
            row = dp[mask]
            c = row[root]
            out[mask] = as_value(c) if c is not None else None
        return out

    def _collect_edges(self, run, terms, mask: int, v: int, acc: set):
        dp, growc, mergec = run
        if mask & (mask - 1) == 0:
            t = terms[mask.bit_length() - 1]
            acc.update(self._path_edges(t, v))
            return
        u = growc[mask][v]
        acc.update(self._path_edges(u, v))
        sub = mergec[mask][u]
        self._collect_edges(run, terms, sub, u, acc)
        self._collect_edges(run, terms, mask ^ sub, u, acc)

    def _canonical_tree(self, edges: set[Edge], keep: frozenset[str]) -> frozenset[Edge]:
        """Reduce a connected witness edge set to a tree and drop degree-one
        non-terminals. Both steps can only shed zero-cost redundancy, which
        the caller asserts by comparing costs."""
        if not edges:
            return frozenset()
        nodes = {v for e in edges for v in e}
        tree = _kruskal(nodes, [(e, self.graph.cost(*e)) for e in edges])
        picked = set(tree[1])
        while True:
            degree: dict[str, int] = {}
            for a, b in picked:
                degree[a] = degree.get(a, 0) + 1
                degree[b] = degree.get(b, 0) + 1
            drop = [e for e in picked
                    if any(degree[x] == 1 and x not in keep for x in e)]
            if not drop:
                return frozenset(picked)
            picked.difference_update(drop)

    def tree_for_mask(self, root_label: str, terminal_labels: tuple[str, ...],
                      mask: int) -> frozenset[Edge]:
        """Witness tree for one subset out of a cost_table run. The subset
        must be feasible."""
        root = self._term_indices([root_label])[0]
        terms = tuple(self._term_indices(terminal_labels))
        if mask == 0:
            return frozenset()
        run = self._run(root, terms)
        if run[0][mask][root] is None:
            raise ValidationError("no tree exists for an infeasible subset")
        acc: set[Edge] = set()
        self._collect_edges(run, terms, mask, root, acc)
        keep = frozenset({root_label} | {terminal_labels[b]
                                         for b in range(len(terms)) if mask >> b & 1})
        tree = self._canonical_tree(acc, keep)
        want = run[0][mask][root]
        got = self.graph.total_cost(tree)
        if got != want:
            raise AssertionError(f"witness cost {got} disagrees with dp value {want}")
        return tree

    def cost(self, terminals) -> Value | None:
        """Cheapest cost of a tree spanning the terminal set, or None."""
        terms = sorted(frozenset(terminals))
        if len(terms) <= 1:
            return 0
        rest = tuple(terms[1:])
        table = self.cost_table(terms[0], rest)
        return table[(1 << len(rest)) - 1]

    def tree(self, terminals) -> SteinerResult | None:
        """Minimum tree with witness for the terminal set, or None."""
        tset = frozenset(terminals)
        terms = sorted(tset)
        self._term_indices(terms)
        if len(terms) <= 1:
            return SteinerResult(tset, 0, frozenset())
        rest = tuple(terms[1:])
        table = self.cost_table(terms[0], rest)
        full = (1 << len(rest)) - 1
        if table[full] is None:
            return None
        edges = self.tree_for_mask(terms[0], rest, full)
        return SteinerResult(tset, table[full], edges)


class SteinerCache:
    """Caller-owned memo of solvers keyed by graph content, so repeated
    queries against the same induced graph reuse one DP."""

    def __init__(self):
        self._solvers: dict = {}

    def solver(self, graph: WeightedGraph) -> SteinerSolver:
        s = self._solvers.get(graph.fingerprint)
        if s is None:
            s = SteinerSolver(graph)
            self._solvers[graph.fingerprint] = s
        return s


def steiner_cost(graph: WeightedGraph, terminals,
                 cache: SteinerCache | None = None) -> SteinerResult | None:
    """Exact minimum Steiner tree of the terminal set, or None if some
    terminals cannot be connected."""
    solver = cache.solver(graph) if cache is not None else SteinerSolver(graph)
    return solver.tree(terminals)


@lru_cache(maxsize=128)
def _induced_mst_table(graph: WeightedGraph):
    """For every node-subset mask (over sorted nodes): (cost, tree edges) of
    the spanning tree of the induced subgraph, or None when disconnected."""
    nodes = sorted(graph.nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    edges = [(e, c, 1 << idx[e[0]] | 1 << idx[e[1]])
             for e, c in sorted(graph.edges().items(),
                                key=lambda item: (Fraction(item[1]), item[0]))]
    table = [None] * (1 << len(nodes))
    table[0] = (0, ())
    for mask in range(1, 1 << len(nodes)):
        members = [v for i, v in enumerate(nodes) if mask >> i & 1]
        ds = _DisjointSet(members)
        picked = []
        total = 0
        for e, c, ebits in edges:
            if ebits & mask == ebits and ds.union(*e):
                picked.append(e)
                total += c
        if len(picked) == len(members) - 1:
            table[mask] = (as_value(total), tuple(picked))
    return table


def brute_force_steiner_oracle(graph: WeightedGraph, terminals) -> SteinerResult | None:
    """Reference answer by exhaustion: minimize the induced spanning tree
    over every node superset of the terminals.

    Ascending mask enumeration with strict improvement means the winning
    superset is subset-minimal among optima, so its tree carries no
    removable non-terminal leaves. Intentionally independent of the DP
    solver; only meant for graphs of at most 12 nodes.
    """
    if len(graph.nodes) > ORACLE_MAX_NODES:
        raise SizeCapError(
            f"oracle accepts at most {ORACLE_MAX_NODES} nodes, got {len(graph.nodes)}")
    tset = frozenset(terminals)
    nodes = sorted(graph.nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    for t in tset:
        if t not in idx:
            raise ValidationError(f"terminal {t!r} is not a node of the graph")
    if len(tset) <= 1:
        return SteinerResult(tset, 0, frozenset())
    tmask = 0
    for t in tset:
        tmask |= 1 << idx[t]
    table = _induced_mst_table(graph)
    best = None
    best_entry = None
    for mask in range(1 << len(nodes)):
        if mask & tmask != tmask:
            continue
        entry = table[mask]
        if entry is None:
            continue
        if best is None or entry[0] < best:
            best = entry[0]
            best_entry = entry
    if best is None:
        return None
    return SteinerResult(tset, best, frozenset(best_entry[1]))


def contract_into_source(graph: WeightedGraph, merged, source: str) -> WeightedGraph:
    """Merge a node set containing the source into a single source node.

    Parallel attachment edges collapse to the cheapest original edge, ties
    going to the lexicographically smallest one; edges inside the merged set
    vanish. The result's ``origins`` map each surviving source edge back to
    the original edge it stands for.
    """
    merged = frozenset(merged)
    if source not in merged:
        raise ValidationError("the merged set must contain the source")
    if not merged <= graph.nodes:
        raise ValidationError("merged nodes must belong to the graph")
    nodes = (graph.nodes - merged) | {source}
    costs: dict[Edge, Value] = {}
    origins: dict[Edge, Edge] = {}
    for e, c in sorted(graph.edges().items()):
        u, v = e
        um, vm = u in merged, v in merged
        if um and vm:
            continue
        if um or vm:
            out = v if um else u
            k = edge_key(out, source)
            if k not in costs or c < costs[k]:
                costs[k] = c
                origins[k] = graph.origin_of(e)
        else:
            costs[e] = c
            o = graph.origin_of(e)
            if o != e:
                origins[e] = o
    return WeightedGraph(nodes, costs, origins)
