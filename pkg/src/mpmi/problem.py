"""SMT(LRA) CNF problems and their structural analysis."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import CycleError, UnboundedError
from .formula import Atom, Clause, LinearExpr
from .rational import Q, fmt, parse_rational


@dataclass(frozen=True)
class Problem:
    variables: tuple
    clauses: tuple
    support: tuple | None = None  # per variable (lower, upper)
    node_formulas: dict = field(init=False, repr=False, compare=False)
    edge_formulas: dict = field(init=False, repr=False, compare=False)
    hyper_clauses: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes: dict = {v: [] for v in range(len(self.variables))}
        edges: dict = {}
        hyper = []
        for clause in self.clauses:
            vs = sorted(clause.vars)
            if len(vs) == 1:
                nodes[vs[0]].append(clause)
            elif len(vs) == 2:
                edges.setdefault(tuple(vs), []).append(clause)
            else:
                hyper.append(clause)
        object.__setattr__(self, "node_formulas", {v: tuple(cs) for v, cs in nodes.items()})
        object.__setattr__(self, "edge_formulas", {e: tuple(cs) for e, cs in edges.items()})
        object.__setattr__(self, "hyper_clauses", tuple(hyper))

    @property
    def n(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name}") from None

    def edge_clauses(self, i: int, j: int) -> tuple:
        return self.edge_formulas.get((min(i, j), max(i, j)), ())

    def with_clauses(self, extra) -> "Problem":
        return Problem(self.variables, self.clauses + tuple(extra))

    def with_support(self, support) -> "Problem":
        return Problem(self.variables, self.clauses, tuple(support))

    @property
    def infeasible(self) -> bool:
        return self.support is not None and any(lo >= hi for lo, hi in self.support)

    def holds(self, env) -> bool:
        return all(c.holds(env) for c in self.clauses)


# -- primal graph -----------------------------------------------------------


@dataclass(frozen=True)
class PrimalGraph:
    names: tuple
    edges: frozenset  # of (i, j) with i < j

    @property
    def nodes(self) -> tuple:
        return tuple(range(len(self.names)))

    def neighbors(self) -> list:
        adj = [[] for _ in self.names]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    def components(self) -> list:
        adj = self.neighbors()
        seen = [False] * len(self.names)
        comps = []
        for start in self.nodes:
            if seen[start]:
                continue
            seen[start] = True
            comp, queue = [], deque([start])
            while queue:
                u = queue.popleft()
                comp.append(u)
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
            comps.append(sorted(comp))
        return comps


def primal_graph(p: Problem) -> PrimalGraph:
    edges = set()
    for clause in p.clauses:
        vs = sorted(clause.vars)
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                edges.add((vs[a], vs[b]))
    return PrimalGraph(p.variables, frozenset(edges))


def _bfs(adj, source, allowed=None):
    dist = {source: 0}
    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist and (allowed is None or (u, w) in allowed or (w, u) in allowed):
                dist[w] = dist[u] + 1
                parent[w] = u
                queue.append(w)
    return dist, parent


def assert_tree(g: PrimalGraph) -> None:
    """Raise :class:`CycleError` unless every connected component is a tree."""
    root = list(range(len(g.names)))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    forest: set = set()
    adj = g.neighbors()
    for i, j in sorted(g.edges):
        ri, rj = find(i), find(j)
        if ri == rj:
            _, parent = _bfs(adj, i, forest)
            path = [j]
            while path[-1] != i:
                path.append(parent[path[-1]])
            raise CycleError([g.names[v] for v in reversed(path)])
        root[ri] = rj
        forest.add((i, j))


# -- pseudo tree ------------------------------------------------------------


@dataclass(frozen=True)
class PseudoTree:
    roots: tuple  # one per connected component
    parent: dict  # node -> parent (roots excluded)
    children: dict  # node -> sorted children
    downward_order: tuple  # parents before children
    depth: dict

    @property
    def root(self) -> int:
        return self.roots[0]

    @property
    def upward_order(self) -> tuple:
        return tuple(reversed(self.downward_order))

    @property
    def height(self) -> int:
        return max(self.depth.values(), default=0)

    def leaves(self) -> list:
        return [v for v in self.downward_order if not self.children[v]]

    def component_of(self) -> dict:
        comp = {}
        for v in self.downward_order:
            comp[v] = v if v not in self.parent else comp[self.parent[v]]
        return comp


def _orient(g: PrimalGraph, roots) -> PseudoTree:
    adj = g.neighbors()
    parent, children, depth, order = {}, {v: [] for v in g.nodes}, {}, []
    for r in roots:
        depth[r] = 0
        queue = deque([r])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in adj[u]:
                if w not in depth:
                    depth[w] = depth[u] + 1
                    parent[w] = u
                    children[u].append(w)
                    queue.append(w)
    return PseudoTree(tuple(roots), parent, {v: tuple(c) for v, c in children.items()},
                      tuple(order), depth)


def choose_root(g: PrimalGraph) -> PseudoTree:
    """Root every component at a center (minimum height, smallest id on ties)."""
    adj = g.neighbors()
    roots = []
    for comp in g.components():
        best = min(comp, key=lambda v: (max(_bfs(adj, v)[0].values()), v))
        roots.append(best)
    return _orient(g, roots)


def root_at(g: PrimalGraph, r: int) -> PseudoTree:
    """Pseudo tree rooted at ``r`` in its component, centers elsewhere."""
    centers = choose_root(g).roots
    comps = g.components()
    roots = []
    for comp, c in zip(comps, centers):
        roots.append(r if r in comp else c)
    return _orient(g, roots)


# -- support ----------------------------------------------------------------


def _mul(c, bound):
    return None if bound is None else c * bound


def _range(expr: LinearExpr, skip: int, lo, hi):
    """Range [rmin, rmax] of ``expr`` minus the ``skip`` term over the box; None is infinite."""
    rmin = rmax = expr.constant
    for v, c in expr.terms:
        if v == skip:
            continue
        a, b = (lo[v], hi[v]) if c > 0 else (hi[v], lo[v])
        rmin = None if rmin is None or a is None else rmin + c * a
        rmax = None if rmax is None or b is None else rmax + c * b
    return rmin, rmax


def literal_interval(atom: Atom, v: int, lo, hi):
    """Values of ``x_v`` compatible with ``atom`` given the box; ``False`` if none."""
    a = atom.expr.coef(v)
    rmin, _ = _range(atom.expr, v, lo, hi)
    if a == 0:
        if rmin is None or rmin < 0 or (not atom.strict and rmin == 0):
            return (None, None)
        return False
    if rmin is None:
        return (None, None)
    bound = -rmin / a
    return (None, bound) if a > 0 else (bound, None)


def _hull(intervals):
    intervals = [iv for iv in intervals if iv is not False]
    if not intervals:
        return False
    l = None if any(i[0] is None for i in intervals) else min(i[0] for i in intervals)
    u = None if any(i[1] is None for i in intervals) else max(i[1] for i in intervals)
    return (l, u)


def propagate_box(p: Problem, max_rounds: int | None = None):
    """Interval propagation to a fixpoint (or round cap). Returns (lo, hi) lists or None if empty."""
    n = p.n
    lo: list = [None] * n
    hi: list = [None] * n
    rounds = max_rounds or 4 * n + 8
    for _ in range(rounds):
        changed = False
        for clause in p.clauses:
            for v in sorted(clause.vars):
                allowed = _hull(literal_interval(lit, v, lo, hi) for lit in clause.literals)
                if allowed is False:
                    return None
                l, u = allowed
                if l is not None and (lo[v] is None or l > lo[v]):
                    lo[v] = l
                    changed = True
                if u is not None and (hi[v] is None or u < hi[v]):
                    hi[v] = u
                    changed = True
                if lo[v] is not None and hi[v] is not None and lo[v] >= hi[v]:
                    return None
        if not changed:
            break
    return lo, hi


def establish_support(p: Problem) -> Problem:
    """Attach finite per-variable bounds containing every model.

    Raises :class:`UnboundedError` if some variable gets no finite bound.
    An infeasible formula gets empty (0, 0) supports.
    """
    box = propagate_box(p)
    if box is None:
        return p.with_support([(Q(0), Q(0))] * p.n)
    lo, hi = box
    for v in range(p.n):
        if lo[v] is None or hi[v] is None:
            raise UnboundedError(p.variables[v])
    return p.with_support(list(zip(lo, hi)))


# -- statistics -------------------------------------------------------------


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    diameter: int
    h_t: int
    h_p: int
    l: int
    cost_estimate: int

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "diameter": self.diameter, "h_t": self.h_t,
                "h_p": self.h_p, "l": self.l, "cost_estimate": str(self.cost_estimate)}


def graph_stats(p: Problem, t: PseudoTree) -> GraphStats:
    g = primal_graph(p)
    adj = g.neighbors()
    diameter = 0
    for v in g.nodes:
        diameter = max(diameter, max(_bfs(adj, v)[0].values()))
    h_p = 0
    for comp in g.components():
        h_p = max(h_p, max(_bfs(adj, comp[0])[0].values()))
    n = p.n
    m = sum(len(c.literals) for c in p.clauses)
    l = len(t.leaves())
    h_t = t.height
    return GraphStats(n, m, diameter, h_t, h_p, l, l * (n ** 3 * m ** h_p) ** h_t)


# -- JSON -------------------------------------------------------------------


def _atom_json(atom: Atom, names) -> dict:
    return {"coeffs": {names[v]: fmt(c) for v, c in atom.expr.terms},
            "constant": fmt(atom.expr.constant), "strict": atom.strict}


def problem_to_json(p: Problem) -> dict:
    names = p.variables
    index = {c: k for k, c in reversed(list(enumerate(p.clauses)))}
    out = {
        "variables": list(names),
        "clauses": [[_atom_json(a, names) for a in c.literals] for c in p.clauses],
        "node_formulas": {names[v]: [index[c] for c in cs] for v, cs in p.node_formulas.items()},
        "edge_formulas": {f"{names[i]}|{names[j]}": [index[c] for c in cs]
                          for (i, j), cs in sorted(p.edge_formulas.items())},
    }
    if p.support is not None:
        out["support"] = {names[v]: [fmt(lo), fmt(hi)] for v, (lo, hi) in enumerate(p.support)}
    return out


def problem_from_json(data: dict) -> Problem:
    names = tuple(data["variables"])
    idx = {n: i for i, n in enumerate(names)}
    clauses = []
    for c in data["clauses"]:
        lits = []
        for a in c:
            expr = LinearExpr.build({idx[k]: parse_rational(v) for k, v in a["coeffs"].items()},
                                    parse_rational(a["constant"]))
            lits.append(Atom(expr, a["strict"]))
        clauses.append(Clause(tuple(lits)))
    support = None
    if "support" in data:
        support = tuple((parse_rational(data["support"][n][0]), parse_rational(data["support"][n][1]))
                        for n in names)
    return Problem(names, tuple(clauses), support)
