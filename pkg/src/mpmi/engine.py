"""Message passing for model integration on tree-shaped formulas."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import ConsistencyError, NonConformingQuery, NonTreeError, UndefinedDistribution
from .formula import formula_vars, to_cnf
from .piecewise import (
    Piece,
    PiecewisePoly,
    canonicalize,
    constant_one,
    pw_integrate_numeric,
    pw_multiply,
    pw_total,
    restrict,
)
from .poly import (
    AffineExpr,
    Polynomial,
    poly_add,
    poly_antiderivative,
    poly_compose_affine,
    poly_mul,
    poly_scale,
)
from .problem import Problem, PseudoTree, assert_tree, choose_root, establish_support, primal_graph, root_at
from .rational import Q, ZERO, fmt, parse_rational

# -- one-dimensional case analysis ------------------------------------------


def univariate_intervals(clauses, v: int, lo, hi) -> list:
    """Disjoint open intervals of (lo, hi) where every clause holds for ``x_v``.

    All atoms must mention at most the variable ``v``.
    """
    if not lo < hi:
        return []
    cuts = {lo, hi}
    for clause in clauses:
        for atom in clause.literals:
            a = atom.expr.coef(v)
            if a != 0:
                r = -atom.expr.constant / a
                if lo < r < hi:
                    cuts.add(r)
    cuts = sorted(cuts)
    out: list = []
    for l, u in zip(cuts, cuts[1:]):
        env = {v: (l + u) / 2}
        if all(c.holds(env) for c in clauses):
            if out and out[-1][1] == l:
                out[-1] = (out[-1][0], u)
            else:
                out.append((l, u))
    return out


# -- compiled edge formulas -------------------------------------------------


def _compile(clauses, i: int, j: int) -> list:
    """Each clause as a list of (a_i, a_j, constant, strict)."""
    out = []
    for clause in clauses:
        lits = []
        for atom in clause.literals:
            e = atom.expr
            extra = e.vars - {i, j}
            if extra:
                raise NonTreeError(f"atom mentions variables outside edge ({i}, {j})")
            lits.append((e.coef(i), e.coef(j), e.constant, atom.strict))
        out.append(lits)
    return out


def _holds(compiled, x, y) -> bool:
    for clause in compiled:
        for ai, aj, d, strict in clause:
            val = ai * x + aj * y + d
            if val < 0 or (not strict and val == 0):
                break
        else:
            return False
    return True


def _boundaries(compiled):
    """Affine x_i-boundaries of atoms (as AffineExpr in y) and roots of y-only atoms."""
    lines, y_roots = set(), set()
    for clause in compiled:
        for ai, aj, d, _ in clause:
            if ai != 0:
                lines.add(AffineExpr(-aj / ai, -d / ai))
            elif aj != 0:
                y_roots.add(-d / aj)
    return lines, y_roots


# -- the three subroutines --------------------------------------------------


def critical_points(b: PiecewisePoly, node_clauses, edge_clauses, i: int, j: int, support_j) -> list:
    """Sorted values of x_j where the shape of the x_i-integration region may change."""
    lo, hi = support_j
    compiled = _compile(edge_clauses, i, j)
    lines, points = _boundaries(compiled)
    betas = set(b.breakpoints())
    for clause in node_clauses:
        for atom in clause.literals:
            a = atom.expr.coef(i)
            if a != 0:
                betas.add(-atom.expr.constant / a)
    sloped = []
    for line in lines:
        if line.slope == 0:
            betas.add(line.intercept)
        else:
            sloped.append(line)
    for k, p in enumerate(sloped):
        for q in sloped[k + 1:]:
            if p.slope != q.slope:
                points.add((q.intercept - p.intercept) / (p.slope - q.slope))
    for line in sloped:
        for beta in betas:
            points.add((beta - line.intercept) / line.slope)
    return sorted({lo, hi} | {p for p in points if lo < p < hi})


def intervals_from_points(points) -> list:
    return list(zip(points, points[1:]))


def _sat_intervals(compiled, lines, b_lo, b_hi, y):
    """Maximal x_i-intervals at x_j = y, as pairs of affine bounds, inside [b_lo, b_hi]."""
    bounds = {AffineExpr.const(b_lo): b_lo, AffineExpr.const(b_hi): b_hi}
    for line in lines:
        v = line(y)
        if b_lo < v < b_hi:
            bounds[line] = v
    ordered = sorted(bounds.items(), key=lambda kv: kv[1])
    out = []
    run_start = None
    for (f0, v0), (f1, v1) in zip(ordered, ordered[1:]):
        if v0 == v1:
            continue
        ok = _holds(compiled, (v0 + v1) / 2, y)
        if ok and run_start is None:
            run_start = (f0, v0)
        elif not ok and run_start is not None:
            out.append((run_start, (f0, v0)))
            run_start = None
    if run_start is not None:
        out.append((run_start, ordered[-1]))
    return out


class _Integrand:
    """A belief-side factor prepared for repeated partial integration."""

    def __init__(self, b: PiecewisePoly):
        self.pieces = b.pieces
        self.lowers = [p.lower for p in b.pieces]
        self.uppers = [p.upper for p in b.pieces]
        self.F = [poly_antiderivative(p.poly) for p in b.pieces]
        self.full = [F(p.upper) - F(p.lower) for F, p in zip(self.F, b.pieces)]

    def triples(self, lower: AffineExpr, upper: AffineExpr, lv, uv):
        """(lower, upper, piece index) for every piece overlapping (lv, uv)."""
        k = bisect_right(self.uppers, lv)
        while k < len(self.pieces) and self.lowers[k] < uv:
            p = self.pieces[k]
            lo = lower if lv >= p.lower else AffineExpr.const(p.lower)
            hi = upper if uv <= p.upper else AffineExpr.const(p.upper)
            yield lo, hi, k
            k += 1

    def integral(self, lower: AffineExpr, upper: AffineExpr, lv, uv) -> Polynomial:
        total = []
        const = ZERO
        for lo, hi, k in self.triples(lower, upper, lv, uv):
            p = self.pieces[k]
            if lo.slope == 0 and hi.slope == 0:
                if lo.intercept == p.lower and hi.intercept == p.upper:
                    const += self.full[k]
                else:
                    F = self.F[k]
                    const += F(hi.intercept) - F(lo.intercept)
                continue
            F = self.F[k]
            total = poly_add(total, poly_add(poly_compose_affine(F, hi),
                                             poly_scale(poly_compose_affine(F, lo), -1)))
        return poly_add(total, (const,))


def symbolic_bounds(b: PiecewisePoly, interval, node_clauses, edge_clauses, i: int, j: int) -> list:
    """Integration triples (lower, upper, integrand) valid throughout ``interval`` of x_j."""
    if node_clauses and b:
        lo, hi = b.support
        b = restrict(b, univariate_intervals(node_clauses, i, lo, hi))
    if not b:
        return []
    compiled = _compile(edge_clauses, i, j)
    lines, _ = _boundaries(compiled)
    y = (interval[0] + interval[1]) / 2
    prep = _Integrand(b)
    lo, hi = b.support
    out = []
    for (lf, lv), (uf, uv) in _sat_intervals(compiled, lines, lo, hi, y):
        for l, u, k in prep.triples(lf, uf, lv, uv):
            out.append((l, u, b.pieces[k].poly))
    return out


def send_message(b: PiecewisePoly, edge_clauses, i: int, j: int, support_j) -> PiecewisePoly:
    """Message from x_i to x_j: the integral over x_i of 1[edge formula] times ``b``.

    ``b`` already carries the indicator of the node formula of x_i and the
    incoming messages from the other neighbours.
    """
    if not b or not support_j[0] < support_j[1]:
        return PiecewisePoly()
    points = critical_points(b, (), edge_clauses, i, j, support_j)
    compiled = _compile(edge_clauses, i, j)
    lines, _ = _boundaries(compiled)
    prep = _Integrand(b)
    b_lo, b_hi = b.support
    pieces = []
    for l, u in intervals_from_points(points):
        y = (l + u) / 2
        poly: Polynomial = Polynomial()
        for (lf, lv), (uf, uv) in _sat_intervals(compiled, lines, b_lo, b_hi, y):
            poly = poly_add(poly, prep.integral(lf, uf, lv, uv))
        if poly:
            pieces.append(Piece(l, u, poly))
    return canonicalize(PiecewisePoly(tuple(pieces)))


# -- full runs --------------------------------------------------------------


@dataclass
class BeliefTable:
    problem: Problem
    tree: PseudoTree
    messages: dict  # (src, dst) -> PiecewisePoly in x_dst
    beliefs: dict  # node -> PiecewisePoly
    mi_value: Q
    node_sets: dict = field(repr=False)  # node -> intervals satisfying its node formula
    excluding: dict = field(repr=False)  # (node, neighbour) -> product of other incoming messages
    scale: dict = field(repr=False)  # node -> MI of the other components
    component_mi: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        names = self.problem.variables
        return {
            "mi_value": fmt(self.mi_value),
            "messages": {f"{names[a]}->{names[b]}": m.to_json()
                         for (a, b), m in sorted(self.messages.items())},
            "beliefs": {names[v]: self.beliefs[v].to_json() for v in sorted(self.beliefs)},
        }


def _node(p: Problem, v) -> int:
    return p.index(v) if isinstance(v, str) else v


def _prepare(p: Problem) -> Problem:
    if p.support is None:
        p = establish_support(p)
    if p.hyper_clauses:
        raise NonTreeError("non-tree clause: primal graph would contain a clique")
    return p


def _node_sets(p: Problem) -> dict:
    return {v: univariate_intervals(p.node_formulas[v], v, *p.support[v]) for v in range(p.n)}


def _side_sizes(t: PseudoTree) -> dict:
    size = {}
    for v in t.upward_order:
        size[v] = 1 + sum(size[c] for c in t.children[v])
    comp = t.component_of()
    return size, {v: size[comp[v]] for v in size}


def _product(factors, lower, upper) -> PiecewisePoly:
    acc = constant_one(lower, upper)
    for f in factors:
        if not acc:
            break
        acc = pw_multiply(acc, f)
    return acc


def run(p: Problem, t: PseudoTree | None = None, check_degree: bool = True) -> BeliefTable:
    """Upward then downward pass; returns every message, belief and the MI."""
    p = _prepare(p)
    g = primal_graph(p)
    assert_tree(g)
    if t is None:
        t = choose_root(g)
    sets = _node_sets(p)
    base = {v: PiecewisePoly.indicator(sets[v]) for v in range(p.n)}
    neighbours = g.neighbors()
    messages: dict = {}

    def send(src, dst, incoming):
        b = base[src]
        for m in incoming:
            if not b:
                break
            b = pw_multiply(b, m)
        return send_message(b, p.edge_clauses(src, dst), src, dst, p.support[dst])

    for v in t.upward_order:
        if v in t.parent:
            messages[(v, t.parent[v])] = send(v, t.parent[v], [messages[(c, v)] for c in t.children[v]])

    excluding: dict = {}
    for v in t.downward_order:
        nbrs = neighbours[v]
        incoming = [messages[(c, v)] for c in nbrs if (c, v) in messages]
        # prefix/suffix products give "all incoming but one" in linear time
        lo, hi = p.support[v]
        prefix = [constant_one(lo, hi)]
        for m in incoming[:-1]:
            prefix.append(pw_multiply(prefix[-1], m))
        suffix = constant_one(lo, hi)
        for k in range(len(nbrs) - 1, -1, -1):
            excl = pw_multiply(prefix[k], suffix)
            excluding[(v, nbrs[k])] = excl
            suffix = pw_multiply(suffix, incoming[k])
        for c in t.children[v]:
            messages[(v, c)] = send(v, c, [excluding[(v, c)]])

    beliefs = {}
    for v in range(p.n):
        lo, hi = p.support[v]
        beliefs[v] = _product([messages[(c, v)] for c in neighbours[v]], lo, hi)

    if check_degree:
        size, comp_size = _side_sizes(t)
        for (a, b), m in messages.items():
            sending = size[a] if t.parent.get(a) == b else comp_size[a] - size[b]
            if m.degree > sending:
                raise ConsistencyError(f"message {a}->{b} has degree {m.degree} > {sending}")

    comp = t.component_of()
    component_mi = {r: pw_total(pw_multiply(base[r], beliefs[r])) for r in t.roots}
    mi_value = Q(1)
    for value in component_mi.values():
        mi_value *= value
    scale = {}
    for v in range(p.n):
        s = Q(1)
        for r, value in component_mi.items():
            if r != comp[v]:
                s *= value
        scale[v] = s
        if s != 1:
            beliefs[v] = beliefs[v].scale(s)
    return BeliefTable(p, t, messages, beliefs, mi_value, sets, excluding, scale, component_mi)


def run_rooted(p: Problem, root=None) -> Q:
    """Upward pass only towards a single root per component (no cache)."""
    p = _prepare(p)
    g = primal_graph(p)
    assert_tree(g)
    t = choose_root(g) if root is None else root_at(g, _node(p, root))
    sets = _node_sets(p)
    incoming: dict = {v: [] for v in range(p.n)}
    total = Q(1)
    for v in t.upward_order:
        b = PiecewisePoly.indicator(sets[v])
        for m in incoming[v]:
            if not b:
                break
            b = pw_multiply(b, m)
        if v in t.parent:
            u = t.parent[v]
            incoming[u].append(send_message(b, p.edge_clauses(v, u), v, u, p.support[u]))
        else:
            total *= pw_total(b)
    return total


def node_mi(table: BeliefTable, v: int) -> Q:
    return pw_total(restrict(table.beliefs[v], table.node_sets[v]))


def mi(table: BeliefTable, p: Problem | None = None) -> Q:
    """The MI value, after checking that every node's belief integrates to it."""
    for v in table.beliefs:
        value = node_mi(table, v)
        if value != table.mi_value:
            raise ConsistencyError(
                f"node {table.problem.variables[v]} integrates to {value}, expected {table.mi_value}")
    return table.mi_value


def _require_mass(table: BeliefTable):
    if table.mi_value == 0:
        raise UndefinedDistribution()


def marginal(table: BeliefTable, p: Problem | None, i) -> PiecewisePoly:
    """Normalized density of x_i."""
    _require_mass(table)
    i = _node(table.problem, i)
    return restrict(table.beliefs[i], table.node_sets[i]).scale(1 / table.mi_value)


def moment(table: BeliefTable, p: Problem | None, i, k: int) -> Q:
    if k < 0:
        raise ValueError("moment order must be non-negative")
    dens = marginal(table, p, i)
    xk = Polynomial([0] * k + [1])
    return pw_total(dens.map_poly(lambda f: poly_mul(f, xk)))


def query_univariate(table: BeliefTable, p: Problem | None, i, phi) -> Q:
    """P(phi) for a query over x_i alone, answered from the cached belief."""
    _require_mass(table)
    q = table.problem
    i = _node(q, i)
    if not formula_vars(phi) <= {i}:
        raise NonConformingQuery("univariate query mentions other variables")
    lo, hi = q.support[i]
    cnf = to_cnf(phi)
    region = univariate_intervals(q.node_formulas[i] + cnf, i, lo, hi)
    total = ZERO
    for l, u in region:
        total += pw_integrate_numeric(table.beliefs[i], l, u)
    return total / table.mi_value


def query_bivariate(table: BeliefTable, p: Problem | None, i, j, phi) -> Q:
    """P(phi) for a query over an edge {x_i, x_j}, via one updated message."""
    _require_mass(table)
    q = table.problem
    i, j = _node(q, i), _node(q, j)
    if (j, i) not in table.messages:
        raise NonConformingQuery("query does not conform to primal graph")
    if not formula_vars(phi) <= {i, j}:
        raise NonConformingQuery("bivariate query mentions other variables")
    clauses = q.edge_clauses(i, j) + to_cnf(phi)
    b = pw_multiply(PiecewisePoly.indicator(table.node_sets[j]), table.excluding[(j, i)])
    updated = send_message(b, clauses, j, i, q.support[i])
    bi = pw_multiply(table.excluding[(i, j)], updated)
    value = pw_total(restrict(bi, table.node_sets[i])) * table.scale[i]
    return value / table.mi_value


def table_from_json(data: dict, p: Problem) -> BeliefTable:
    """Rebuild a table (and its caches) from :meth:`BeliefTable.to_json` output."""
    p = _prepare(p)
    g = primal_graph(p)
    t = choose_root(g)
    idx = {n: k for k, n in enumerate(p.variables)}
    messages = {}
    for key, val in data["messages"].items():
        a, b = key.split("->")
        messages[(idx[a], idx[b])] = PiecewisePoly.from_json(val)
    beliefs = {idx[n]: PiecewisePoly.from_json(v) for n, v in data["beliefs"].items()}
    neighbours = g.neighbors()
    excluding = {}
    for v in range(p.n):
        lo, hi = p.support[v]
        for c in neighbours[v]:
            excluding[(v, c)] = _product([messages[(o, v)] for o in neighbours[v] if o != c], lo, hi)
    sets = _node_sets(p)
    comp = t.component_of()
    component_mi = {}
    for r in t.roots:
        lo, hi = p.support[r]
        raw = _product([messages[(c, r)] for c in neighbours[r]], lo, hi)
        component_mi[r] = pw_total(restrict(raw, sets[r]))
    scale = {}
    for v in range(p.n):
        s = Q(1)
        for r, value in component_mi.items():
            if r != comp[v]:
                s *= value
        scale[v] = s
    return BeliefTable(p, t, messages, beliefs, parse_rational(data["mi_value"]), sets,
                       excluding, scale, component_mi)
