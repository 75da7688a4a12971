"""Structure-blind MI by nested symbolic elimination over multivariate polynomials.

Variables are integrated out in reverse declaration order.  Each integration
splits the remaining formula into disjoint cases according to which lower and
which upper bound of the variable is active, so the result is a sum of guarded
multivariate polynomials.  Nothing here looks at the primal graph.
"""
from __future__ import annotations


from ..errors import UnboundedError
from ..formula import Atom, LinearExpr
from ..problem import Problem, establish_support
from ..rational import Q, ZERO

MAX_VARS = 8


# -- multivariate polynomials: {exponent tuple: coefficient} -----------------


def _mono_add(a: dict, b: dict, sign=1) -> dict:
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, ZERO) + sign * c
        if v == 0:
            out.pop(e, None)
        else:
            out[e] = v
    return out


def _mono_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, ZERO) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def _linear_poly(expr: LinearExpr, n: int) -> dict:
    out = {}
    if expr.constant != 0:
        out[(0,) * n] = expr.constant
    for v, c in expr.terms:
        e = [0] * n
        e[v] = 1
        out[tuple(e)] = c
    return out


def _integrate(poly: dict, v: int, lower: LinearExpr, upper: LinearExpr, n: int) -> dict:
    """Integral of ``poly`` over x_v from ``lower`` to ``upper`` (affine in other variables)."""
    anti: dict = {}
    for e, c in poly.items():
        k = e[v] + 1
        anti[e[:v] + (k,) + e[v + 1:]] = c / k
    out: dict = {}
    for bound, sign in ((upper, 1), (lower, -1)):
        lin = _linear_poly(bound, n)
        powers = [{(0,) * n: Q(1)}]
        for e, c in anti.items():
            k = e[v]
            while len(powers) <= k:
                powers.append(_mono_mul(powers[-1], lin))
            rest = e[:v] + (0,) + e[v + 1:]
            term = _mono_mul({rest: c}, powers[k])
            out = _mono_add(out, term, sign)
    return out


def _evaluate(poly: dict, env) -> Q:
    total = ZERO
    for e, c in poly.items():
        t = c
        for v, k in enumerate(e):
            if k:
                t *= env[v] ** k
        total += t
    return total


# -- guarded terms ------------------------------------------------------------


class _Term:
    __slots__ = ("clauses", "atoms", "box", "poly")

    def __init__(self, clauses, atoms, box, poly):
        self.clauses = clauses  # frozenset of Clause (pending disjunctions)
        self.atoms = atoms  # frozenset of multivariate Atom (conjunction)
        self.box = box  # tuple of (lo, hi) per variable
        self.poly = poly

    def key(self):
        return (self.clauses, self.atoms, self.box)


def _add_atom(atom: Atom, atoms: set, box: list) -> bool:
    """Conjoin ``atom``; returns False once the guard is certainly empty."""
    vs = atom.vars
    if not vs:
        return atom.holds({})
    if len(vs) == 1:
        (v,) = vs
        a = atom.expr.coef(v)
        r = -atom.expr.constant / a
        lo, hi = box[v]
        if a > 0:
            hi = r if r < hi else hi
        else:
            lo = r if r > lo else lo
        box[v] = (lo, hi)
        return lo < hi
    atoms.add(atom)
    return True


def _disjoint_dnf(clauses) -> list:
    """Mutually exclusive conjunctions (lists of atoms) whose union is the CNF."""
    cases = [[]]
    for clause in clauses:
        options = []
        for k, lit in enumerate(clause.literals):
            options.append([l.negate() for l in clause.literals[:k]] + [lit])
        cases = [c + o for c in cases for o in options]
    return cases


def _eliminate(term: _Term, v: int, n: int) -> list:
    bucket = [c for c in term.clauses if v in c.vars]
    rest_clauses = term.clauses.difference(bucket)
    out = []
    for case in _disjoint_dnf(bucket):
        atoms = {a for a in term.atoms if v not in a.vars}
        box = list(term.box)
        lowers = {LinearExpr.const(box[v][0])}
        uppers = {LinearExpr.const(box[v][1])}
        box[v] = (None, None)
        feasible = True
        for atom in case + [a for a in term.atoms if v in a.vars]:
            a = atom.expr.coef(v)
            if a == 0:
                if not _add_atom(atom, atoms, box):
                    feasible = False
                    break
                continue
            # a*x_v + r (<) 0  ->  x_v < -r/a  (a > 0)  or  x_v > -r/a  (a < 0)
            bound = LinearExpr(tuple((u, -c / a) for u, c in atom.expr.terms if u != v),
                               -atom.expr.constant / a)
            (uppers if a > 0 else lowers).add(bound)
        if not feasible:
            continue
        lowers, uppers = _prune(lowers, True), _prune(uppers, False)
        for lo in lowers:
            for hi in uppers:
                guard_atoms = set(atoms)
                guard_box = list(box)
                ok = _add_atom(Atom(lo - hi, True), guard_atoms, guard_box)
                for other in lowers:
                    if other is not lo and ok:
                        ok = _add_atom(Atom(other - lo, True), guard_atoms, guard_box)
                for other in uppers:
                    if other is not hi and ok:
                        ok = _add_atom(Atom(hi - other, True), guard_atoms, guard_box)
                if not ok:
                    continue
                poly = _integrate(term.poly, v, lo, hi, n)
                if poly:
                    out.append(_Term(rest_clauses, frozenset(guard_atoms), tuple(guard_box), poly))
    return out


def _prune(bounds, lower: bool) -> list:
    """Keep only the tightest constant bound."""
    consts = [b for b in bounds if not b.terms]
    others = [b for b in bounds if b.terms]
    if consts:
        best = max(consts, key=lambda b: b.constant) if lower else min(consts, key=lambda b: b.constant)
        others.append(best)
    return others


def oracle_nested_mi(p: Problem, weight: dict | None = None) -> Q:
    """Exact MI (or the integral of a polynomial ``weight``) by brute-force elimination.

    ``weight`` maps exponent tuples to rational coefficients.  Refuses more
    than ``MAX_VARS`` variables.
    """
    n = p.n
    if n > MAX_VARS:
        raise ValueError(f"nested oracle refuses {n} > {MAX_VARS} variables")
    if p.support is None:
        p = establish_support(p)
    if p.infeasible:
        return ZERO
    box = tuple(p.support)
    if any(lo is None or hi is None for lo, hi in box):
        raise UnboundedError("?")
    poly = weight if weight is not None else {(0,) * n: Q(1)}
    clauses, atoms, work = [], set(), list(box)
    for c in p.clauses:
        if len(c.literals) == 1:
            if not _add_atom(c.literals[0], atoms, work):
                return ZERO
        else:
            clauses.append(c)
    terms = [_Term(frozenset(clauses), frozenset(atoms), tuple(work), poly)]
    for v in reversed(range(n)):
        merged: dict = {}
        for term in terms:
            for t in _eliminate(term, v, n):
                k = t.key()
                if k in merged:
                    merged[k].poly = _mono_add(merged[k].poly, t.poly)
                else:
                    merged[k] = t
        terms = [t for t in merged.values() if t.poly]
    total = ZERO
    for t in terms:
        total += _evaluate(t.poly, [0] * n)
    return total


def monomial_weight(n: int, coefficient=1, exponents: dict | None = None) -> dict:
    e = [0] * n
    for v, k in (exponents or {}).items():
        e[v] += k
    return {tuple(e): Q(coefficient)}


def weight_product(a: dict, b: dict) -> dict:
    return _mono_mul(a, b)
