"""Reduction of weighted model integration (reals, Booleans, monomial weights) to plain MI."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NonTreeError, UnsupportedWeight
from .formula import Atom, Clause, LinearExpr, atom_lt
from .parser import BoolLit, Document, format_clause, format_literal, parse_document
from .problem import Problem, propagate_box
from .rational import Q, fmt


@dataclass(frozen=True)
class WeightSpec:
    literal: object  # Atom or BoolLit
    coefficient: Q
    monomial: dict = field(default_factory=dict)  # real var id -> exponent

    @property
    def is_one(self) -> bool:
        return self.coefficient == 1 and not any(self.monomial.values())

    def describe(self, names) -> str:
        factors = [fmt(self.coefficient)] + [
            names[v] if e == 1 else f"{names[v]}^{e}" for v, e in sorted(self.monomial.items())
        ]
        return f"{format_literal(self.literal, names)} -> {'*'.join(factors)}"


@dataclass(frozen=True)
class WMIProblem:
    real_vars: tuple
    bool_vars: tuple
    clauses: tuple  # tuples of Atom | BoolLit
    weights: tuple = ()

    @classmethod
    def from_document(cls, doc: Document) -> "WMIProblem":
        weights = tuple(WeightSpec(lit, coef, dict(mono)) for lit, coef, mono, _ in doc.weights)
        return cls(tuple(doc.real_vars), tuple(doc.bool_vars), tuple(tuple(c) for c in doc.clauses),
                   weights)

    def weight(self, env, bools) -> Q:
        """w(x, b): product of the weights of satisfied literals."""
        total = Q(1)
        for ws in self.weights:
            lit = ws.literal
            sat = (bools[lit.name] == lit.positive) if isinstance(lit, BoolLit) else lit.holds(env)
            if sat:
                total *= ws.coefficient
                for v, e in ws.monomial.items():
                    total *= env[v] ** e
        return total


def parse_wmi(text: str) -> WMIProblem:
    return WMIProblem.from_document(parse_document(text))


def _fresh(name: str, taken: set) -> str:
    out, k = name, 1
    while out in taken:
        k += 1
        out = f"{name}_{k}"
    taken.add(out)
    return out


def _var_atom(v: int, lower=None, upper=None) -> Atom:
    x = LinearExpr.var(v)
    if lower is not None:
        return atom_lt(lower if isinstance(lower, LinearExpr) else LinearExpr.const(lower), x)
    return atom_lt(x, upper if isinstance(upper, LinearExpr) else LinearExpr.const(upper))


def eliminate_booleans(w: WMIProblem, origin: dict | None = None) -> WMIProblem:
    """Replace each Boolean B by a real Z_B on (-c_neg, c_pos); literal weights become lengths."""
    if not w.bool_vars:
        return w
    names = list(w.real_vars)
    taken = set(names) | set(w.bool_vars)
    pos = {b: Q(1) for b in w.bool_vars}
    neg = {b: Q(1) for b in w.bool_vars}
    real_weights = []
    for ws in w.weights:
        if isinstance(ws.literal, BoolLit):
            if any(ws.monomial.values()):
                raise UnsupportedWeight("non-constant weight on Boolean literal: "
                                        + ws.describe(names))
            table = pos if ws.literal.positive else neg
            table[ws.literal.name] *= ws.coefficient
        else:
            real_weights.append(ws)
    zid = {}
    for b in w.bool_vars:
        zid[b] = len(names)
        z = _fresh(f"z_{b}", taken)
        names.append(z)
        if origin is not None:
            origin[z] = f"Boolean {b}: true on (0, {fmt(pos[b])}), false on (-{fmt(neg[b])}, 0)"

    def lit_map(lit):
        if isinstance(lit, BoolLit):
            v = zid[lit.name]
            return _var_atom(v, lower=0) if lit.positive else _var_atom(v, upper=0)
        return lit

    clauses = [tuple(lit_map(l) for l in c) for c in w.clauses]
    for b in w.bool_vars:
        v = zid[b]
        clauses.append((_var_atom(v, lower=-neg[b]),))
        clauses.append((_var_atom(v, upper=pos[b]),))
    return WMIProblem(tuple(names), (), tuple(clauses), tuple(real_weights))


def reduce_weights(w: WMIProblem, origin: dict | None = None) -> Problem:
    """Encode monomial literal weights with auxiliary variables, giving a pure MI problem."""
    if w.bool_vars:
        raise ValueError("eliminate Boolean variables first")
    names = list(w.real_vars)
    taken = set(names)
    clauses = [Clause(tuple(c)) for c in w.clauses]
    units = {c.literals[0] for c in clauses if len(c.literals) == 1}
    base = Problem(tuple(names), tuple(clauses))
    box = propagate_box(base)
    extra: list = []
    for k, ws in enumerate(w.weights):
        if ws.is_one:
            continue
        lit = ws.literal
        factors = [v for v, e in sorted(ws.monomial.items()) for _ in range(e)]
        if box is not None:
            for v in set(factors):
                if box[0][v] is None or box[0][v] < 0:
                    raise UnsupportedWeight("weight factor may be negative or unbounded: "
                                            + ws.describe(names))
        unit = lit in units
        if not unit:
            lit_vars = lit.vars
            if len(lit_vars) > 1 or any(v not in lit_vars for v in factors):
                raise UnsupportedWeight("reduction would create a 3-clique: " + ws.describe(names))
        items = [(v, None) for v in factors]
        if ws.coefficient != 1:
            items.append((None, ws.coefficient))
        for v, c in items:
            label = names[v] if v is not None else "c"
            zname = _fresh(f"zw{k}_{label}", taken)
            z = len(names)
            names.append(zname)
            upper = LinearExpr.var(v) if v is not None else LinearExpr.const(c)
            lo_atom = _var_atom(z, lower=0)
            hi_atom = _var_atom(z, upper=upper)
            if origin is not None:
                what = names[v] if v is not None else fmt(c)
                origin[zname] = (f"weight factor {what} of {format_literal(lit, names)}"
                                 + ("" if unit else " (guarded)"))
            if unit:
                extra += [Clause((lo_atom,)), Clause((hi_atom,))]
            else:
                notl = lit.negate()
                extra += [Clause((notl, lo_atom)), Clause((notl, hi_atom)),
                          Clause((lit, lo_atom)), Clause((lit, _var_atom(z, upper=1)))]
                # implied by the guarded pair; lets interval propagation bound z
                cap = c if v is None else (box[1][v] if box is not None else None)
                if cap is not None:
                    extra += [Clause((lo_atom,)), Clause((_var_atom(z, upper=max(cap, Q(1))),))]
    return Problem(tuple(names), tuple(clauses + extra))


def reduce_wmi(w: WMIProblem, origin: dict | None = None) -> Problem:
    p = reduce_weights(eliminate_booleans(w, origin), origin)
    for clause in p.clauses:
        if len(clause.vars) > 2:
            raise NonTreeError("reduction would create a 3-clique: "
                               + format_clause(clause, p.variables))
    return p


def wmi(w: WMIProblem):
    from .engine import mi, run

    return mi(run(reduce_wmi(w)))
