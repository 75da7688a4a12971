"""Linear expressions, LRA atoms, clauses and small query formulas.

Variables are referred to by integer id (their declaration index in a
:class:`~mpmi.problem.Problem`).  Atoms are kept in the canonical shape
``expr < 0`` or ``expr <= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

from .rational import Q, ZERO, to_rational


@dataclass(frozen=True)
class LinearExpr:
    terms: tuple = ()  # sorted ((var, coef), ...) with coef != 0
    constant: Q = ZERO

    @classmethod
    def build(cls, coeffs: Mapping[int, object] | Iterable = (), constant=0) -> "LinearExpr":
        acc: dict[int, Q] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for var, c in items:
            acc[var] = acc.get(var, ZERO) + to_rational(c)
        terms = tuple(sorted((v, c) for v, c in acc.items() if c != 0))
        return cls(terms, to_rational(constant))

    @classmethod
    def var(cls, v: int, coef=1) -> "LinearExpr":
        return cls.build({v: coef})

    @classmethod
    def const(cls, c) -> "LinearExpr":
        return cls((), to_rational(c))

    @property
    def coefficients(self) -> dict:
        return dict(self.terms)

    @property
    def vars(self) -> frozenset:
        return frozenset(v for v, _ in self.terms)

    def coef(self, v: int) -> Q:
        for var, c in self.terms:
            if var == v:
                return c
        return ZERO

    def __add__(self, other: "LinearExpr") -> "LinearExpr":
        return LinearExpr.build(list(self.terms) + list(other.terms), self.constant + other.constant)

    def __neg__(self) -> "LinearExpr":
        return LinearExpr(tuple((v, -c) for v, c in self.terms), -self.constant)

    def __sub__(self, other: "LinearExpr") -> "LinearExpr":
        return self + (-other)

    def scale(self, k) -> "LinearExpr":
        k = to_rational(k)
        if k == 0:
            return LinearExpr()
        return LinearExpr(tuple((v, c * k) for v, c in self.terms), self.constant * k)

    def rename(self, mapping: Mapping[int, int]) -> "LinearExpr":
        return LinearExpr.build([(mapping[v], c) for v, c in self.terms], self.constant)

    def evaluate(self, env) -> Q:
        total = self.constant
        for v, c in self.terms:
            total += c * env[v]
        return total


@dataclass(frozen=True)
class Atom:
    expr: LinearExpr
    strict: bool = True  # True: expr < 0, False: expr <= 0

    @property
    def vars(self) -> frozenset:
        return self.expr.vars

    def negate(self) -> "Atom":
        # not (e < 0)  <=>  -e <= 0 ;  not (e <= 0)  <=>  -e < 0
        return Atom(-self.expr, not self.strict)

    def holds(self, env) -> bool:
        value = self.expr.evaluate(env)
        return value < 0 if self.strict else value <= 0

    def rename(self, mapping) -> "Atom":
        return Atom(self.expr.rename(mapping), self.strict)


@dataclass(frozen=True)
class Clause:
    literals: tuple  # of Atom; the empty clause is unsatisfiable

    @property
    def vars(self) -> frozenset:
        out = frozenset()
        for lit in self.literals:
            out |= lit.vars
        return out

    def holds(self, env) -> bool:
        return any(lit.holds(env) for lit in self.literals)

    def rename(self, mapping) -> "Clause":
        return Clause(tuple(lit.rename(mapping) for lit in self.literals))


def atom_lt(lhs: LinearExpr, rhs: LinearExpr) -> Atom:
    return Atom(lhs - rhs, True)


def atom_le(lhs: LinearExpr, rhs: LinearExpr) -> Atom:
    return Atom(lhs - rhs, False)


def between(v: int, lo, hi) -> tuple:
    """Unit clauses for ``lo < x_v < hi``."""
    x = LinearExpr.var(v)
    return (Clause((atom_lt(LinearExpr.const(lo), x),)), Clause((atom_lt(x, LinearExpr.const(hi)),)))


# -- query formulas ---------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


TRUE = Const(True)
FALSE = Const(False)


def formula_vars(f) -> frozenset:
    if isinstance(f, Atom):
        return f.vars
    if isinstance(f, Clause):
        return f.vars
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Not):
        return formula_vars(f.arg)
    out = frozenset()
    for a in f.args:
        out |= formula_vars(a)
    return out


def evaluate(f, env) -> bool:
    if isinstance(f, (Atom, Clause)):
        return f.holds(env)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not evaluate(f.arg, env)
    if isinstance(f, And):
        return all(evaluate(a, env) for a in f.args)
    return any(evaluate(a, env) for a in f.args)


def _nnf(f, negated=False):
    if isinstance(f, Atom):
        return f.negate() if negated else f
    if isinstance(f, Clause):
        return _nnf(Or(f.literals), negated)
    if isinstance(f, Const):
        return Const(f.value != negated)
    if isinstance(f, Not):
        return _nnf(f.arg, not negated)
    if isinstance(f, And):
        kind = Or if negated else And
    else:
        kind = And if negated else Or
    return kind(tuple(_nnf(a, negated) for a in f.args))


def _cnf(f) -> list:
    # each clause is a tuple of atoms
    if isinstance(f, Atom):
        return [(f,)]
    if isinstance(f, Const):
        return [] if f.value else [()]
    if isinstance(f, And):
        out = []
        for a in f.args:
            out.extend(_cnf(a))
        return out
    parts = [_cnf(a) for a in f.args]
    out = []
    for combo in product(*parts):
        lits = []
        for clause in combo:
            for lit in clause:
                if lit not in lits:
                    lits.append(lit)
        out.append(tuple(lits))
    return out


def to_cnf(f) -> tuple:
    """Convert a formula to a tuple of :class:`Clause` by distribution.

    ``TRUE`` becomes the empty conjunction, ``FALSE`` a single empty clause.
    """
    if isinstance(f, Sequence) and not isinstance(f, (str, bytes)):
        f = And(tuple(f))
    seen = []
    for lits in _cnf(_nnf(f)):
        clause = Clause(lits)
        if clause not in seen:
            seen.append(clause)
    return tuple(seen)
