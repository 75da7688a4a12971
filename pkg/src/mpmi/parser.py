"""Reader for the problem/query file format.

Grammar (one form per top-level s-expression, ``;`` comments)::

    form   := (declare-real NAME) | (declare-bool NAME)
            | (assert clause) | (weight lit RATIONAL monom*)
    clause := lit | (or lit+)
    lit    := atom | (not atom) | BOOLNAME | (not BOOLNAME)
    atom   := (< expr expr) | (<= expr expr)      ; > and >= are accepted too
    expr   := RATIONAL | NAME | (+ expr+) | (- expr expr) | (- expr) | (* RATIONAL NAME)
    monom  := NAME | (^ NAME INT)

Query lines additionally accept ``(and f*)``, nested ``(or f*)``/``(not f)``,
``true`` and ``false``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError
from .formula import FALSE, TRUE, And, Atom, Clause, LinearExpr, Not, Or
from .rational import is_rational_text, parse_rational

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.'!\-]*$")
_KEYWORDS = {"declare-real", "declare-bool", "assert", "weight", "or", "and", "not",
             "true", "false", "<", "<=", ">", ">=", "=", "+", "-", "*", "^"}


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


class SExpr(list):
    """A parenthesised list remembering where it opened."""

    def __init__(self, items, token):
        super().__init__(items)
        self.token = token


@dataclass(frozen=True)
class BoolLit:
    name: str
    positive: bool = True

    def negate(self) -> "BoolLit":
        return BoolLit(self.name, not self.positive)


@dataclass
class Document:
    """Raw parse result, before the MI/WMI split."""

    real_vars: list = field(default_factory=list)
    bool_vars: list = field(default_factory=list)
    clauses: list = field(default_factory=list)  # tuples of Atom | BoolLit
    clause_tokens: list = field(default_factory=list)
    weights: list = field(default_factory=list)  # (literal, coefficient, {var: exp}, token)

    @property
    def is_plain(self) -> bool:
        return not self.bool_vars and not self.weights


def tokenize(text: str) -> list:
    tokens = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        chunk = m.group(0)
        if not (chunk.isspace() or chunk.startswith(";")):
            tokens.append(Token(chunk, line, m.start() - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + chunk.rindex("\n") + 1
    return tokens


def read_sexprs(text: str) -> list:
    stack: list = [[]]
    opens: list = []
    for tok in tokenize(text):
        if tok.text == "(":
            opens.append(tok)
            stack.append([])
        elif tok.text == ")":
            if not opens:
                raise ParseError("unbalanced ')'", tok.line, tok.column)
            items = stack.pop()
            stack[-1].append(SExpr(items, opens.pop()))
        else:
            stack[-1].append(tok)
    if opens:
        tok = opens[-1]
        raise ParseError("unclosed '('", tok.line, tok.column)
    return stack[0]


def _where(node) -> Token:
    return node.token if isinstance(node, SExpr) else node


def _fail(message, node):
    tok = _where(node)
    raise ParseError(message, tok.line, tok.column)


def _head(node):
    if isinstance(node, SExpr) and node and isinstance(node[0], Token):
        return node[0].text
    return None


class _Reader:
    def __init__(self, real_vars, bool_vars=()):
        self.real_index = {name: i for i, name in enumerate(real_vars)}
        self.bools = set(bool_vars)

    def rational(self, node):
        if isinstance(node, Token) and is_rational_text(node.text):
            return parse_rational(node.text)
        _fail("expected a rational constant", node)

    def expr(self, node) -> LinearExpr:
        if isinstance(node, Token):
            if is_rational_text(node.text):
                return LinearExpr.const(parse_rational(node.text))
            if node.text in self.real_index:
                return LinearExpr.var(self.real_index[node.text])
            if node.text in self.bools:
                _fail(f"Boolean variable {node.text} used in arithmetic", node)
            _fail(f"unknown variable {node.text}", node)
        op = _head(node)
        args = node[1:]
        if op == "+" and args:
            out = LinearExpr()
            for a in args:
                out = out + self.expr(a)
            return out
        if op == "-" and len(args) == 2:
            return self.expr(args[0]) - self.expr(args[1])
        if op == "-" and len(args) == 1:
            return -self.expr(args[0])
        if op == "*" and len(args) == 2:
            a, b = args
            if isinstance(a, Token) and is_rational_text(a.text):
                return self.expr(b).scale(parse_rational(a.text))
            if isinstance(b, Token) and is_rational_text(b.text):
                return self.expr(a).scale(parse_rational(b.text))
            _fail("non-linear product: one factor of '*' must be a rational", node)
        _fail("malformed expression", node)

    def atom(self, node) -> Atom:
        op = _head(node)
        if op == "=":
            _fail("measure-zero atom rejected: equality atoms have no volume", node)
        if op in ("<", "<=", ">", ">=") and len(node) == 3:
            lhs, rhs = self.expr(node[1]), self.expr(node[2])
            if op in (">", ">="):
                lhs, rhs = rhs, lhs
            return Atom(lhs - rhs, op in ("<", ">"))
        _fail("expected an atom (< a b) or (<= a b)", node)

    def literal(self, node):
        if isinstance(node, Token):
            if node.text in self.bools:
                return BoolLit(node.text)
            if node.text in self.real_index:
                _fail(f"real variable {node.text} used as a literal", node)
            _fail(f"unknown Boolean variable {node.text}", node)
        if _head(node) == "not":
            if len(node) != 2:
                _fail("'not' takes one argument", node)
            return self.literal(node[1]).negate()
        return self.atom(node)

    def clause(self, node) -> tuple:
        if _head(node) == "or":
            if len(node) < 2:
                _fail("empty disjunction", node)
            return tuple(self.literal(n) for n in node[1:])
        return (self.literal(node),)

    def formula(self, node):
        if isinstance(node, Token):
            if node.text == "true":
                return TRUE
            if node.text == "false":
                return FALSE
            return self.literal(node)
        op = _head(node)
        if op in ("and", "or"):
            args = tuple(self.formula(n) for n in node[1:])
            return And(args) if op == "and" else Or(args)
        if op == "not":
            if len(node) != 2:
                _fail("'not' takes one argument", node)
            return Not(self.formula(node[1]))
        return self.atom(node)


def _declared_name(form, kind):
    if len(form) != 2 or not isinstance(form[1], Token):
        _fail(f"malformed {kind}", form)
    name = form[1].text
    if not _NAME.match(name) or name in _KEYWORDS:
        _fail(f"invalid variable name {name!r}", form[1])
    return name


def parse_document(text: str) -> Document:
    forms = read_sexprs(text)
    doc = Document()
    seen = set()
    for form in forms:
        if not isinstance(form, SExpr) or not form:
            _fail("expected a top-level form", form)
        head = _head(form)
        if head in ("declare-real", "declare-bool"):
            name = _declared_name(form, head)
            if name in seen:
                _fail(f"variable {name} declared twice", form)
            seen.add(name)
            (doc.real_vars if head == "declare-real" else doc.bool_vars).append(name)
        elif head not in ("assert", "weight"):
            _fail(f"unknown form {head!r}", form)
    reader = _Reader(doc.real_vars, doc.bool_vars)
    for form in forms:
        head = _head(form)
        if head == "assert":
            if len(form) != 2:
                _fail("assert takes exactly one clause", form)
            doc.clauses.append(reader.clause(form[1]))
            doc.clause_tokens.append(form.token)
        elif head == "weight":
            if len(form) < 3:
                _fail("weight needs a literal and a coefficient", form)
            lit = reader.literal(form[1])
            coef = reader.rational(form[2])
            if coef <= 0:
                _fail("weight coefficients must be positive", form[2])
            monomial: dict = {}
            for m in form[3:]:
                if isinstance(m, Token):
                    name, exp = m.text, 1
                elif _head(m) == "^" and len(m) == 3 and isinstance(m[1], Token):
                    name = m[1].text
                    if not (isinstance(m[2], Token) and m[2].text.isdigit()):
                        _fail("exponent must be a non-negative integer", m)
                    exp = int(m[2].text)
                else:
                    _fail("malformed monomial factor", m)
                if name not in reader.real_index:
                    _fail(f"unknown variable {name}", m)
                var = reader.real_index[name]
                monomial[var] = monomial.get(var, 0) + exp
            doc.weights.append((lit, coef, {v: e for v, e in monomial.items() if e}, form.token))
    return doc


def parse_formula(text: str, variables) -> object:
    """Parse one query formula over the given real variable names."""
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise ParseError(f"expected exactly one formula, got {len(forms)}")
    return _Reader(list(variables)).formula(forms[0])


def parse_problem(text: str):
    """Parse an MI problem file into a normalized :class:`~mpmi.problem.Problem`."""
    from .problem import Problem

    doc = parse_document(text)
    if doc.bool_vars or doc.weights:
        tok = doc.clause_tokens[0] if doc.clause_tokens else None
        raise ParseError("Boolean variables or weights present: reduce the WMI problem first",
                         getattr(tok, "line", None), getattr(tok, "column", None))
    clauses = []
    for lits, tok in zip(doc.clauses, doc.clause_tokens):
        clause = Clause(lits)
        nvars = len(clause.vars)
        if nvars > 2:
            raise ParseError("non-tree clause: primal graph would contain a clique", tok.line, tok.column)
        if nvars == 0:
            raise ParseError("clause mentions no variable", tok.line, tok.column)
        clauses.append(clause)
    return Problem(tuple(doc.real_vars), tuple(clauses))


# -- printing ---------------------------------------------------------------


def _fmt_q(q) -> str:
    return str(q)


def format_expr(expr: LinearExpr, names) -> str:
    parts = []
    for v, c in expr.terms:
        parts.append(names[v] if c == 1 else f"(* {_fmt_q(c)} {names[v]})")
    if expr.constant != 0 or not parts:
        parts.append(_fmt_q(expr.constant))
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def format_atom(atom: Atom, names) -> str:
    # e < 0 printed as (< positive-part negative-part) so that -x < 0 reads (< 0 x)
    pos = LinearExpr(tuple((v, c) for v, c in atom.expr.terms if c > 0))
    neg = LinearExpr(tuple((v, -c) for v, c in atom.expr.terms if c < 0))
    d = atom.expr.constant
    if pos.terms:
        lhs, rhs = pos, neg + LinearExpr.const(-d)
    else:
        lhs, rhs = LinearExpr.const(d), neg
    op = "<" if atom.strict else "<="
    return f"({op} {format_expr(lhs, names)} {format_expr(rhs, names)})"


def format_literal(lit, names) -> str:
    if isinstance(lit, BoolLit):
        return lit.name if lit.positive else f"(not {lit.name})"
    return format_atom(lit, names)


def format_clause(clause, names) -> str:
    lits = clause.literals if isinstance(clause, Clause) else clause
    if len(lits) == 1:
        return format_literal(lits[0], names)
    return "(or " + " ".join(format_literal(l, names) for l in lits) + ")"


def format_problem(problem, header: str = "") -> str:
    names = problem.variables
    lines = [f"; {h}" for h in header.splitlines()] if header else []
    lines += [f"(declare-real {n})" for n in names]
    lines += [f"(assert {format_clause(c, names)})" for c in problem.clauses]
    return "\n".join(lines) + "\n"


def format_formula(f, names) -> str:
    from .formula import Const

    if isinstance(f, Atom):
        return format_atom(f, names)
    if isinstance(f, Clause):
        return format_clause(f, names)
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return f"(not {format_formula(f.arg, names)})"
    op = "and" if isinstance(f, And) else "or"
    return f"({op} " + " ".join(format_formula(a, names) for a in f.args) + ")"
