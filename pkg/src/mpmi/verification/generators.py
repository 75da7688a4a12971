"""Benchmark families (PATH, STAR, SNOW) and the subset-sum hardness constructions."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from itertools import combinations

from ..formula import And, Atom, Clause, LinearExpr, Or, atom_lt
from ..problem import Problem, establish_support, primal_graph
from ..rational import Q, fmt

COEFFS = (-2, -1, 1, 2)
MAX_ATTEMPTS = 200


@dataclass(frozen=True)
class SubsetInstance:
    S: tuple
    L: int

    def __post_init__(self):
        if not self.S or any(s < 1 for s in self.S):
            raise ValueError("S must be a non-empty sequence of positive integers")
        if self.L < 1:
            raise ValueError("L must be a positive integer")

    @property
    def n(self) -> int:
        return len(self.S)


def subset_count(inst: SubsetInstance) -> int:
    """Number of subsets of S (by position) summing to L, by enumeration."""
    if inst.n > 20:
        raise ValueError("subset_count enumerates at most 20 elements")
    total = 0
    for k in range(inst.n + 1):
        for combo in combinations(inst.S, k):
            if sum(combo) == inst.L:
                total += 1
    return total


# -- random tree families ------------------------------------------------------


def path_edges(n: int) -> list:
    return [(k, k + 1) for k in range(n - 1)]


def star_edges(n: int) -> list:
    return [(0, k) for k in range(1, n)]


def snow_edges(n: int) -> list:
    # complete ternary tree filled in breadth-first order
    return [((k - 1) // 3, k) for k in range(1, n)]


def _random_atom(rng: random.Random, i: int, j: int) -> Atom:
    c, d = rng.choice(COEFFS), rng.choice(COEFFS)
    e = rng.randint(-3, 3)
    return atom_lt(LinearExpr.build({i: c, j: d}), LinearExpr.const(e))


def _random_problem(n: int, edges, rng: random.Random):
    """Random instance plus a planted interior point that satisfies every clause."""
    names = tuple(f"x{k + 1}" for k in range(n))
    clauses = []
    witness = {}
    for v in range(n):
        a = rng.randint(-2, 1)
        b = a + rng.randint(1, 3)
        witness[v] = a + Q(rng.randint(1, 4 * (b - a) - 1), 4)
        x = LinearExpr.var(v)
        clauses.append(Clause((atom_lt(LinearExpr.const(a), x),)))
        clauses.append(Clause((atom_lt(x, LinearExpr.const(b)),)))
    for i, j in edges:
        for _ in range(rng.randint(1, 2)):
            width = rng.randint(1, 2)
            for _ in range(MAX_ATTEMPTS):
                clause = Clause(tuple(_random_atom(rng, i, j) for _ in range(width)))
                if clause.holds(witness):
                    break
            clauses.append(clause)
    return Problem(names, tuple(clauses)), witness


def _generate(n: int, seed: int, edges) -> Problem:
    if n < 2:
        raise ValueError("generators need n >= 2")
    rng = random.Random(seed)
    for _ in range(MAX_ATTEMPTS):
        p, witness = _random_problem(n, edges, rng)
        # all atoms are strict, so a satisfying point has a satisfying neighbourhood: MI > 0
        if p.holds(witness):
            return p
    raise RuntimeError(f"no feasible instance after {MAX_ATTEMPTS} attempts")


def gen_path(n: int, seed: int) -> Problem:
    return _generate(n, seed, path_edges(n))


def gen_star(n: int, seed: int) -> Problem:
    return _generate(n, seed, star_edges(n))


def gen_snow(n: int, seed: int) -> Problem:
    return _generate(n, seed, snow_edges(n))


GENERATORS = {"path": gen_path, "star": gen_star, "snow": gen_snow}


# -- hardness constructions ----------------------------------------------------


def _near(v_expr: LinearExpr, center: LinearExpr, radius) -> tuple:
    """Atoms for center - radius < v < center + radius."""
    r = LinearExpr.const(radius)
    return atom_lt(center - r, v_expr), atom_lt(v_expr, center + r)


def _either(a: tuple, b: tuple) -> list:
    """CNF of (a1 and a2) or (b1 and b2)."""
    return [Clause((x, y)) for x in a for y in b]


def gen_subset_chain(inst: SubsetInstance):
    """Chain formula whose models encode subset sums; returns (problem, query on x_n)."""
    n = inst.n
    r = Q(1, 2 * n)
    names = tuple(f"x{k + 1}" for k in range(n))
    clauses = []
    for k, s in enumerate(inst.S):
        x = LinearExpr.var(k)
        prev = LinearExpr.var(k - 1) if k else LinearExpr()
        take = _near(x, prev + LinearExpr.const(s), r)
        skip = _near(x, prev, r)
        clauses += _either(take, skip)
    xn = LinearExpr.var(n - 1)
    query = And(_near(xn, LinearExpr.const(inst.L), Q(1, 2)))
    return Problem(names, tuple(clauses)), query


def chain_mi(inst: SubsetInstance) -> Q:
    return Q(2) ** inst.n * Q(1, inst.n) ** inst.n


def gen_subset_tree(inst: SubsetInstance):
    """Balanced construction with three-variable clauses; returns (problem, query on the root)."""
    n = inst.n
    if n & (n - 1):
        raise ValueError("gen_subset_tree needs n to be a power of two")
    r = Q(1, 4 * n)
    levels = n.bit_length()  # k + 1 levels for n = 2**k
    names, index = [], {}
    for j in range(1, levels + 1):
        for i in range(1, 2 ** (j - 1) + 1):
            index[(j, i)] = len(names)
            names.append(f"x{j}_{i}")
    clauses = []
    for j in range(1, levels):
        for i in range(1, 2 ** (j - 1) + 1):
            x = LinearExpr.var(index[(j, i)])
            kids = LinearExpr.var(index[(j + 1, 2 * i - 1)]) + LinearExpr.var(index[(j + 1, 2 * i)])
            lo, hi = _near(x, kids, r)
            clauses += [Clause((lo,)), Clause((hi,))]
    for i, s in enumerate(inst.S, start=1):
        x = LinearExpr.var(index[(levels, i)])
        clauses += _either(_near(x, LinearExpr.const(s), r), _near(x, LinearExpr(), r))
    root = LinearExpr.var(0)
    query = And(_near(root, LinearExpr.const(inst.L), Q(1, 2)))
    return Problem(tuple(names), tuple(clauses)), query


def tree_mi(inst: SubsetInstance) -> Q:
    return Q(2) ** inst.n * Q(1, 2 * inst.n) ** (2 * inst.n - 1)


def write_sidecar(path, truth: dict) -> None:
    """Ground-truth JSON next to a generated problem file."""
    def enc(v):
        return fmt(v) if isinstance(v, type(Q(0))) else v

    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: enc(v) for k, v in truth.items()}, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- random queries ------------------------------------------------------------


def _grid_point(rng: random.Random, lo, hi, steps: int = 16) -> Q:
    return lo + (hi - lo) * Q(rng.randint(0, steps), steps)


def random_univariate_query(p: Problem, rng: random.Random):
    """(node, formula) with a random interval, or union of two intervals, on one variable."""
    support = p.support if p.support is not None else establish_support(p).support
    v = rng.randrange(p.n)
    lo, hi = support[v]
    x = LinearExpr.var(v)

    def interval():
        a, b = sorted((_grid_point(rng, lo, hi), _grid_point(rng, lo, hi)))
        return And((atom_lt(LinearExpr.const(a), x), atom_lt(x, LinearExpr.const(b))))

    if rng.random() < 0.25:
        return v, Or((interval(), interval()))
    return v, interval()


def random_bivariate_query(p: Problem, rng: random.Random):
    """(i, j, formula) with a random half-plane or pair of half-planes over a primal edge."""
    support = p.support if p.support is not None else establish_support(p).support
    edges = sorted(primal_graph(p).edges)
    i, j = edges[rng.randrange(len(edges))]
    if rng.random() < 0.5:
        i, j = j, i

    def halfplane():
        c, d = rng.choice(COEFFS), rng.choice(COEFFS)
        lo = c * (support[i][0] if c > 0 else support[i][1]) + d * (support[j][0] if d > 0 else support[j][1])
        hi = c * (support[i][1] if c > 0 else support[i][0]) + d * (support[j][1] if d > 0 else support[j][0])
        return atom_lt(LinearExpr.build({i: c, j: d}), LinearExpr.const(_grid_point(rng, lo, hi)))

    shape = rng.random()
    if shape < 0.5:
        return i, j, halfplane()
    if shape < 0.75:
        return i, j, And((halfplane(), halfplane()))
    return i, j, Or((halfplane(), halfplane()))
