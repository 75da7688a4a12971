import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpmi.errors import CycleError, ParseError, UnboundedError
from mpmi.formula import Atom, LinearExpr
from mpmi.parser import format_problem, parse_problem
from mpmi.problem import (
    Problem,
    assert_tree,
    choose_root,
    establish_support,
    graph_stats,
    primal_graph,
    problem_from_json,
    problem_to_json,
)
from mpmi.rational import Q
from mpmi.verification.generators import GENERATORS, SubsetInstance, gen_subset_chain, gen_subset_tree

from conftest import CHAIN3, DATA, DISJUNCTIVE, FOREST, SIMPLEX, UNIT_BOX


def test_parse_unit_box():
    p = parse_problem(UNIT_BOX)
    assert p.variables == ("x",)
    atoms = {c.literals[0] for c in p.node_formulas[0]}
    x = LinearExpr.var(0)
    assert atoms == {Atom(LinearExpr.const(0) - x, True), Atom(x - LinearExpr.const(1), True)}
    assert not p.edge_formulas


def test_parse_reduced_weighted_example_is_a_six_variable_tree():
    from mpmi.cli import reduce_text

    p = parse_problem(reduce_text((DATA / "wmi_example.wmi").read_text()))
    g = primal_graph(p)
    assert p.n == 6
    assert len(g.edges) == 5
    assert_tree(g)


@pytest.mark.parametrize("text,fragment", [
    ("(declare-real x)(declare-real y)(declare-real z)(assert (< (+ x y z) 1))", "non-tree clause"),
    ("(declare-real x) (assert (<= x 1)) (assert (= x 1))", "measure-zero"),
    ("(declare-real x) (assert (< x y))", "unknown variable y"),
    ("(declare-real x) (assert (< x 1)", "unclosed"),
    ("(declare-real x) (declare-real x)", "x"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert fragment in str(info.value)
    assert info.value.exit_code == 2


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_problem("(declare-real x)\n(assert (< x y))")
    assert "line 2" in str(info.value)


@pytest.mark.parametrize("text", [UNIT_BOX, SIMPLEX, CHAIN3, FOREST, DISJUNCTIVE])
def test_round_trip(text):
    p = parse_problem(text)
    again = parse_problem(format_problem(p))
    assert again.variables == p.variables
    assert again.clauses == p.clauses


def test_round_trip_generated():
    for shape, gen in GENERATORS.items():
        p = gen(9, 3)
        assert parse_problem(format_problem(p)).clauses == p.clauses


def test_json_round_trip():
    p = establish_support(parse_problem(DISJUNCTIVE))
    q = problem_from_json(problem_to_json(p))
    assert q.clauses == p.clauses and q.support == p.support


@pytest.mark.parametrize("text", [SIMPLEX, CHAIN3, FOREST, DISJUNCTIVE])
def test_decomposition_complete(text):
    p = parse_problem(text)
    parts = [c for cs in p.node_formulas.values() for c in cs]
    parts += [c for cs in p.edge_formulas.values() for c in cs]
    assert Counter(parts) == Counter(p.clauses)
    for (i, j), cs in p.edge_formulas.items():
        assert i < j
        assert all(c.vars == {i, j} for c in cs)


@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3), st.booleans(),
       st.lists(st.integers(-6, 6), min_size=2, max_size=2))
def test_negation_is_involution(coefs, strict, point):
    atom = Atom(LinearExpr.build({0: coefs[0], 1: coefs[1]}, coefs[2]), strict)
    env = {0: Q(point[0], 2), 1: Q(point[1], 2)}
    assert atom.negate().negate() == atom
    assert atom.holds(env) != atom.negate().holds(env)


def test_negation_boundary():
    x = LinearExpr.var(0)
    strict = Atom(x - LinearExpr.const(1), True)
    assert not strict.holds({0: Q(1)}) and strict.negate().holds({0: Q(1)})
    weak = Atom(x - LinearExpr.const(1), False)
    assert weak.holds({0: Q(1)}) and not weak.negate().holds({0: Q(1)})


def test_primal_graph_examples():
    assert not primal_graph(parse_problem(UNIT_BOX)).edges
    p, _ = gen_subset_chain(SubsetInstance((1, 2, 3, 4), 5))
    g = primal_graph(p)
    assert sorted(g.edges) == [(0, 1), (1, 2), (2, 3)]


def test_assert_tree():
    assert_tree(primal_graph(GENERATORS["path"](5, 0)))
    assert_tree(primal_graph(GENERATORS["star"](10, 0)))
    assert_tree(primal_graph(parse_problem(FOREST)))
    p, _ = gen_subset_tree(SubsetInstance((1, 2), 2))
    with pytest.raises(CycleError) as info:
        assert_tree(primal_graph(p))
    assert len(set(info.value.witness)) == 3
    assert info.value.exit_code == 3


def test_choose_root():
    t = choose_root(primal_graph(GENERATORS["path"](5, 0)))
    assert t.root == 2 and t.height == 2
    t = choose_root(primal_graph(GENERATORS["star"](7, 0)))
    assert t.root == 0 and t.height == 1
    t = choose_root(primal_graph(GENERATORS["snow"](13, 0)))
    assert t.root == 0 and t.height == 2


def test_pseudo_tree_orders():
    p = GENERATORS["snow"](17, 4)
    t = choose_root(primal_graph(p))
    pos = {v: k for k, v in enumerate(t.upward_order)}
    for child, parent in t.parent.items():
        assert pos[child] < pos[parent]
    assert list(t.upward_order) == list(reversed(t.downward_order))


def test_forest_gets_one_root_per_component():
    t = choose_root(primal_graph(parse_problem(FOREST)))
    assert len(t.roots) == 2


def test_support_examples():
    p = establish_support(parse_problem(
        "(declare-real x1) (declare-real z) (assert (< 0 x1)) (assert (< x1 2))"
        "(assert (< 0 z)) (assert (< z x1))"))
    assert p.support[1] == (0, 2)
    p = establish_support(parse_problem(
        "(declare-real x1) (declare-real x2) (assert (< 0 x1)) (assert (< x1 2))"
        "(assert (< (+ x1 x2) 2)) (assert (< 0 x2)) (assert (< x2 2))"))
    assert p.support[1] == (0, 2)
    with pytest.raises(UnboundedError) as info:
        establish_support(parse_problem("(declare-real x1) (declare-real x2) (assert (< x1 x2))"))
    assert info.value.exit_code == 4


def test_support_sound_on_random_points():
    rng = random.Random(5)
    for shape, gen in GENERATORS.items():
        p = establish_support(gen(8, 11))
        for _ in range(2000):
            env = {v: Q(rng.randint(-40, 40), 8) for v in range(p.n)}
            if p.holds(env):
                assert all(lo <= env[v] <= hi for v, (lo, hi) in enumerate(p.support))


def test_infeasible_support():
    p = establish_support(parse_problem("(declare-real x) (assert (< x 0)) (assert (< 1 x))"))
    assert p.infeasible


def test_graph_stats():
    p = establish_support(GENERATORS["path"](7, 0))
    s = graph_stats(p, choose_root(primal_graph(p)))
    assert (s.n, s.diameter, s.h_t, s.l) == (7, 6, 3, 2)
    assert s.h_t <= s.diameter <= 2 * s.h_t
    p = establish_support(GENERATORS["star"](9, 0))
    s = graph_stats(p, choose_root(primal_graph(p)))
    assert (s.diameter, s.h_t, s.l) == (2, 1, 8)
    assert s.cost_estimate == s.l * (s.n ** 3 * s.m ** s.h_p) ** s.h_t
    p = establish_support(parse_problem(UNIT_BOX))
    s = graph_stats(p, choose_root(primal_graph(p)))
    assert (s.diameter, s.l, s.m) == (0, 1, 2)
    assert s.to_json()["cost_estimate"] == str(s.cost_estimate)


def test_problem_is_immutable():
    p = parse_problem(SIMPLEX)
    with pytest.raises(Exception):
        p.variables = ("a",)
    assert isinstance(p, Problem)
