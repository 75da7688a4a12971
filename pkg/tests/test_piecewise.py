from hypothesis import given, settings
from hypothesis import strategies as st

from mpmi.piecewise import (
    PiecewisePoly,
    canonicalize,
    pw_add,
    pw_integrate_numeric,
    pw_integrate_symbolic,
    pw_multiply,
    pw_total,
)
from mpmi.poly import AffineExpr, Polynomial
from mpmi.rational import Q

B2 = PiecewisePoly.of([(0, 1, (0, 1)), (1, 2, (0, 2, -1))])


@st.composite
def piecewise(draw):
    cuts = sorted(set(draw(st.lists(st.integers(-6, 6), min_size=2, max_size=6))))
    triples = []
    for lo, hi in zip(cuts, cuts[1:]):
        if draw(st.booleans()):
            coeffs = draw(st.lists(st.integers(-4, 4), max_size=3))
            triples.append((Q(lo, 2), Q(hi, 2), coeffs))
    return PiecewisePoly.of(triples)


def test_multiply_examples():
    left = PiecewisePoly.of([(0, 2, (0, 1)), (2, 3, (2,))])
    right = PiecewisePoly.of([(0, 1, (1,)), (1, 2, (2, -1))])
    assert pw_multiply(left, right) == B2
    assert pw_multiply(left, PiecewisePoly()) == PiecewisePoly()
    assert pw_multiply(left, PiecewisePoly.constant(-5, 5)) == left


def test_integrate_numeric_examples():
    assert pw_integrate_numeric(PiecewisePoly.constant(0, 1), 0, 1) == 1
    assert pw_integrate_numeric(B2, 0, 2) == Q(7, 6)
    assert pw_integrate_numeric(B2, Q(1, 2), Q(1, 2)) == 0


def test_integrate_symbolic_examples():
    y = AffineExpr(1, 0)
    zero = AffineExpr.const(0)
    assert pw_integrate_symbolic(Polynomial([1]), zero, y) == Polynomial([0, 1])
    assert pw_integrate_symbolic(Polynomial([0, 1]), zero, y) == Polynomial([0, 0, Q(1, 2)])
    assert pw_integrate_symbolic(Polynomial([0, 1]), zero, AffineExpr(-1, 2)) == Polynomial([2, -2, Q(1, 2)])


def test_canonical_form_merges_and_drops():
    a = PiecewisePoly.of([(1, 2, (3,)), (0, 1, (3,)), (2, 2, (1,)), (2, 4, ())])
    assert a == PiecewisePoly.of([(0, 2, (3,))])
    assert len(a) == 1


def test_evaluation_right_piece_wins():
    a = PiecewisePoly.of([(0, 1, (1,)), (1, 2, (5,))])
    assert a(1) == 5
    assert a(Q(1, 2)) == 1
    assert a(2) == 0 and a(-1) == 0


def test_json_round_trip():
    assert PiecewisePoly.from_json(B2.to_json()) == B2


@given(piecewise(), piecewise())
def test_multiply_commutes(a, b):
    assert pw_multiply(a, b) == pw_multiply(b, a)


@given(piecewise(), piecewise(), piecewise())
@settings(max_examples=50)
def test_multiply_associates(a, b, c):
    assert pw_multiply(pw_multiply(a, b), c) == pw_multiply(a, pw_multiply(b, c))


@given(piecewise(), piecewise())
def test_integral_additive(a, b):
    assert pw_total(pw_add(a, b)) == pw_total(a) + pw_total(b)


@given(piecewise(), st.integers(-8, 8), st.integers(-8, 8), st.integers(-8, 8))
def test_integral_splits(a, l, m, u):
    l, m, u = sorted((Q(l, 2), Q(m, 2), Q(u, 2)))
    assert pw_integrate_numeric(a, l, u) == pw_integrate_numeric(a, l, m) + pw_integrate_numeric(a, m, u)


@given(piecewise())
def test_canonicalize_idempotent(a):
    assert canonicalize(a) == a
    for p, q in zip(a.pieces, a.pieces[1:]):
        assert p.upper <= q.lower
        assert not (p.upper == q.lower and p.poly == q.poly)


@given(st.lists(st.integers(-3, 3), max_size=4), st.integers(-4, 4), st.integers(-4, 4),
       st.integers(-4, 4), st.integers(-4, 4), st.integers(-6, 6))
def test_symbolic_specializes_to_numeric(coeffs, a, b, c, d, v):
    lower, upper = AffineExpr(Q(a, 2), Q(b, 2)), AffineExpr(Q(c, 2), Q(d, 2))
    p = Polynomial(coeffs)
    sym = pw_integrate_symbolic(p, lower, upper)
    y = Q(v, 3)
    lo, hi = lower(y), upper(y)
    if lo <= hi:
        numeric = pw_integrate_numeric(PiecewisePoly.of([(lo - 100, hi + 100, coeffs)]), lo, hi)
        assert sym(y) == numeric


@given(piecewise())
def test_square_nonnegative_integral(a):
    assert pw_total(pw_multiply(a, a)) >= 0
