"""Exact model integration over tree-shaped SMT(LRA) formulas by message passing."""
from .engine import (
    BeliefTable,
    critical_points,
    intervals_from_points,
    marginal,
    mi,
    moment,
    query_bivariate,
    query_univariate,
    run,
    run_rooted,
    send_message,
    symbolic_bounds,
)
from .errors import (
    CycleError,
    MPMIError,
    NonConformingQuery,
    NonTreeError,
    ParseError,
    UnboundedError,
    UndefinedDistribution,
    UnsupportedWeight,
)
from .formula import Atom, Clause, LinearExpr
from .parser import format_problem, parse_formula, parse_problem
from .piecewise import Piece, PiecewisePoly, pw_integrate_numeric, pw_integrate_symbolic, pw_multiply
from .poly import AffineExpr, Polynomial, poly_add, poly_antiderivative, poly_compose_affine, poly_mul
from .problem import (
    GraphStats,
    Problem,
    PseudoTree,
    assert_tree,
    choose_root,
    establish_support,
    graph_stats,
    primal_graph,
    root_at,
)
from .rational import Q
from .wmi import WeightSpec, WMIProblem, eliminate_booleans, parse_wmi, reduce_weights, wmi

__all__ = [name for name in dir() if not name.startswith("_")]
