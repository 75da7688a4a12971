"""Univariate piecewise polynomials: the value type of every message and belief."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .poly import (
    ONE_POLY,
    AffineExpr,
    Polynomial,
    poly_add,
    poly_antiderivative,
    poly_compose_affine,
    poly_mul,
    poly_scale,
)
from .rational import Q, ZERO, fmt, parse_rational, to_rational


@dataclass(frozen=True)
class Piece:
    lower: Q
    upper: Q
    poly: Polynomial

    def to_json(self) -> dict:
        return {"lower": fmt(self.lower), "upper": fmt(self.upper), "coeffs": self.poly.to_json()}


@dataclass(frozen=True)
class PiecewisePoly:
    pieces: tuple = ()

    @classmethod
    def of(cls, triples) -> "PiecewisePoly":
        """Build from ``(lower, upper, coeffs)`` triples and canonicalize."""
        return canonicalize(
            cls(tuple(Piece(to_rational(l), to_rational(u), Polynomial(c)) for l, u, c in triples))
        )

    @classmethod
    def constant(cls, lower, upper, value=1) -> "PiecewisePoly":
        return cls.of([(lower, upper, (value,))])

    @classmethod
    def indicator(cls, intervals) -> "PiecewisePoly":
        return cls.of([(l, u, (1,)) for l, u in intervals])

    def __bool__(self) -> bool:
        return bool(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    @property
    def support(self):
        if not self.pieces:
            return None
        return self.pieces[0].lower, self.pieces[-1].upper

    @property
    def degree(self) -> int:
        return max((p.poly.degree for p in self.pieces), default=-1)

    def breakpoints(self) -> list:
        out = []
        for p in self.pieces:
            if not out or out[-1] != p.lower:
                out.append(p.lower)
            out.append(p.upper)
        return out

    def __call__(self, x):
        """Value at ``x``; at a shared breakpoint the right-hand piece wins."""
        x = to_rational(x)
        k = bisect_right([p.lower for p in self.pieces], x) - 1
        if k >= 0:
            p = self.pieces[k]
            if p.lower <= x < p.upper:
                return p.poly(x)
        return ZERO

    def scale(self, k) -> "PiecewisePoly":
        k = to_rational(k)
        return canonicalize(PiecewisePoly(tuple(Piece(p.lower, p.upper, poly_scale(p.poly, k))
                                                for p in self.pieces)))

    def map_poly(self, fn) -> "PiecewisePoly":
        return canonicalize(PiecewisePoly(tuple(Piece(p.lower, p.upper, fn(p.poly))
                                                for p in self.pieces)))

    def to_json(self) -> list:
        return [p.to_json() for p in self.pieces]

    @classmethod
    def from_json(cls, data) -> "PiecewisePoly":
        return cls.of([(parse_rational(d["lower"]), parse_rational(d["upper"]),
                        [parse_rational(c) for c in d["coeffs"]]) for d in data])


def canonicalize(a: PiecewisePoly) -> PiecewisePoly:
    """Sort, drop empty or zero pieces and merge touching pieces with equal polynomials."""
    pieces = sorted((p for p in a.pieces if p.lower < p.upper and p.poly),
                    key=lambda p: p.lower)
    out: list = []
    for p in pieces:
        if out and out[-1].upper == p.lower and out[-1].poly == p.poly:
            out[-1] = Piece(out[-1].lower, p.upper, p.poly)
        else:
            out.append(p)
    return PiecewisePoly(tuple(out))


def pw_multiply(a: PiecewisePoly, b: PiecewisePoly) -> PiecewisePoly:
    """Pointwise product; the support is the intersection of supports."""
    out = []
    i = j = 0
    pa, pb = a.pieces, b.pieces
    while i < len(pa) and j < len(pb):
        x, y = pa[i], pb[j]
        lo = x.lower if x.lower > y.lower else y.lower
        hi = x.upper if x.upper < y.upper else y.upper
        if lo < hi:
            out.append(Piece(lo, hi, poly_mul(x.poly, y.poly)))
        if x.upper < y.upper:
            i += 1
        else:
            j += 1
    return canonicalize(PiecewisePoly(tuple(out)))


def pw_product(factors, lower, upper) -> PiecewisePoly:
    """Product of ``factors`` on [lower, upper]; the empty product is 1 there."""
    acc = PiecewisePoly.constant(lower, upper) if lower < upper else PiecewisePoly()
    for f in factors:
        acc = pw_multiply(acc, f)
        if not acc:
            break
    return acc


def pw_add(a: PiecewisePoly, b: PiecewisePoly) -> PiecewisePoly:
    cuts = sorted(set(a.breakpoints()) | set(b.breakpoints()))
    out = []
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        pa, pb = _piece_at(a, mid), _piece_at(b, mid)
        poly = poly_add(pa.poly if pa else (), pb.poly if pb else ())
        out.append(Piece(lo, hi, poly))
    return canonicalize(PiecewisePoly(tuple(out)))


def _piece_at(a: PiecewisePoly, x):
    for p in a.pieces:
        if p.lower < x < p.upper:
            return p
    return None


def restrict(a: PiecewisePoly, intervals) -> PiecewisePoly:
    """Multiply by the indicator of a sorted union of disjoint intervals."""
    return pw_multiply(a, PiecewisePoly.indicator(intervals))


def pw_integrate_numeric(a: PiecewisePoly, l, u) -> Q:
    """Exact integral of ``a`` over [l, u]."""
    l, u = to_rational(l), to_rational(u)
    total = ZERO
    for p in a.pieces:
        lo = p.lower if p.lower > l else l
        hi = p.upper if p.upper < u else u
        if lo < hi:
            F = poly_antiderivative(p.poly)
            total += F(hi) - F(lo)
    return total


def pw_total(a: PiecewisePoly) -> Q:
    total = ZERO
    for p in a.pieces:
        F = poly_antiderivative(p.poly)
        total += F(p.upper) - F(p.lower)
    return total


def pw_integrate_symbolic(p, lower: AffineExpr, upper: AffineExpr) -> Polynomial:
    """F(upper(y)) - F(lower(y)) as a polynomial in y, F the antiderivative of ``p``."""
    F = poly_antiderivative(p)
    return poly_add(poly_compose_affine(F, upper), poly_scale(poly_compose_affine(F, lower), -1))


def constant_one(lower, upper) -> PiecewisePoly:
    return PiecewisePoly((Piece(lower, upper, ONE_POLY),)) if lower < upper else PiecewisePoly()
