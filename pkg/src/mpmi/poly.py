"""Dense univariate polynomials over exact rationals."""
from __future__ import annotations

from dataclasses import dataclass

from .rational import Q, ZERO, fmt, to_rational


class Polynomial(tuple):
    """Coefficients indexed by degree; trailing zeros are stripped, so ``()`` is zero."""

    def __new__(cls, coeffs=()):
        cs = [to_rational(c) if not isinstance(c, Q) else c for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return super().__new__(cls, cs)

    @classmethod
    def _raw(cls, cs) -> "Polynomial":
        # caller guarantees mpq entries
        cs = list(cs)
        while cs and cs[-1] == 0:
            cs.pop()
        return tuple.__new__(cls, cs)

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls((c,))

    @property
    def degree(self) -> int:
        return len(self) - 1  # zero polynomial has degree -1

    @property
    def is_zero(self) -> bool:
        return not self

    def __call__(self, x):
        acc = ZERO
        for c in reversed(self):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        return poly_add(self, other)

    def __sub__(self, other):
        return poly_add(self, poly_scale(other, -1))

    def __mul__(self, other):
        return poly_mul(self, other)

    def __neg__(self):
        return poly_scale(self, -1)

    def __repr__(self):
        return f"Polynomial([{', '.join(fmt(c) for c in self)}])"

    def to_json(self) -> list:
        return [fmt(c) for c in self]


ZERO_POLY = Polynomial()
ONE_POLY = Polynomial((1,))
X_POLY = Polynomial((0, 1))


@dataclass(frozen=True)
class AffineExpr:
    """``slope * y + intercept`` in the destination variable."""

    slope: Q = ZERO
    intercept: Q = ZERO

    @classmethod
    def const(cls, c) -> "AffineExpr":
        return cls(ZERO, to_rational(c))

    def __call__(self, y):
        return self.slope * y + self.intercept

    def as_poly(self) -> Polynomial:
        return Polynomial._raw((self.intercept, self.slope))


def poly_add(a, b) -> Polynomial:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for k, c in enumerate(b):
        out[k] = out[k] + c
    return Polynomial._raw(out)


def poly_scale(a, k) -> Polynomial:
    k = to_rational(k)
    if k == 0:
        return ZERO_POLY
    return Polynomial._raw([c * k for c in a])


def poly_mul(a, b) -> Polynomial:
    if not a or not b:
        return ZERO_POLY
    if len(a) == 1:
        return poly_scale(b, a[0])
    if len(b) == 1:
        return poly_scale(a, b[0])
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return Polynomial._raw(out)


def poly_compose_affine(p, a: AffineExpr) -> Polynomial:
    """q(y) = p(slope*y + intercept), by Horner's scheme."""
    if not p:
        return ZERO_POLY
    s, c = a.slope, a.intercept
    if s == 0:
        return Polynomial._raw((Polynomial(p)(c),))
    acc = [p[-1]]
    for coef in reversed(p[:-1]):
        # acc <- acc * (s y + c) + coef
        nxt = [ZERO] * (len(acc) + 1)
        for k, v in enumerate(acc):
            nxt[k] += v * c
            nxt[k + 1] += v * s
        nxt[0] += coef
        acc = nxt
    return Polynomial._raw(acc)


def poly_antiderivative(p) -> Polynomial:
    """F with F' = p and F(0) = 0."""
    if not p:
        return ZERO_POLY
    return Polynomial._raw([ZERO] + [c / (k + 1) for k, c in enumerate(p)])


def poly_derivative(p) -> Polynomial:
    return Polynomial._raw([c * k for k, c in enumerate(p)][1:])


def poly_power(p, k: int) -> Polynomial:
    out = ONE_POLY
    for _ in range(k):
        out = poly_mul(out, p)
    return out
