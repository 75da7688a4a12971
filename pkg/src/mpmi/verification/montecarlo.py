"""Seeded rejection-sampling estimates of MI.

Two sampling regions are available: the support box, and a tighter product of
per-variable interval unions obtained by propagating clauses grouped by their
variable sets.  Both contain every model, so both give unbiased estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from ..engine import univariate_intervals
from ..problem import Problem, establish_support, literal_interval

COMBO_LIMIT = 4096
CHUNK = 1 << 16


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float
    samples: int
    seed: int
    volume: float = 0.0
    hits: int = 0

    def within(self, exact, k: float = 4.0) -> bool:
        return abs(float(exact) - self.estimate) <= k * self.std_error

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error, "samples": self.samples,
                "seed": self.seed, "volume": self.volume, "hits": self.hits}


# -- interval unions (None = infinite) ---------------------------------------


def _normalize(intervals) -> list:
    """Sorted, merged union of (lo, hi) pairs; empty pairs dropped."""
    def key(iv):
        return (-math.inf if iv[0] is None else iv[0])

    out: list = []
    for lo, hi in sorted((iv for iv in intervals
                          if iv[0] is None or iv[1] is None or iv[0] < iv[1]), key=key):
        if out and (out[-1][1] is None or lo is None or lo <= out[-1][1]):
            last_lo, last_hi = out[-1]
            if last_hi is not None and (hi is None or hi > last_hi):
                out[-1] = (last_lo, hi)
        else:
            out.append((lo, hi))
    return out


def _intersect(a: list, b: list) -> list:
    out = []
    for alo, ahi in a:
        for blo, bhi in b:
            lo = blo if alo is None or (blo is not None and blo > alo) else alo
            hi = bhi if ahi is None or (bhi is not None and bhi < ahi) else ahi
            if lo is None or hi is None or lo < hi:
                out.append((lo, hi))
    return _normalize(out)


def _hull(ivs: list) -> tuple:
    return ivs[0][0], ivs[-1][1]


def union_domains(p: Problem, rounds: int = 3):
    """Per-variable finite unions of intervals containing every model, or None if empty."""
    if p.support is None:
        p = establish_support(p)
    if p.infeasible:
        return None
    doms = [univariate_intervals(p.node_formulas[v], v, *p.support[v]) for v in range(p.n)]
    if any(not d for d in doms):
        return None
    groups: dict = {}
    for clause in p.clauses:
        if len(clause.vars) > 1:
            groups.setdefault(frozenset(clause.vars), []).append(clause)
    for _ in range(rounds):
        changed = False
        for vs, clauses in groups.items():
            for v in sorted(vs):
                others = sorted(vs - {v})
                choices = [doms[u] for u in others]
                if math.prod(len(c) for c in choices) > COMBO_LIMIT:
                    choices = [[_hull(c)] for c in choices]
                allowed = []
                for combo in product(*choices):
                    lo = [None] * p.n
                    hi = [None] * p.n
                    for u, (l, h) in zip(others, combo):
                        lo[u], hi[u] = l, h
                    region = [(None, None)]
                    for clause in clauses:
                        parts = [literal_interval(lit, v, lo, hi) for lit in clause.literals]
                        region = _intersect(region, _normalize([x for x in parts if x is not False]))
                        if not region:
                            break
                    allowed.extend(region)
                new = _intersect(doms[v], _normalize(allowed))
                if not new:
                    return None
                if new != doms[v]:
                    doms[v] = new
                    changed = True
        if not changed:
            break
    return doms


# -- vectorised formula evaluation -------------------------------------------


def _compile(p: Problem):
    out = []
    for clause in p.clauses:
        lits = []
        for atom in clause.literals:
            coeffs = np.zeros(p.n)
            for v, c in atom.expr.terms:
                coeffs[v] = float(c)
            lits.append((coeffs, float(atom.expr.constant), atom.strict))
        out.append(lits)
    return out


def _satisfied(compiled, xs: np.ndarray) -> np.ndarray:
    ok = np.ones(len(xs), dtype=bool)
    for lits in compiled:
        any_lit = np.zeros(len(xs), dtype=bool)
        for coeffs, const, strict in lits:
            val = xs @ coeffs + const
            any_lit |= (val < 0) if strict else (val <= 0)
        ok &= any_lit
    return ok


def _sample_union(rng, ivs, count: int) -> np.ndarray:
    lows = np.array([float(l) for l, _ in ivs])
    lens = np.array([float(h - l) for l, h in ivs])
    if len(ivs) == 1:
        return lows[0] + lens[0] * rng.random(count)
    which = rng.choice(len(ivs), size=count, p=lens / lens.sum())
    return lows[which] + lens[which] * rng.random(count)


def oracle_monte_carlo(p: Problem, samples: int, seed: int, region: str = "union") -> McEstimate:
    """Estimate MI as (region volume) * (hit fraction); ``region`` is "union" or "box"."""
    if p.support is None:
        p = establish_support(p)
    if p.infeasible:
        return McEstimate(0.0, 0.0, samples, seed, 0.0, 0)
    if region == "box":
        doms = [[iv] for iv in p.support]
    else:
        doms = union_domains(p)
        if doms is None:
            return McEstimate(0.0, 0.0, samples, seed, 0.0, 0)
    volume = 1.0
    for d in doms:
        volume *= float(sum(h - l for l, h in d))
    rng = np.random.Generator(np.random.PCG64(seed))
    compiled = _compile(p)
    hits = 0
    left = samples
    while left > 0:
        count = min(CHUNK, left)
        xs = np.empty((count, p.n))
        for v, d in enumerate(doms):
            xs[:, v] = _sample_union(rng, d, count)
        hits += int(_satisfied(compiled, xs).sum())
        left -= count
    phat = hits / samples
    est = volume * phat
    err = volume * math.sqrt(phat * (1 - phat) / samples)
    return McEstimate(est, err, samples, seed, volume, hits)


def find_model(p: Problem, samples: int, seed: int):
    """A satisfying point found by sampling the union region, or None."""
    if p.support is None:
        p = establish_support(p)
    doms = None if p.infeasible else union_domains(p)
    if doms is None:
        return None
    rng = np.random.Generator(np.random.PCG64(seed))
    xs = np.empty((samples, p.n))
    for v, d in enumerate(doms):
        xs[:, v] = _sample_union(rng, d, samples)
    ok = _satisfied(_compile(p), xs)
    idx = np.flatnonzero(ok)
    return xs[idx[0]] if len(idx) else None
