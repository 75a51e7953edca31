"""Hypothesis strategies and seeded generators shared by the tests."""
from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from formal_cybe import lie_core as lc
from formal_cybe.series import ScalarSeries, Tensor2Series

small_fracs = st.fractions(min_value=-3, max_value=3, max_denominator=4)
nonzero_fracs = small_fracs.filter(bool)


@st.composite
def taylor_series(draw, min_deg=0, max_deg=5, lead_nonzero=True):
    degs = range(min_deg, max_deg + 1)
    coeffs = {k: draw(small_fracs) for k in degs}
    if lead_nonzero:
        coeffs[min_deg] = draw(nonzero_fracs)
    return ScalarSeries(coeffs)


@st.composite
def gvectors(draw, dim):
    return {a: draw(small_fracs) for a in range(dim) if draw(st.booleans())}


def rand_frac(rng, span=3, den=3):
    return Fraction(rng.randint(-span * den, span * den), rng.randint(1, den))


def random_skew(L, rng, degree=2, density=0.3):
    """Random s(x, y) with s(x, y) = -tau s(y, x), total degree <= degree."""
    coeffs = {}
    for i in range(degree + 1):
        for j in range(i, degree + 1 - i):
            T = {}
            for a in range(L.dim):
                for b in range(L.dim):
                    if rng.random() < density:
                        T[(a, b)] = T.get((a, b), 0) + rand_frac(rng)
            if i == j:
                T = {k: v for k, v in _antisym(T).items() if v}
                if T:
                    coeffs[(i, i)] = T
            else:
                if T:
                    coeffs[(i, j)] = T
                    coeffs[(j, i)] = {(b, a): -v for (a, b), v in T.items()}
    return Tensor2Series(coeffs)


def _antisym(T):
    out = {}
    for (a, b), v in T.items():
        out[(a, b)] = out.get((a, b), 0) + v
        out[(b, a)] = out.get((b, a), 0) - v
    return out


def wedge(L, a, b, c=1):
    """c (a ⊗ b - b ⊗ a) as a constant tensor series."""
    a, b = L.index(a), L.index(b)
    return Tensor2Series({(0, 0): {(a, b): Fraction(c), (b, a): -Fraction(c)}})


def seeded(seed):
    return random.Random(seed)


SL2 = lc.sl(2)
SL3 = lc.sl(3)
