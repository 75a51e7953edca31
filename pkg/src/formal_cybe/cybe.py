"""Residuals of the formal classical Yang-Baxter equation and of the
Lie bialgebra axioms for delta = sign * dr.

Every r-occurrence keeps its native regime (first variable Laurent, second
Taylor), so CYB(r) lives in (g⊗g⊗g)((x1))((x2))[[x3]]. A residual coefficient
at (a, b, c) with a, b, c <= W only involves coefficients of r with both
degrees <= 2W + 1, which is how the guaranteed window is derived.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import lie_core as lc
from ._sparse import accumulate, addto, frac
from .errors import NotSkew, WindowTooSmall
from .series import (
    ScalarSeries,
    StandardRMatrix,
    Tensor2Series,
    Tensor3Series,
    Window,
    _cap_min,
    base_rmatrix,
)


# ---------------------------------------------------------------------------
# g-valued series in one variable


@dataclass(frozen=True)
class GSeries:
    """sum_k f_k x^k with f_k in g, known up to degree ``cap``."""

    coeffs: dict = field(default_factory=dict)
    cap: int | None = None

    def __post_init__(self):
        clean = {}
        for k, v in self.coeffs.items():
            v = {a: frac(c) for a, c in v.items() if c}
            if v and (self.cap is None or k <= self.cap):
                clean[int(k)] = v
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def monomial(cls, L, a, k=0, c=1):
        return cls({k: {L.index(a): frac(c)}})

    def bracket(self, L, other):
        out = {}
        for i, u in self.coeffs.items():
            for j, v in other.coeffs.items():
                accumulate(out.setdefault(i + j, {}), lc.bracket(L, u, v))
        cap = _cap_min(
            None if self.cap is None else self.cap + min(other.coeffs, default=0),
            None if other.cap is None else other.cap + min(self.coeffs, default=0),
        )
        return GSeries(out, cap)

    def __add__(self, other):
        out = {k: dict(v) for k, v in self.coeffs.items()}
        for k, v in other.coeffs.items():
            accumulate(out.setdefault(k, {}), v)
        return GSeries(out, _cap_min(self.cap, other.cap))

    def scale(self, c):
        c = frac(c)
        return GSeries({k: {a: x * c for a, x in v.items()} for k, v in self.coeffs.items()}, self.cap)


def act_series(L, f, T, W):
    """[f(x)⊗1 + 1⊗f(y), T(x, y)] on the box i, j <= W."""
    out = {}
    for k, fk in f.coeffs.items():
        for (i, j), t in T.coeffs.items():
            if i + k <= W and j <= W:
                accumulate(out.setdefault((i + k, j), {}), lc.act_left(L, fk, t))
            if i <= W and j + k <= W:
                accumulate(out.setdefault((i, j + k), {}), lc.act_right(L, fk, t))
    return out


# ---------------------------------------------------------------------------
# cobracket


def cobracket(r, f, window, sign=1):
    """sign * dr(f) = sign * [f(x)⊗1 + 1⊗f(y), r(x, y)], Taylor in x and y.

    The pole part is handled with the invariance of Omega:
    [f_j x^j ⊗ 1 + 1 ⊗ f_j y^j, s(y) Omega/(x-y)]
        = s(y) ((x^j - y^j)/(x - y)) [f_j ⊗ 1, Omega].
    """
    L = r.L
    W = window
    xcap = _cap_min(W, r.Nx, f.cap)
    ycap = _cap_min(W, r.Ny, f.cap)
    total = None if f.cap is None else f.cap - 1
    if xcap is None or ycap is None:
        raise WindowTooSmall("cobracket needs a finite window")
    if xcap < 0 or ycap < 0:
        raise WindowTooSmall("cobracket window is empty")
    W = max(xcap, ycap)
    omega = lc.casimir(L)
    out = {}
    for j, fj in f.coeffs.items():
        if j == 0:
            continue
        bracket_term = lc.act_left(L, fj, omega)
        if not bracket_term:
            continue
        for p in range(j):
            q = j - 1 - p
            if p > xcap:
                continue
            for l, c in r.s.coeffs.items():
                if q + l <= ycap:
                    accumulate(out.setdefault((p, q + l), {}), bracket_term, c)
    g = r.g.restrict(xcap, ycap)
    for key, t in act_series(L, f, g, W).items():
        accumulate(out.setdefault(key, {}), t)
    res = Tensor2Series(out, xcap, ycap, total)
    return res.scale(sign) if sign != 1 else res


class Cobracket:
    """delta = sign * dr with a cache of monomial values delta(I_a x^k)."""

    def __init__(self, r, sign=1):
        self.r = r
        self.L = r.L
        self.sign = sign
        self._cache = {}

    def monomial(self, a, k, W):
        key = (a, k, W)
        if key not in self._cache:
            self._cache[key] = cobracket(self.r, GSeries({k: {a: 1}}), W, self.sign)
        return self._cache[key]

    def __call__(self, f, W):
        if f.cap is not None:
            return cobracket(self.r, f, W, self.sign)
        out = Tensor2Series({}, W, W)
        for k, v in f.coeffs.items():
            for a, c in v.items():
                out = out + self.monomial(a, k, W).scale(c)
        return out


def base_cobracket(L, i, decomposition=None):
    """delta_i = -dr_i for the base r-matrices."""
    return Cobracket(base_rmatrix(L, i, decomposition), sign=-1)


def _as_delta(r_or_delta):
    if isinstance(r_or_delta, Cobracket):
        return r_or_delta
    return Cobracket(r_or_delta, sign=1)


# ---------------------------------------------------------------------------
# CYB


def _cyb_part(args):
    L, terms, W, which = args
    out = {}
    if which == 0:
        # [r12, r13]: (i1 + i2, j1, j2)
        for i1, j1, A in terms:
            if j1 > W:
                continue
            for i2, j2, B in terms:
                if j2 <= W and i1 + i2 <= W:
                    accumulate(out.setdefault((i1 + i2, j1, j2), {}), lc.br_12_13(L, A, B))
    elif which == 1:
        # [r12, r23]: (i1, j1 + i2, j2)
        for i1, j1, A in terms:
            if i1 > W:
                continue
            for i2, j2, B in terms:
                if j2 <= W and j1 + i2 <= W:
                    accumulate(out.setdefault((i1, j1 + i2, j2), {}), lc.br_12_23(L, A, B))
    else:
        # [r13, r23]: (i1, i2, j1 + j2)
        for i1, j1, A in terms:
            if i1 > W:
                continue
            for i2, j2, B in terms:
                if i2 <= W and j1 + j2 <= W:
                    accumulate(out.setdefault((i1, i2, j1 + j2), {}), lc.br_13_23(L, A, B))
    return out


def _threads():
    try:
        return max(1, int(os.environ.get("CYBE_THREADS", "1")))
    except ValueError:
        return 1


def guaranteed_cyb_window(r, window):
    W = window
    for cap in (r.Nx, r.Ny):
        if cap is not None:
            W = min(W, (cap - 1) // 2)
    if r.g.total is not None:
        W = min(W, (r.g.total - 1) // 3)
    return W


def cyb_residual(r, window=6):
    """[r12, r13] + [r12, r23] + [r13, r23] on the box a, b, c <= W.

    W is the requested window shrunk so the box is provably exact: the inputs
    must be known up to degree 2W + 1 in both variables.
    """
    W = guaranteed_cyb_window(r, window)
    if W < 0:
        raise WindowTooSmall(f"r is known only to x<={r.Nx}, y<={r.Ny}; no CYB coefficient is exact")
    terms = r.terms(2 * W + 1, 2 * W + 1)
    jobs = [(r.L, terms, W, k) for k in range(3)]
    if _threads() > 1 and len(terms) > 40:
        with ProcessPoolExecutor(max_workers=min(3, _threads())) as ex:
            parts = list(ex.map(_cyb_part, jobs))
    else:
        parts = [_cyb_part(j) for j in jobs]
    out = {}
    for part in parts:
        for key in sorted(part):
            accumulate(out.setdefault(key, {}), part[key])
    return Tensor3Series(out, Window((W, W, W)))


# ---------------------------------------------------------------------------
# Alt and (delta ⊗ 1)


def alt(coeffs):
    """T + sigma T + sigma^2 T with sigma(u1⊗u2⊗u3) = u3⊗u1⊗u2."""
    out = {}
    for (e1, e2, e3), t in coeffs.items():
        for (a, b, c), v in t.items():
            addto(out.setdefault((e1, e2, e3), {}), (a, b, c), v)
            addto(out.setdefault((e3, e1, e2), {}), (c, a, b), v)
            addto(out.setdefault((e2, e3, e1), {}), (b, c, a), v)
    return out


def delta_tensor_one(delta, t, W):
    """(delta ⊗ 1) t for a Taylor tensor series t, on the box a, b, c <= W."""
    need_x = 2 * W + 1
    if t.xcap is not None and t.xcap < need_x or t.ycap is not None and t.ycap < W:
        raise WindowTooSmall("(delta⊗1)t needs t to degree 2W+1 in x and W in y")
    out = {}
    for (i, j), tt in t.coeffs.items():
        if j > W or i > need_x:
            continue
        for (a, b), v in tt.items():
            d = delta.monomial(a, i, W)
            for (p, q), dt in d.coeffs.items():
                for (u1, u2), w in dt.items():
                    addto(out.setdefault((p, q, j), {}), (u1, u2, b), v * w)
    return out


def cocycle_residual(r_or_delta, f, g, window=4):
    """delta([f, g]) - [f⊗1 + 1⊗f, delta(g)] + [g⊗1 + 1⊗g, delta(f)]."""
    delta = _as_delta(r_or_delta)
    L = delta.L
    W = window
    fg = f.bracket(L, g)
    lhs = delta(fg, W)
    dg, df = delta(g, W), delta(f, W)
    xcap = _cap_min(lhs.xcap, dg.xcap, df.xcap)
    ycap = _cap_min(lhs.ycap, dg.ycap, df.ycap)
    caps = [c for c in (xcap, ycap) if c is not None]
    box = min(caps) if caps else W
    out = {k: dict(v) for k, v in lhs.coeffs.items()}
    for key, t in act_series(L, f, dg, box).items():
        accumulate(out.setdefault(key, {}), t, -1)
    for key, t in act_series(L, g, df, box).items():
        accumulate(out.setdefault(key, {}), t)
    return Tensor2Series(out, box, box, _cap_min(lhs.total, dg.total, df.total))


def cojacobi_residual(r_or_delta, f, window=4):
    """Alt((delta ⊗ 1) delta(f)) on the Taylor box a, b, c <= W."""
    delta = _as_delta(r_or_delta)
    W = window
    df = delta(f, 2 * W + 1)
    W = min(W, (df.xcap - 1) // 2, df.ycap)
    if df.total is not None:
        W = min(W, (df.total - 1) // 3)
    if W < 0:
        raise WindowTooSmall("f is not known far enough for a co-Jacobi check")
    return Tensor3Series(alt(delta_tensor_one(delta, df, W)), Window((W, W, W)))


# ---------------------------------------------------------------------------
# twists


def check_skew(t):
    """Raise NotSkew unless t(x, y) + tau t(y, x) = 0."""
    diff = t + t.swap()
    if not diff.is_zero():
        raise NotSkew(f"tensor is not skew; first offending term {diff.first_nonzero()}")


def twist_residual(base, s, window=4, decomposition=None, L=None):
    """CYB(s) - Alt((delta_i ⊗ 1) s) with delta_i = -dr_i.

    ``base`` is an index 0..3 (then ``L`` is required) or a Cobracket.
    Zero exactly when s is a twist of delta_i at this order; this happens
    iff -r_i + s solves the CYBE on the same window.
    """
    if isinstance(base, Cobracket):
        delta = base
    else:
        delta = base_cobracket(L, base, decomposition)
    L = delta.L
    if s.x_min < 0 or any(j < 0 for _, j in s.coeffs):
        raise NotSkew("twist must be Taylor in both variables")
    check_skew(s)
    W = window
    if s.xcap is not None:
        W = min(W, (s.xcap - 1) // 2)
    if s.ycap is not None:
        W = min(W, s.ycap)
    if W < 0:
        raise WindowTooSmall("twist window is empty")
    rs = StandardRMatrix(L, ScalarSeries(), s)
    cyb = cyb_residual(rs, W)
    corr = Tensor3Series(alt(delta_tensor_one(delta, s, W)), Window((W, W, W)))
    return cyb - corr
