"""Windowed exact series: scalar series, g⊗g-valued bivariate series and
trivariate residual containers, plus the standard form of an r-matrix.

A window cap N on an axis means coefficients of degree <= N are known
exactly and everything above is unknown (not zero). ``None`` means the
series is exact on that axis. Every operation returns the largest window on
which its result is provably correct.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import lie_core as lc
from ._sparse import addto, accumulate, fmt, frac
from .errors import (
    AllZeroWindow,
    NotComposable,
    NotInvertible,
    WindowTooSmall,
)

INF = float("inf")


def _cap_min(*caps):
    """Minimum of caps where None means unbounded."""
    finite = [c for c in caps if c is not None and c != INF]
    return min(finite) if finite else None


def _as_num(c):
    return INF if c is None else c


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class Window:
    """Upper caps per axis plus an optional cap on the total degree."""

    caps: tuple
    total: int | None = None

    def contains(self, degs):
        for d, c in zip(degs, self.caps):
            if c is not None and d > c:
                return False
        if self.total is not None and sum(degs) > self.total:
            return False
        return True

    def to_json(self):
        names = ("x1", "x2", "x3") if len(self.caps) == 3 else ("x", "y")
        out = {n: c for n, c in zip(names, self.caps)}
        if self.total is not None:
            out["total"] = self.total
        return out


# ---------------------------------------------------------------------------
# scalar series


@dataclass(frozen=True)
class ScalarSeries:
    """A Laurent/Taylor series in one variable, known up to degree ``cap``."""

    coeffs: dict = field(default_factory=dict)
    cap: int | None = None

    def __post_init__(self):
        clean = {}
        for k, v in self.coeffs.items():
            v = frac(v)
            if v and (self.cap is None or k <= self.cap):
                clean[int(k)] = v
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def monomial(cls, k, c=1, cap=None):
        return cls({k: Fraction(c)}, cap)

    @classmethod
    def const(cls, c, cap=None):
        return cls({0: Fraction(c)}, cap)

    @property
    def exact(self):
        return self.cap is None

    @property
    def min_degree(self):
        return min(self.coeffs) if self.coeffs else None

    def coeff(self, k):
        if self.cap is not None and k > self.cap:
            raise WindowTooSmall(f"coefficient of degree {k} is beyond window {self.cap}")
        return self.coeffs.get(k, Fraction(0))

    def valuation(self):
        """Order of vanishing; AllZeroWindow if nothing is visible in a truncated window."""
        if self.coeffs:
            return min(self.coeffs)
        if self.cap is None:
            return None
        raise AllZeroWindow(f"series is zero up to degree {self.cap}; order unknown")

    def truncate(self, cap):
        if cap is None:
            return self
        return ScalarSeries(self.coeffs, cap if self.cap is None else min(cap, self.cap))

    def __add__(self, other):
        other = _scalar(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            addto(out, k, v)
        return ScalarSeries(out, _cap_min(self.cap, other.cap))

    def __neg__(self):
        return ScalarSeries({k: -v for k, v in self.coeffs.items()}, self.cap)

    def __sub__(self, other):
        return self + (-_scalar(other))

    def scale(self, c):
        c = frac(c)
        return ScalarSeries({k: v * c for k, v in self.coeffs.items()}, self.cap)

    def __mul__(self, other):
        if not isinstance(other, ScalarSeries):
            return self.scale(other)
        return mul(self, other)

    __rmul__ = __mul__

    def derivative(self):
        cap = None if self.cap is None else self.cap - 1
        return ScalarSeries({k - 1: k * v for k, v in self.coeffs.items() if k}, cap)

    def shift(self, d):
        """Multiply by y^d."""
        cap = None if self.cap is None else self.cap + d
        return ScalarSeries({k + d: v for k, v in self.coeffs.items()}, cap)

    def __eq__(self, other):
        other = _scalar(other)
        return self.coeffs == other.coeffs and self.cap == other.cap

    def agrees(self, other, upto):
        """Coefficientwise equality for all degrees <= upto."""
        other = _scalar(other)
        lo = min([0] + list(self.coeffs) + list(other.coeffs))
        return all(self.coeff(k) == other.coeff(k) for k in range(lo, upto + 1))

    def to_json(self):
        return {
            "coeffs": [[k, fmt(v)] for k, v in sorted(self.coeffs.items())],
            "cap": self.cap,
        }

    def __repr__(self):
        terms = " + ".join(f"({v})y^{k}" for k, v in sorted(self.coeffs.items())) or "0"
        tail = "" if self.cap is None else f" + O(y^{self.cap + 1})"
        return terms + tail


def _scalar(x):
    return x if isinstance(x, ScalarSeries) else ScalarSeries.const(x)


def mul(f, g, cap=None):
    """Product with window min(Nf + vg, Ng + vf)."""
    if not f.coeffs and f.exact or not g.coeffs and g.exact:
        return ScalarSeries({}, None)
    vf = f.min_degree if f.coeffs else _as_num(f.cap) + 1
    vg = g.min_degree if g.coeffs else _as_num(g.cap) + 1
    bound = min(_as_num(f.cap) + vg, _as_num(g.cap) + vf)
    out_cap = None if bound == INF else int(bound)
    out_cap = _cap_min(out_cap, cap)
    out = {}
    for i, a in f.coeffs.items():
        for j, b in g.coeffs.items():
            if out_cap is None or i + j <= out_cap:
                addto(out, i + j, a * b)
    return ScalarSeries(out, out_cap)


def power(f, k, cap=None):
    """f^k; with ``cap`` only degrees <= cap are kept in the result."""
    out = ScalarSeries.const(1)
    if k < 0:
        k = -k
        f = invert(f, cap=None if cap is None else cap + (k - 1) * max(0, f.min_degree or 0))
    # a pole of order p in f lowers the degree reached by later factors
    pole = max(0, -(f.min_degree or 0))
    for step in range(1, k + 1):
        inner = None if cap is None else cap + (k - step) * pole
        out = mul(out, f, inner)
    return out


def invert(f, cap=None):
    """Multiplicative inverse, Laurent allowed.

    For f = c y^v (1 + ...) known to degree N the inverse is known to degree
    N - 2v. An exact polynomial input needs an explicit output ``cap``.
    """
    if not f.coeffs:
        raise NotInvertible("zero series (within window) has no inverse")
    v = f.min_degree
    bound = None if f.cap is None else f.cap - 2 * v
    out_cap = _cap_min(bound, cap)
    if out_cap is None:
        if len(f.coeffs) == 1:
            return ScalarSeries({-v: 1 / f.coeffs[v]}, None)
        raise NotInvertible("inverse of a non-monomial polynomial is infinite; pass cap")
    lead = f.coeffs[v]
    # f = lead * y^v * (1 + rest); solve for b with b * (f / y^v) = 1
    rel = {k - v: c / lead for k, c in f.coeffs.items()}
    depth = out_cap + v  # number of relative terms needed
    b = {0: Fraction(1)}
    for n in range(1, depth + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            c = rel.get(k)
            if c:
                bn = b.get(n - k)
                if bn:
                    acc -= c * bn
        if acc:
            b[n] = acc
    return ScalarSeries({n - v: c / lead for n, c in b.items()}, out_cap)


def compose(f, h, cap=None):
    """f(h(y)); f Taylor, h without constant term.

    Window: min((Nf + 1) * vh - 1, Nh + (vf - 1) * vh) where vh, vf are the
    orders of h and f (the second bound uses that h^k is known to Nh + (k-1) vh).
    """
    if f.coeffs and min(f.coeffs) < 0:
        raise NotComposable("outer series must be Taylor")
    if h.coeffs.get(0) or any(k < 0 for k in h.coeffs):
        raise NotComposable("inner series must have zero constant term")
    if not h.coeffs:
        if not h.exact:
            raise NotComposable("inner series vanishes on its window; order unknown")
        return ScalarSeries({0: f.coeff(0)}, None)
    vh = min(h.coeffs)
    vf = max(1, min(f.coeffs, default=1))
    b1 = INF if f.cap is None else (f.cap + 1) * vh - 1
    bound = min(b1, _as_num(h.cap) + (vf - 1) * vh)
    out_cap = _cap_min(None if bound == INF else int(bound), cap)
    if out_cap is None:
        top = max(f.coeffs, default=0)
    else:
        top = out_cap // vh
        if f.cap is not None:
            top = min(top, f.cap)
    out = {}
    hp = ScalarSeries.const(1)
    for k in range(0, top + 1):
        c = f.coeffs.get(k)
        if c:
            for d, v in hp.coeffs.items():
                addto(out, d, c * v)
        if k < top:
            hp = mul(hp, h, out_cap)
    return ScalarSeries(out, out_cap)


# ---------------------------------------------------------------------------
# g⊗g-valued series in two variables


@dataclass(frozen=True)
class Tensor2Series:
    """Sum of T_{ij} x^i y^j with T_{ij} in g⊗g.

    ``coeffs`` maps (i, j) to a sparse Tensor2 dict. Known for i <= xcap and
    j <= ycap (None = exact on that axis), and in addition for i + j <= total
    when ``total`` is set.
    """

    coeffs: dict = field(default_factory=dict)
    xcap: int | None = None
    ycap: int | None = None
    total: int | None = None

    def __post_init__(self):
        clean = {}
        w = self.window
        for key, t in self.coeffs.items():
            if not w.contains(key):
                continue
            t = {k: v for k, v in t.items() if v}
            if t:
                clean[key] = t
        object.__setattr__(self, "coeffs", clean)

    @property
    def window(self):
        return Window((self.xcap, self.ycap), self.total)

    @property
    def x_min(self):
        return min((i for i, _ in self.coeffs), default=0)

    def coeff(self, i, j):
        if not self.window.contains((i, j)):
            raise WindowTooSmall(f"coefficient x^{i} y^{j} outside window {self.window.to_json()}")
        return self.coeffs.get((i, j), {})

    def is_zero(self):
        return not self.coeffs

    def restrict(self, xcap=None, ycap=None, total=None):
        return Tensor2Series(
            self.coeffs,
            _cap_min(self.xcap, xcap),
            _cap_min(self.ycap, ycap),
            _cap_min(self.total, total),
        )

    def __add__(self, other):
        out = {k: dict(v) for k, v in self.coeffs.items()}
        for key, t in other.coeffs.items():
            accumulate(out.setdefault(key, {}), t)
        return Tensor2Series(
            out,
            _cap_min(self.xcap, other.xcap),
            _cap_min(self.ycap, other.ycap),
            _cap_min(self.total, other.total),
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = frac(c)
        return Tensor2Series(
            {key: {k: v * c for k, v in t.items()} for key, t in self.coeffs.items()},
            self.xcap,
            self.ycap,
            self.total,
        )

    def swap(self):
        """tau applied to values together with x <-> y: (tau T)(y, x)."""
        return Tensor2Series(
            {(j, i): lc.tau(t) for (i, j), t in self.coeffs.items()},
            self.ycap,
            self.xcap,
            self.total,
        )

    def mul_poly(self, poly):
        """Multiply by a scalar polynomial {(a, b): c} in x, y with a, b >= 0."""
        amin = min(a for a, _ in poly)
        bmin = min(b for _, b in poly)
        out = {}
        for (i, j), t in self.coeffs.items():
            for (a, b), c in poly.items():
                accumulate(out.setdefault((i + a, j + b), {}), t, frac(c))
        return Tensor2Series(
            out,
            None if self.xcap is None else self.xcap + amin,
            None if self.ycap is None else self.ycap + bmin,
            None if self.total is None else self.total + amin + bmin,
        )

    def first_nonzero(self):
        if not self.coeffs:
            return None
        key = min(self.coeffs, key=lambda k: (sum(k), k))
        (a, b), v = min(self.coeffs[key].items())
        return [key[0], key[1], a, b, fmt(v)]

    def report(self):
        return residual_report(self)

    def __eq__(self, other):
        return (
            isinstance(other, Tensor2Series)
            and self.coeffs == other.coeffs
            and self.window == other.window
        )

    def agrees(self, other):
        """Equality of coefficients on the common window."""
        w = Window(
            (_cap_min(self.xcap, other.xcap), _cap_min(self.ycap, other.ycap)),
            _cap_min(self.total, other.total),
        )
        keys = set(self.coeffs) | set(other.coeffs)
        return all(
            self.coeffs.get(k, {}) == other.coeffs.get(k, {}) for k in keys if w.contains(k)
        )


def const_tensor(t, xcap=None, ycap=None):
    return Tensor2Series({(0, 0): dict(t)}, xcap, ycap)


# ---------------------------------------------------------------------------
# trivariate residual container


@dataclass(frozen=True)
class Tensor3Series:
    """Coefficients (i1, i2, i3) -> Tensor3 dict, stored only inside ``window``."""

    coeffs: dict
    window: Window

    def __post_init__(self):
        clean = {}
        for key, t in self.coeffs.items():
            if self.window.contains(key):
                t = {k: v for k, v in t.items() if v}
                if t:
                    clean[key] = t
        object.__setattr__(self, "coeffs", clean)

    def is_zero(self):
        return not self.coeffs

    def first_nonzero(self):
        if not self.coeffs:
            return None
        key = min(self.coeffs, key=lambda k: (sum(k), k))
        (a, b, c), v = min(self.coeffs[key].items())
        return [key[0], key[1], key[2], a, b, c, fmt(v)]

    def restrict(self, caps):
        return Tensor3Series(self.coeffs, Window(tuple(caps)))

    def report(self):
        return residual_report(self)

    def __sub__(self, other):
        out = {k: dict(v) for k, v in self.coeffs.items()}
        for key, t in other.coeffs.items():
            accumulate(out.setdefault(key, {}), t, -1)
        caps = tuple(_cap_min(a, b) for a, b in zip(self.window.caps, other.window.caps))
        return Tensor3Series(out, Window(caps))


def residual_report(res):
    return {
        "zero_on_window": res.is_zero(),
        "first_nonzero_monomial": res.first_nonzero(),
        "guaranteed_window": res.window.to_json(),
    }


# ---------------------------------------------------------------------------
# standard form r(x, y) = s(y) Omega / (x - y) + g(x, y)


@dataclass(frozen=True, eq=False)
class StandardRMatrix:
    L: lc.LieAlgebra
    s: ScalarSeries
    g: Tensor2Series

    @property
    def Nx(self):
        return self.g.xcap

    @property
    def Ny(self):
        return _cap_min(self.s.cap, self.g.ycap)

    @property
    def exact(self):
        return self.Nx is None and self.Ny is None

    def with_g(self, g):
        return StandardRMatrix(self.L, self.s, g)

    def __neg__(self):
        return StandardRMatrix(self.L, -self.s, -self.g)

    def add_tensor(self, t, sign=1):
        """r + sign * t for a Taylor tensor series t (the Yang part is unchanged)."""
        return StandardRMatrix(self.L, self.s, self.g + t.scale(sign))

    def yang_terms(self, ymax):
        """(i, j, coeff) for the pole part with y-degree j <= ymax; i < 0."""
        out = []
        for J in range(0, ymax + 1):
            for k in range(0, J + 1):
                c = self.s.coeffs.get(J - k)
                if c:
                    out.append((-k - 1, J, c))
        return out

    def terms(self, xmax, ymax):
        """All (i, j, Tensor2) with i <= xmax, j <= ymax; raises if not known there."""
        if self.Nx is not None and xmax > self.Nx or self.Ny is not None and ymax > self.Ny:
            raise WindowTooSmall(
                f"need r up to x^{xmax} y^{ymax}, window is x<={self.Nx}, y<={self.Ny}"
            )
        omega = lc.casimir(self.L)
        out = []
        for i, j, c in self.yang_terms(ymax):
            out.append((i, j, {k: v * c for k, v in omega.items()}))
        for (i, j), t in sorted(self.g.coeffs.items()):
            if i <= xmax and j <= ymax:
                out.append((i, j, t))
        return out


def base_rmatrix(L, i, decomposition=None):
    """The four base r-matrices r_0 .. r_3 (exact)."""
    omega = lc.casimir(L)
    if i == 0:
        return StandardRMatrix(L, ScalarSeries(), Tensor2Series())
    if i == 1:
        return StandardRMatrix(L, ScalarSeries.const(1), Tensor2Series())
    if i == 2:
        dj = lc.drinfeld_jimbo(L, decomposition)
        return StandardRMatrix(L, ScalarSeries.monomial(1), const_tensor(dj))
    if i == 3:
        return StandardRMatrix(L, ScalarSeries.monomial(2), Tensor2Series({(0, 1): omega}))
    from .errors import BadIndex

    raise BadIndex(f"base r-matrix index must be 0..3, got {i}")


def yang_part(L, m, Ny):
    """y^m Omega/(x - y) expanded for |y| < |x|: sum_k x^{-k-1} y^{k+m} Omega."""
    if m < 0:
        raise WindowTooSmall("m must be nonnegative")
    if Ny < m:
        raise WindowTooSmall(f"window Ny={Ny} is below the first y-degree {m}")
    omega = lc.casimir(L)
    return Tensor2Series({(-k - 1, k + m): omega for k in range(Ny - m + 1)}, None, Ny)


def yang_part_at_x(L, m, Nx):
    """y^m Omega/(x - y) expanded for |x| < |y|.

    Equals -sum_{k>=0} x^{m+k} y^{-k-1} Omega - sum_{k<m} x^k y^{m-1-k} Omega,
    exact for x-degrees <= Nx.
    """
    if m < 0 or Nx < 0:
        raise WindowTooSmall("need m >= 0 and Nx >= 0")
    omega = lc.casimir(L)
    neg = {k: -v for k, v in omega.items()}
    coeffs = {}
    for k in range(0, Nx + 1):
        coeffs[(k, m - 1 - k)] = neg
    return Tensor2Series(coeffs, Nx, None)


def divided_difference(s):
    """(s(x) - s(y)) / (x - y) as {(a, b): c}; known for a + b <= cap - 1."""
    out = {}
    for k, c in s.coeffs.items():
        for a in range(k):
            addto(out, (a, k - 1 - a), c)
    total = None if s.cap is None else s.cap - 1
    return out, total


def skew_residual(r):
    """g(x,y) + tau g(y,x) - ((s(x) - s(y))/(x - y)) Omega; zero iff r is skew."""
    g = r.g
    if r.s.coeffs and min(r.s.coeffs) < 0:
        raise WindowTooSmall("s must be Taylor")
    box = _cap_min(g.xcap, g.ycap)
    dd, total = divided_difference(r.s)
    omega = lc.casimir(r.L)
    out = {}
    for key, t in g.coeffs.items():
        accumulate(out.setdefault(key, {}), t)
    for (i, j), t in g.coeffs.items():
        accumulate(out.setdefault((j, i), {}), lc.tau(t))
    for key, c in dd.items():
        accumulate(out.setdefault(key, {}), omega, -c)
    return Tensor2Series(out, box, box, _cap_min(total, g.total))


def standard_rmatrix_from_terms(L, s_terms, g_terms, Nx=None, Ny=None, truncated=False):
    """Build from manifest-style literals.

    ``s_terms``: [[k, "p/q"], ...]; ``g_terms``: [[i, j, a, b, "p/q"], ...].
    Literal data is taken as exact polynomials unless ``truncated`` is set,
    in which case (Nx, Ny) become the windows.
    """
    s = ScalarSeries({int(k): frac(v) for k, v in s_terms}, Ny if truncated else None)
    g = {}
    for i, j, a, b, v in g_terms:
        i, j = int(i), int(j)
        if i < 0 or j < 0:
            raise WindowTooSmall("g must be Taylor in both variables")
        addto(g.setdefault((i, j), {}), (L.index(a), L.index(b)), frac(v))
    xcap, ycap = (Nx, Ny) if truncated else (None, None)
    return StandardRMatrix(L, s, Tensor2Series(g, xcap, ycap))
