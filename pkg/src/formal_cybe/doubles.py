"""Trace extensions of F[[x]] and the doubles g ⊗ A built from them.

A(n, alpha) = F((x)) ⊕ F[x]/x^n with F[[x]] embedded as f -> (f, [f]), and
A(inf) = F[[x]] + span(a_0, a_1, ...). The Lie algebras used downstream are
g((x)) × g[x]/x^m g[x] (m = 0, 1, 2) and g ⊗ A(inf), with invariant form
B(u, v) = t(kappa(u, v)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import lie_core as lc
from . import linalg
from ._sparse import accumulate, addto, fmt, frac
from .errors import MixedDoubleKinds, WindowTooSmall
from .series import ScalarSeries, _cap_min, invert, mul, power


# ---------------------------------------------------------------------------
# trace extensions


@dataclass(frozen=True)
class TraceExtension:
    """A(n, alpha) when ``n`` is an int, A(inf) when ``n`` is None.

    ``alpha`` holds alpha_i for i <= n - 2; indices below ``floor`` are
    unknown. ``top`` and ``residue_top`` are t(x^{n-1}) and t([x]^{n-1});
    they are 1 and -1 for a genuine trace extension and only differ when a
    deliberately broken functional is being examined.
    """

    n: int | None
    alpha: dict = field(default_factory=dict)
    floor: int | None = None
    top: Fraction = Fraction(1)
    residue_top: Fraction = Fraction(-1)

    def __post_init__(self):
        object.__setattr__(self, "alpha", {int(k): frac(v) for k, v in self.alpha.items() if frac(v)})
        object.__setattr__(self, "top", frac(self.top))
        object.__setattr__(self, "residue_top", frac(self.residue_top))
        if self.n is not None:
            bad = [i for i in self.alpha if i > self.n - 2]
            if bad:
                raise ValueError(f"alpha indices must be <= n-2, got {bad}")

    @property
    def infinite(self):
        return self.n is None

    def t_x(self, i):
        """t(x^i) for the Laurent component."""
        if self.n is None:
            return Fraction(0) if i >= 0 else _unknown(i)
        if i >= self.n:
            return Fraction(0)
        if i == self.n - 1:
            return self.top
        if self.floor is not None and i < self.floor:
            raise WindowTooSmall(f"alpha_{i} is below the known window (floor {self.floor})")
        return self.alpha.get(i, Fraction(0))

    def t_res(self, i):
        """t([x]^i) for 0 <= i < n."""
        if i == self.n - 1:
            return self.residue_top
        return -self.alpha.get(i, Fraction(0))

    def t_a(self, i):
        return Fraction(1) if i == 0 else Fraction(0)

    def trace(self, laurent=None, residue=None, adual=None):
        """Trace of an element given by its scalar components."""
        s = Fraction(0)
        for i, c in (laurent or {}).items():
            s += c * self.t_x(i)
        for i, c in (residue or {}).items():
            if self.n is None or not 0 <= i < self.n:
                raise MixedDoubleKinds(f"residue degree {i} does not exist in this extension")
            s += c * self.t_res(i)
        for i, c in (adual or {}).items():
            if self.n is not None:
                raise MixedDoubleKinds("a_i components only exist in A(inf)")
            s += c * self.t_a(i)
        return s

    def trace_series(self, f):
        """t applied to a Laurent series placed in the first component."""
        s = Fraction(0)
        top = self.n - 1 if self.n is not None else -1
        for i, c in f.coeffs.items():
            if i <= top:
                s += c * self.t_x(i)
        if f.cap is not None and f.cap < top:
            raise WindowTooSmall(f"series known to degree {f.cap}, trace needs degree {top}")
        return s

    def to_json(self):
        if self.n is None:
            return {"infinite": True}
        return {
            "n": self.n,
            "alpha": [[k, fmt(v)] for k, v in sorted(self.alpha.items())],
            "floor": self.floor,
        }


def _unknown(i):
    raise ValueError(f"x^{i} is not an element of A(inf)")


def trace_extension_from_spec(spec):
    if spec.get("infinite"):
        return TraceExtension(None)
    n = int(spec["n"])
    alpha = {int(k): frac(v) for k, v in spec.get("alpha", [])}
    K = spec.get("K")
    floor = None if K is None else -int(K)
    return TraceExtension(n, alpha, floor)


def trace(A, elt):
    """Trace of a scalar element (laurent, residue) or (taylor, a-part)."""
    if isinstance(elt, tuple):
        if A.infinite:
            return A.trace(laurent=elt[0], adual=elt[1] if len(elt) > 1 else None)
        return A.trace(laurent=elt[0], residue=elt[1] if len(elt) > 1 else None)
    if isinstance(elt, ScalarSeries):
        return A.trace_series(elt)
    return A.trace(laurent=elt)


def standard_extension(m):
    """A(m, 0) for m >= 0, or A(inf) for m = None."""
    return TraceExtension(m)


# ---------------------------------------------------------------------------
# elements of the doubles


@dataclass(frozen=True)
class DoubleElement:
    """(f1, [f2]) in g((x)) × g[x]/x^m, or f + sum a_i ⊗ A_i in g ⊗ A(inf).

    ``laurent`` and ``residue`` map degrees to sparse g-vectors; ``adual``
    maps i to the g-coefficient of a_i (A(inf) only, m is None). The
    Laurent part is known up to degree ``cap``.
    """

    laurent: dict = field(default_factory=dict)
    residue: dict = field(default_factory=dict)
    m: int | None = 0
    adual: dict = field(default_factory=dict)
    cap: int | None = None

    def __post_init__(self):
        def clean(d):
            out = {}
            for k, v in d.items():
                v = {a: frac(c) for a, c in v.items() if c}
                if v:
                    out[int(k)] = v
            return out

        lau = clean(self.laurent)
        if self.cap is not None:
            lau = {k: v for k, v in lau.items() if k <= self.cap}
        res = clean(self.residue)
        if self.m is not None:
            res = {k: v for k, v in res.items() if 0 <= k < self.m}
        elif res:
            raise MixedDoubleKinds("A(inf) elements have no residue component")
        ad = clean(self.adual)
        if ad and self.m is not None:
            raise MixedDoubleKinds("a_i components only exist for A(inf)")
        object.__setattr__(self, "laurent", lau)
        object.__setattr__(self, "residue", res)
        object.__setattr__(self, "adual", ad)

    @classmethod
    def diag(cls, L, a, k, m):
        """b_{k,a} = (I_a x^k, I_a [x]^k), the image of I_a x^k in the double."""
        v = {L.index(a): Fraction(1)}
        return cls({k: v}, {k: v} if m else {}, m)

    def __add__(self, other):
        _same_kind(self, other)
        return DoubleElement(
            _vadd(self.laurent, other.laurent),
            _vadd(self.residue, other.residue),
            self.m,
            _vadd(self.adual, other.adual),
            _cap_min(self.cap, other.cap),
        )

    def scale(self, c):
        c = frac(c)
        sc = lambda d: {k: {a: x * c for a, x in v.items()} for k, v in d.items()}  # noqa: E731
        return DoubleElement(sc(self.laurent), sc(self.residue), self.m, sc(self.adual), self.cap)

    def __sub__(self, other):
        return self + other.scale(-1)

    def is_zero(self):
        return not (self.laurent or self.residue or self.adual)

    def min_degree(self):
        return min(self.laurent, default=0)

    def coords(self, L, lo, hi):
        """Coordinate row: Laurent part on degrees lo..hi, then the residue block."""
        if self.cap is not None and hi > self.cap:
            raise WindowTooSmall(f"element known to degree {self.cap}, need {hi}")
        row = []
        for d in range(lo, hi + 1):
            v = self.laurent.get(d, {})
            row.extend(v.get(a, Fraction(0)) for a in range(L.dim))
        if self.m:
            for d in range(self.m):
                v = self.residue.get(d, {})
                row.extend(v.get(a, Fraction(0)) for a in range(L.dim))
        if self.m is None:
            raise MixedDoubleKinds("use coords_inf for A(inf) elements")
        return row

    def to_json(self, L=None):
        def terms(d):
            return [[k, a, fmt(c)] for k, v in sorted(d.items()) for a, c in sorted(v.items())]

        out = {"laurent": terms(self.laurent), "residue": terms(self.residue)}
        if self.m is None:
            out["a"] = terms(self.adual)
        return out


def _vadd(a, b):
    out = {k: dict(v) for k, v in a.items()}
    for k, v in b.items():
        accumulate(out.setdefault(k, {}), v)
    return {k: v for k, v in out.items() if v}


def _same_kind(u, v):
    if u.m != v.m:
        raise MixedDoubleKinds(f"cannot combine elements of doubles with m={u.m} and m={v.m}")


def bracket_double(L, u, v):
    """Componentwise bracket; the residue part is reduced mod x^m."""
    _same_kind(u, v)
    lau = {}
    for i, a in u.laurent.items():
        for j, b in v.laurent.items():
            accumulate(lau.setdefault(i + j, {}), lc.bracket(L, a, b))
    cap = _cap_min(
        None if u.cap is None else u.cap + v.min_degree(),
        None if v.cap is None else v.cap + u.min_degree(),
    )
    res, ad = {}, {}
    if u.m:
        for i, a in u.residue.items():
            for j, b in v.residue.items():
                if i + j < u.m:
                    accumulate(res.setdefault(i + j, {}), lc.bracket(L, a, b))
    if u.m is None:
        # [f x^j, A a_i] = [f, A] a_{i-j}
        for i, a in u.adual.items():
            for j, b in v.laurent.items():
                if i >= j:
                    accumulate(ad.setdefault(i - j, {}), lc.bracket(L, a, b))
        for i, a in u.laurent.items():
            for j, b in v.adual.items():
                if j >= i:
                    accumulate(ad.setdefault(j - i, {}), lc.bracket(L, a, b))
    return DoubleElement(lau, res, u.m, ad, cap)


def kappa_product(L, u, v):
    """kappa(u, v) as scalar components (laurent, residue, adual)."""
    _same_kind(u, v)
    lau, res, ad = {}, {}, {}
    for i, a in u.laurent.items():
        for j, b in v.laurent.items():
            addto(lau, i + j, lc.killing_form(L, a, b))
    if u.m:
        for i, a in u.residue.items():
            for j, b in v.residue.items():
                if i + j < u.m:
                    addto(res, i + j, lc.killing_form(L, a, b))
    if u.m is None:
        for i, a in u.adual.items():
            for j, b in v.laurent.items():
                if i >= j:
                    addto(ad, i - j, lc.killing_form(L, a, b))
        for i, a in u.laurent.items():
            for j, b in v.adual.items():
                if j >= i:
                    addto(ad, j - i, lc.killing_form(L, a, b))
    return lau, res, ad


def form(L, A, u, v):
    """B(u, v) = t(kappa(u, v))."""
    lau, res, ad = kappa_product(L, u, v)
    top = A.n - 1 if A.n is not None else -1
    for w, other in ((u, v), (v, u)):
        if w.cap is not None and other.laurent:
            if w.cap + min(other.laurent) < top:
                raise WindowTooSmall("operands are not known far enough for the residue")
    if A.infinite:
        return A.trace(laurent=lau, adual=ad)
    return A.trace(laurent=lau, residue=res)


def form_Bi(L, i, u, v):
    """B_i = K_i - K_i on g((x)) × g[x]/x^{i-1}; B_0 is the A(inf) form."""
    m = None if i == 0 else i - 1
    if u.m != m or v.m != m:
        raise MixedDoubleKinds(f"B_{i} needs elements of the double with m={m}")
    return form(L, standard_extension(m), u, v)


# ---------------------------------------------------------------------------
# Manin pair checks


def manin_pair_report(A, window):
    """Finite Gram-matrix checks that F[[x]] is its own t-orthogonal.

    Rows are x^0 .. x^{K+n-1} of the embedded F[[x]], columns are the
    complement (x^{-k}, 0) for k = 1..K and (0, [x]^j) for j < n (for
    A(inf): a_0 .. a_K).
    """
    K = window
    if A.infinite:
        rows = list(range(K + 1))
        cols = [("a", i) for i in range(K + 1)]

        def pair(r, c):
            return A.t_a(c[1] - r) if c[1] >= r else Fraction(0)

        iso = all(A.t_x(a) == 0 for a in rows)
    else:
        n = A.n
        rows = list(range(K + n))
        cols = [("x", -k) for k in range(1, K + 1)] + [("r", j) for j in range(n)]

        def pair(r, c):
            if c[0] == "x":
                return A.t_x(r + c[1])
            d = r + c[1]
            return A.t_res(d) if d < n else Fraction(0)

        iso = True
        for a in range(K + n):
            # t(x^a embedded) = t(x^a) + t([x]^a)
            val = A.t_x(a) + (A.t_res(a) if a < n else 0)
            if val:
                iso = False
    gram = [[pair(r, c) for c in cols] for r in rows]
    rk = linalg.rank(gram)
    report = {
        "window": K,
        "isotropic": bool(iso),
        "representable": rk == len(rows),
        "perp_trivial": rk == len(cols),
        "nondegenerate": rk == len(rows) == len(cols),
        "gram_rank": rk,
        "gram_shape": [len(rows), len(cols)],
    }
    report["passed"] = all(report[k] for k in ("isotropic", "representable", "perp_trivial", "nondegenerate"))
    return report


# ---------------------------------------------------------------------------
# normalization of A(n, alpha)


def _trace_power(A, u, k, cap):
    return A.trace_series(power(u, k, cap))


def normalize_trace_extension(n, alpha, K):
    """Find u = x(1 + u_1 x + ...) with t(u^k) = 0 for k in [-K, K] minus {0, n-1}.

    The recursion is sequential: u_1 .. u_{n-2} kill t(u^{n-2}), .., t(u),
    u_{n-1} is the free parameter (set to 0), then v = 1/u has its
    coefficients v_{n-1+k} chosen to kill t(v^k) for k = 1..K.
    Returns (u, report); u is exact up to the degree stated in its cap.
    """
    alpha = {int(k): frac(v) for k, v in dict(alpha).items()}
    A = TraceExtension(n, alpha, floor=-K)
    x = ScalarSeries({1: Fraction(1)})
    if n <= 2:
        report = _normalization_report(A, x.truncate(n + K), K)
        report["delegated"] = True
        report["note"] = "n <= 2: identity transformation returned, alpha not normalized"
        return x.truncate(n + K), report
    # relative coefficients: u = x * (1 + sum_k rel[k] x^k)
    rel = {0: Fraction(1)}
    for k in range(1, n - 1):
        e = n - k - 1
        u = ScalarSeries({d + 1: c for d, c in rel.items()}, n - 1)
        rest = _trace_power(A, u, e, n - 1)
        rel[k] = -rest / e
    rel[n - 1] = Fraction(0)
    # v = 1/u = x^{-1} (1 + sum_j w_j x^j), w_j known for j <= n - 1
    rel_series = ScalarSeries(rel, n - 1)
    w = invert(rel_series).coeffs  # relative inverse, known to degree n - 1
    w = {j: c for j, c in w.items() if j <= n - 1}
    for k in range(1, K + 1):
        j_new = n - 1 + k
        # w_{j_new} sits in degree j_new - 1 and is provisionally zero
        v = ScalarSeries({d - 1: c for d, c in w.items()}, j_new - 1)
        rest = _trace_power(A, v, k, n - 1)
        w[j_new] = -rest / k
    v = ScalarSeries({d - 1: c for d, c in w.items() if c}, n - 2 + K)
    u = invert(v)
    report = _normalization_report(A, u, K)
    report["delegated"] = False
    return u, report


def _normalization_report(A, u, K):
    n = A.n
    bad = []
    for k in range(-K, K + 1):
        if k == 0:
            continue
        val = A.trace_series(power(u, k, n - 1))
        want = Fraction(1) if k == n - 1 else Fraction(0)
        if val != want:
            bad.append([k, fmt(val)])
    return {
        "n": n,
        "K": K,
        "u": [[k, fmt(c)] for k, c in sorted(u.coeffs.items())],
        "u_cap": u.cap,
        "beta0": fmt(A.t_x(0)) if n >= 2 else None,
        "violations": bad,
        "normalized": not bad,
    }
