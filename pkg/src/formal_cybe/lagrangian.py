"""Lagrangian subalgebras W of the doubles g((x)) × g[x]/x^m g[x].

W_r is read off from r(x, y) = y^m Omega/(x - y) + g(x, y) by collecting the
coefficient of ``⊗ I_a y^k``: the first component from the expansion with
|y| < |x|, the second from the expansion with |x| < |y| reduced mod x^m.
With p^a_k(x) the g-part of that coefficient and I^a the Killing-dual
basis vector,

    w_{k,a} = (p^a_k(x), -I^a [x]^{m-k-1} + p^a_k([x]))    for k < m
    w_{k,a} = (I^a x^{m-k-1} + p^a_k(x), p^a_k([x]))       for k >= m

and B_{m+1}(w_{j,a}, b_{k,b}) = delta_jk delta_ab with b_{k,b} = (I_b x^k, I_b [x]^k).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import lie_core as lc
from . import linalg
from ._sparse import accumulate, fmt, frac
from .cybe import check_skew
from .doubles import DoubleElement, bracket_double, form_Bi
from .errors import (
    BadIndex,
    DegenerateDualSet,
    InfiniteRank,
    MixedDoubleKinds,
    NotNormalized,
    NotSkew,
    WindowTooSmall,
)
from .series import StandardRMatrix, Tensor2Series, _cap_min, base_rmatrix, skew_residual


@dataclass(frozen=True, eq=False)
class WBasis:
    """Elements w_{k,a} for k <= K, keyed by (k, a); ``m`` is None for A(inf)."""

    L: lc.LieAlgebra
    m: int | None
    K: int
    elements: dict = field(default_factory=dict)

    @property
    def form_index(self):
        return 0 if self.m is None else self.m + 1

    def items(self):
        return sorted(self.elements.items())

    def degree_range(self):
        lo = min((e.min_degree() for e in self.elements.values() if e.laurent), default=0)
        hi = max((max(e.laurent) for e in self.elements.values() if e.laurent), default=0)
        return min(lo, 0), max(hi, 0)

    def rows(self, lo=None, hi=None):
        dlo, dhi = self.degree_range()
        lo = dlo if lo is None else lo
        hi = dhi if hi is None else hi
        return [e.coords(self.L, lo, hi) for _, e in self.items()]

    def to_json(self):
        out = []
        for (k, a), e in self.items():
            j = e.to_json()
            out.append([k, a, j["laurent"], j["residue"]])
        return out


def _wrap(L, m, K, elements):
    return WBasis(L, m, K, dict(elements))


def _p_column(r, k):
    """p^a_k for every a: the g-part coefficient of ⊗ I_a y^k as {a: {i: vec}}."""
    out = {}
    for (i, j), t in r.g.coeffs.items():
        if j != k:
            continue
        for (b, a), c in t.items():
            accumulate(out.setdefault(a, {}).setdefault(i, {}), {b: c})
    return out


def build_W(r, K):
    """Basis of W_r for a skew r with s = y^m exactly, for k = 0..K."""
    L = r.L
    s = r.s
    if len(s.coeffs) != 1 or list(s.coeffs.values())[0] != 1 or min(s.coeffs) not in (0, 1, 2):
        raise NotNormalized(f"build_W needs s = y^m with m in 0..2, got {s!r}")
    if s.cap is not None and s.cap < max(s.coeffs):
        raise NotNormalized("s is not known far enough to fix its multiplicity")
    m = min(s.coeffs)
    if r.Ny is not None and r.Ny < K:
        raise WindowTooSmall(f"r known to y-degree {r.Ny}, need {K}")
    skew = skew_residual(r)
    if not skew.is_zero():
        raise NotSkew(f"r is not skew: {skew.first_nonzero()}")
    elements = {}
    for k in range(K + 1):
        # the column of y^k is known in x up to xcap and up to total - k
        cap = _cap_min(r.Nx, None if r.g.total is None else r.g.total - k)
        if cap is not None and cap < m - 1:
            raise WindowTooSmall(f"column y^{k} is not known to x-degree {m - 1}")
        pcol = _p_column(r, k)
        for a in range(L.dim):
            p = pcol.get(a, {})
            dual = L.dual_basis(a)
            lau = {i: dict(v) for i, v in p.items()}
            res = {i: dict(v) for i, v in p.items() if i < m}
            if k < m:
                accumulate(res.setdefault(m - k - 1, {}), dual, -1)
            else:
                accumulate(lau.setdefault(m - k - 1, {}), dual)
            elements[(k, a)] = DoubleElement(lau, res, m, {}, cap)
    return _wrap(L, m, K, elements)


def standard_W(i, L, K, decomposition=None):
    """The explicit subalgebras W_0 .. W_3 in the (k, a) frame used by build_W.

    W_0 = span a_k g in g ⊗ A(inf); W_1 = x^{-1} g[x^{-1}];
    W_2 = {(a, b) in (n+ + h + x^{-1}g[x^{-1}]) × (h + n-) : a + b in n+ + n-};
    W_3 = g[x^{-1}] × [x]g.
    """
    elements = {}
    if i == 0:
        for k in range(K + 1):
            for a in range(L.dim):
                elements[(k, a)] = DoubleElement({}, {}, None, {k: L.dual_basis(a)})
        return _wrap(L, None, K, elements)
    if i == 1:
        for k in range(K + 1):
            for a in range(L.dim):
                elements[(k, a)] = DoubleElement({-k - 1: L.dual_basis(a)}, {}, 0)
        return _wrap(L, 0, K, elements)
    if i == 2:
        decomposition = decomposition or L.triangular
        npos, cartan, nneg = (tuple(L.index(t) for t in part) for part in decomposition)
        for a in npos:
            elements[(0, a)] = DoubleElement({0: {a: 1}}, {}, 1)
        for a in nneg:
            elements[(0, a)] = DoubleElement({}, {0: {a: 1}}, 1)
        for a in cartan:
            elements[(0, a)] = DoubleElement({0: {a: 1}}, {0: {a: -1}}, 1)
        for k in range(1, K + 1):
            for a in range(L.dim):
                elements[(k, a)] = DoubleElement({-k: {a: 1}}, {}, 1)
        return _wrap(L, 1, K, elements)
    if i == 3:
        for a in range(L.dim):
            elements[(0, a)] = DoubleElement({}, {1: {a: 1}}, 2)
        for k in range(1, K + 1):
            for a in range(L.dim):
                elements[(k, a)] = DoubleElement({1 - k: {a: 1}}, {}, 2)
        return _wrap(L, 2, K, elements)
    raise BadIndex(f"standard subalgebras are indexed 0..3, got {i}")


def span_equal(W1, W2):
    """Row-space equality of the windowed coefficient matrices."""
    if W1.m != W2.m:
        raise MixedDoubleKinds("cannot compare subalgebras of different doubles")
    lo = min(W1.degree_range()[0], W2.degree_range()[0])
    hi = max(W1.degree_range()[1], W2.degree_range()[1])
    caps = [e.cap for W in (W1, W2) for e in W.elements.values() if e.cap is not None]
    if caps:
        hi = min(hi, min(caps))
    if W1.m is None:
        return linalg.same_row_space(_rows_inf(W1, hi), _rows_inf(W2, hi))
    return linalg.same_row_space(W1.rows(lo, hi), W2.rows(lo, hi))


def _rows_inf(W, hi):
    K = W.K
    rows = []
    for _, e in W.items():
        row = []
        for d in range(hi + 1):
            v = e.laurent.get(d, {})
            row.extend(v.get(a, Fraction(0)) for a in range(W.L.dim))
        for d in range(K + 1):
            v = e.adual.get(d, {})
            row.extend(v.get(a, Fraction(0)) for a in range(W.L.dim))
        rows.append(row)
    return rows


def diagonal(L, m, k, a):
    if m is None:
        return DoubleElement({k: {a: 1}}, {}, None)
    return DoubleElement.diag(L, a, k, m)


# ---------------------------------------------------------------------------
# checks


def check_duality(W):
    L, i = W.L, W.form_index
    bad = []
    for (j, a), w in W.items():
        for k in range(W.K + 1):
            for b in range(L.dim):
                val = form_Bi(L, i, w, diagonal(L, W.m, k, b))
                want = 1 if (j, a) == (k, b) else 0
                if val != want:
                    bad.append([j, a, k, b, fmt(val)])
    return {"passed": not bad, "checked_up_to": W.K, "failures": bad[:10], "n_failures": len(bad)}


def check_isotropy(W):
    L, i = W.L, W.form_index
    items = W.items()
    bad = []
    for p in range(len(items)):
        for q in range(p, len(items)):
            val = form_Bi(L, i, items[p][1], items[q][1])
            if val:
                bad.append([list(items[p][0]), list(items[q][0]), fmt(val)])
    return {"passed": not bad, "checked_up_to": W.K, "failures": bad[:10], "n_failures": len(bad)}


def decompose(W, u):
    """Coefficients c_{l,b} = B(u, b_{l,b}) and the remainder u - sum c w.

    Raises WindowTooSmall when u pairs with b_{l,b} for some l > K.
    """
    L, i = W.L, W.form_index
    lowest = min(u.laurent, default=0)
    top = (W.m - 1 if W.m is not None else 0) - lowest
    if W.m is None:
        top = max(u.adual, default=-1)
    if top > W.K:
        raise WindowTooSmall(f"element needs w_l for l up to {top}, basis stops at {W.K}")
    rem = u
    coeffs = {}
    for l in range(0, max(top, -1) + 1):
        for b in range(L.dim):
            c = form_Bi(L, i, u, diagonal(L, W.m, l, b))
            if c:
                coeffs[(l, b)] = c
                rem = rem - W.elements[(l, b)].scale(c)
    return coeffs, rem


def check_subalgebra(W):
    """Each bracket [w, w'] must re-expand in the W-basis.

    For W complementary to the diagonal, u lies in W iff u - sum B(u, b) w = 0.
    Pairs whose bracket needs basis elements beyond K are "out_of_window".
    """
    L = W.L
    items = W.items()
    verified = violated = out = 0
    bad = []
    for p in range(len(items)):
        for q in range(p + 1, len(items)):
            u = bracket_double(L, items[p][1], items[q][1])
            try:
                _, rem = decompose(W, u)
            except WindowTooSmall:
                out += 1
                continue
            if _visible(rem):
                violated += 1
                bad.append([list(items[p][0]), list(items[q][0])])
            else:
                verified += 1
    return {
        "passed": violated == 0,
        "verified": verified,
        "violated": violated,
        "out_of_window": out,
        "failures": bad[:10],
    }


def _visible(e):
    if e.cap is None:
        return not e.is_zero()
    return bool(e.residue or e.adual or any(k <= e.cap for k in e.laurent))


def complementarity(W):
    """W_K together with the diagonal b_{k,a} (k <= top degree) must be a basis
    of the coordinate window [m-1-K, top] ⊕ residues."""
    L, m = W.L, W.m
    if m is None:
        raise MixedDoubleKinds("complementarity is implemented for g((x)) × g[x]/x^m")
    lo, hi = W.degree_range()
    lo = min(lo, m - 1 - W.K)
    hi = max(hi, m - 1)
    rows = W.rows(lo, hi)
    for k in range(0, hi + 1):
        for a in range(L.dim):
            rows.append(DoubleElement.diag(L, a, k, m).coords(L, lo, hi))
    ncols = len(rows[0])
    rk = linalg.rank(rows)
    return {
        "trivial_intersection": rk == len(rows),
        "spans_window": rk == ncols,
        "passed": rk == len(rows) == ncols,
        "rank": rk,
        "shape": [len(rows), ncols],
    }


def projection_report(W):
    """Window shadow of g((x)) = g[[x]] + W_+ and of g[[x]] ∩ W_+ != 0."""
    L = W.L
    lo, hi = W.degree_range()
    full = [e.coords(L, lo, hi)[: (hi - lo + 1) * L.dim] for _, e in W.items()]
    neg_cols = (-lo) * L.dim
    neg = [row[:neg_cols] for row in full]
    rk_full = linalg.rank(full)
    rk_neg = linalg.rank(neg) if neg_cols else 0
    return {
        "negative_degrees_covered": rk_neg == neg_cols,
        "covered_down_to": lo,
        "taylor_part_in_W_plus": rk_full - rk_neg,
    }


# ---------------------------------------------------------------------------
# twists and T-maps


@dataclass(frozen=True, eq=False)
class LinearMapT:
    """T on the basis w^{(i)}_{k,a} of W_i: images[(k, a)] = {deg: vec} in g[[x]].

    ``complete`` means T is known to vanish on every w_{k,a} with k > K.
    """

    L: lc.LieAlgebra
    base: int
    K: int
    images: dict
    complete: bool = True

    def apply(self, coords):
        """T(sum c_{k,a} w_{k,a}) for coordinates {(k, a): c}."""
        out = {}
        for key, c in coords.items():
            img = self.images.get(key)
            if img is None:
                if key[0] > self.K and not self.complete:
                    raise InfiniteRank(f"T unknown on w_{key}")
                continue
            for d, v in img.items():
                accumulate(out.setdefault(d, {}), v, c)
        return {d: v for d, v in out.items() if v}


def twist_to_T(s, base, L, K=None, decomposition=None):
    """T(w_{k,a}) = s_{k,a}(x), the coefficient of ⊗ I_a y^k in s."""
    if s.x_min < 0 or any(j < 0 for _, j in s.coeffs):
        raise NotSkew("twist must be Taylor")
    check_skew(s)
    top = max((j for _, j in s.coeffs), default=0)
    if K is None:
        K = top
    images = {}
    for (i, j), t in s.coeffs.items():
        if j > K:
            continue
        for (b, a), c in t.items():
            accumulate(images.setdefault((j, a), {}).setdefault(i, {}), {b: c})
    images = {k: {d: v for d, v in img.items() if v} for k, img in images.items()}
    images = {k: v for k, v in images.items() if v}
    complete = s.ycap is None and top <= K and s.xcap is None
    return LinearMapT(L, base, K, images, complete)


def associated_W(T, decomposition=None):
    """W = {Tw - w}: basis Delta(T w_{k,a}) - w_{k,a}."""
    L = T.L
    Wi = build_W(base_rmatrix(L, T.base, decomposition), T.K)
    m = Wi.m
    elements = {}
    for key, w in Wi.items():
        img = T.images.get(key, {})
        delta = DoubleElement(img, {d: v for d, v in img.items() if m and d < m}, m)
        elements[key] = delta - w
    return _wrap(L, m, T.K, elements)


def pairing_coords(img, coords):
    """B(Delta(f), sum c w) = sum_{l,b} f_{l,b} c_{l,b} by duality."""
    s = Fraction(0)
    for (l, b), c in coords.items():
        s += img.get(l, {}).get(b, Fraction(0)) * c
    return s


def check_T_skew(T):
    """B(T w, w') + B(w, T w') = 0 on all listed basis pairs."""
    allkeys = sorted({(k, a) for k in range(T.K + 1) for a in range(T.L.dim)})
    bad = []
    for p in allkeys:
        for q in allkeys:
            if q < p:
                continue
            u = pairing_coords(T.images.get(p, {}), {q: 1})
            v = pairing_coords(T.images.get(q, {}), {p: 1})
            if u + v:
                bad.append([list(p), list(q)])
    return bad


def T_to_twist(T):
    """s = -sum_i Tp_i ⊗ Tv_i with {v_i} the dual set built degree by degree."""
    if not T.complete:
        raise InfiniteRank("T is only known on a window; its image may be infinite")
    bad = check_T_skew(T)
    if bad:
        raise NotSkew(f"T is not skew for the double's form at basis pairs {bad[:3]}")
    L = T.L
    if not T.images:
        return Tensor2Series({})
    hi = max(max(img) for img in T.images.values())
    cols = [(d, b) for d in range(hi + 1) for b in range(L.dim)]
    rows = []
    for key in sorted(T.images):
        img = T.images[key]
        rows.append([img.get(d, {}).get(b, Fraction(0)) for d, b in cols])
    red, piv = linalg.rref(rows)
    basis = []  # (Tp as {deg: vec}, pivot column)
    for row, pc in zip(red, piv):
        img = {}
        for (d, b), c in zip(cols, row):
            if c:
                img.setdefault(d, {})[b] = c
        basis.append((img, cols[pc]))
    # dual set: v'_i = w at the pivot coordinate of Tp_i
    vs = []
    for idx, (img, pc) in enumerate(basis):
        vprime = {pc: Fraction(1)}
        v = dict(vprime)
        for k in range(idx):
            # only images with smaller minimal degree pair with v'_i
            if basis[k][1][0] < pc[0]:
                c = pairing_coords(basis[k][0], vprime)
                if c:
                    for key, x in vs[k].items():
                        v[key] = v.get(key, Fraction(0)) - c * x
        v = {k: x for k, x in v.items() if x}
        vs.append(v)
    # the recursion must produce an exactly dual set
    for i, (img, _) in enumerate(basis):
        for j, v in enumerate(vs):
            if pairing_coords(img, v) != (1 if i == j else 0):
                raise DegenerateDualSet(f"dual set fails at ({i}, {j})")
    out = {}
    for (img, _), v in zip(basis, vs):
        tv = T.apply(v)
        for i, a in img.items():
            for j, b in tv.items():
                t = out.setdefault((i, j), {})
                for p, x in a.items():
                    for q, y in b.items():
                        t[(p, q)] = t.get((p, q), Fraction(0)) - x * y
    return Tensor2Series(out)


# ---------------------------------------------------------------------------
# commensurability


def _filtered_dim(rows, ncols_neg, D, dim):
    """dim of span(rows) ∩ {pole order <= D}: rows are ordered most negative first."""
    red, piv = linalg.rref(rows)
    cut = ncols_neg - D * dim
    return [r for r, p in zip(red, piv) if p >= cut]


def commensurability(W, i, window=None, decomposition=None):
    """Sequence of dim (A_D + B_D)/(A_D ∩ B_D) for A = W, B = W_i, D = 0..D_max.

    A_D is the part of W with pole order <= D. A constant tail signals
    commensurability on the window; a growing tail is reported as
    "not stabilized within window", never as a proof of infiniteness.
    """
    L = W.L
    Wi = standard_W(i, L, W.K, decomposition)
    if Wi.m != W.m:
        raise MixedDoubleKinds("W and W_i live in different doubles")
    m = W.m if W.m is not None else 0
    Dmax = W.K - m + 1 if window is None else min(window, W.K - m + 1)
    lo = min(W.degree_range()[0], Wi.degree_range()[0], -Dmax)
    hi = max(W.degree_range()[1], Wi.degree_range()[1])
    if W.m is None:
        raise MixedDoubleKinds("commensurability is implemented for g((x)) × g[x]/x^m")
    A = W.rows(lo, hi)
    B = Wi.rows(lo, hi)
    neg = (-lo) * L.dim
    quotients, defects = [], []
    for D in range(0, Dmax + 1):
        a = _filtered_dim(A, neg, D, L.dim)
        b = _filtered_dim(B, neg, D, L.dim)
        da, db = len(a), len(b)
        dsum = linalg.rank(a + b) if a or b else 0
        dint = da + db - dsum
        quotients.append(dsum - dint)
        defects.append(da - dint)
    tail = quotients[-3:]
    stable = len(tail) >= 2 and len(set(tail)) == 1
    return {
        "dim_sum_quotient": quotients[-1],
        "dim_intersection_defect": defects[-1],
        "quotient_by_level": quotients,
        "defect_by_level": defects,
        "stabilized": stable,
        "verdict": "finite on window" if stable else "not stabilized within window",
    }
