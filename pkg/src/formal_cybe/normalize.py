"""Normal forms for formal r-matrices.

* multiplicity of s at 0 and the obstruction residue for m = 2,
* the coordinate change psi solving xi s(psi(y)) = y^m psi'(y),
* substitution r(x, y) -> xi r(psi(x), psi(y)) re-split into standard form,
* F[[x]]-linear gauge automorphisms phi acting as phi ⊗ phi.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import lie_core as lc
from . import linalg
from ._sparse import accumulate, addto, fmt, frac
from .errors import (
    NotAutomorphism,
    Obstructed,
    UnsupportedMultiplicity,
    WindowTooSmall,
    WrongMultiplicity,
    ZeroSeries,
)
from .series import (
    ScalarSeries,
    StandardRMatrix,
    Tensor2Series,
    _cap_min,
    compose,
    invert,
    mul,
)
from .doubles import DoubleElement


# ---------------------------------------------------------------------------
# multiplicity and obstruction


def multiplicity(s):
    """Order of vanishing of s at y = 0; only 0, 1, 2 can occur for r-matrices."""
    if not s.coeffs and s.exact:
        raise ZeroSeries("s = 0 has no multiplicity")
    m = s.valuation()
    if m < 0:
        raise WrongMultiplicity("s must be a Taylor series")
    if m >= 3:
        raise UnsupportedMultiplicity(m)
    return m


def residue_obstruction(s):
    """res_{y=0} 1/s(y) for s of multiplicity 2; equals -s_3/s_2^2."""
    if multiplicity(s) != 2:
        raise WrongMultiplicity("the obstruction residue is only defined for multiplicity 2")
    if s.cap is not None and s.cap < 3:
        raise WindowTooSmall("s must be known to degree 3")
    return invert(s.truncate(3), cap=-1).coeff(-1)


# ---------------------------------------------------------------------------
# coordinate transformations


@dataclass(frozen=True)
class CoordTransform:
    psi: ScalarSeries
    xi: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "xi", frac(self.xi))
        if not self.xi:
            raise ValueError("xi must be nonzero")
        if self.psi.coeff(0) or self.psi.coeff(1) != 1:
            raise ValueError("psi must lie in y + y^2 F[[y]]")

    def to_json(self):
        return {
            "psi": [[k, fmt(v)] for k, v in sorted(self.psi.coeffs.items())],
            "psi_cap": self.psi.cap,
            "xi": fmt(self.xi),
        }


def ode_residual(s, t, m):
    """xi s(psi(y)) - y^m psi'(y) on its guaranteed window."""
    lhs = compose(s, t.psi).scale(t.xi)
    rhs = t.psi.derivative().shift(m)
    return lhs - rhs


def solve_psi(s, m=None, window=8):
    """(xi, psi) with xi s(psi) = y^m psi' up to y^window, xi = 1/s_m.

    The coefficient of y^{m+k-1} determines psi_k through (k - m) psi_k = rest;
    for m = 2 and k = 2 the equation degenerates and rest must vanish, which
    is exactly the residue condition. psi_2 is then set to 0.
    """
    mm = multiplicity(s)
    if m is not None and m != mm:
        raise WrongMultiplicity(f"s has multiplicity {mm}, not {m}")
    m = mm
    if m == 2:
        res = residue_obstruction(s)
        if res:
            raise Obstructed(res)
    if s.cap is not None:
        window = min(window, s.cap)
    xi = 1 / s.coeff(m)
    top = window - m + 1
    psi = {1: Fraction(1)}
    for k in range(2, top + 1):
        trial = CoordTransform(ScalarSeries(psi, k), xi)
        rest = ode_residual(s, trial, m).coeff(m + k - 1)
        if k == m:
            if rest:
                raise Obstructed(rest)
            continue
        psi[k] = rest / (k - m)
    t = CoordTransform(ScalarSeries(psi, top), xi)
    return t


# ---------------------------------------------------------------------------
# bivariate scalar helpers (coefficients (a, b) -> Fraction, known for a + b <= cap)


def _biv_inverse(q, cap):
    """1/q for q(0, 0) != 0 up to total degree cap."""
    q0 = q[(0, 0)]
    out = {}
    for n in range(cap + 1):
        for a in range(n + 1):
            b = n - a
            acc = Fraction(1) if n == 0 else Fraction(0)
            for (i, j), c in q.items():
                if (i, j) == (0, 0) or i > a or j > b:
                    continue
                v = out.get((a - i, b - j))
                if v:
                    acc -= c * v
            if acc:
                out[(a, b)] = acc / q0
    return out


def _divide_diff(D, cap):
    """E with (x - y) E = D, given D(y, y) = 0: E_{a,b} = sum_{t<=b} D_{a+1+t, b-t}."""
    E = {}
    for n in range(cap):
        for a in range(n + 1):
            b = n - a
            acc = Fraction(0)
            for t in range(b + 1):
                acc += D.get((a + 1 + t, b - t), 0)
            if acc:
                E[(a, b)] = acc
    return E


def _divide_diff_tensor(D, cap):
    E = {}
    for n in range(cap):
        for a in range(n + 1):
            b = n - a
            acc = {}
            for t in range(b + 1):
                accumulate(acc, D.get((a + 1 + t, b - t), {}))
            if acc:
                E[(a, b)] = acc
    return E


def substitute_coords(r, t, window=8):
    """xi r(psi(x), psi(y)) in standard form.

    With psi(x) - psi(y) = (x - y) q(x, y), Q = 1/q and E = (Q - Q(y, y))/(x - y):
        s~ = xi s(psi(y)) / psi'(y),  g~ = xi (g(psi(x), psi(y)) + s(psi(y)) E Omega).
    The division by x - y uses the closed form of _divide_diff, which is exact
    because Q - Q(y, y) vanishes on the diagonal.
    """
    L = r.L
    psi = t.psi
    Np = _cap_min(psi.cap, window + 1)
    psi = psi.truncate(Np)
    # q(x, y) = sum_k psi_k sum_{a+b=k-1} x^a y^b, known for a + b <= Np - 1
    q = {}
    for k, c in psi.coeffs.items():
        for a in range(k):
            addto(q, (a, k - 1 - a), c)
    qcap = Np - 1
    Q = _biv_inverse(q, qcap)
    diagQ = {}
    for (a, b), c in Q.items():
        addto(diagQ, a + b, c)
    D = dict(Q)
    for n, c in diagQ.items():
        addto(D, (0, n), -c)
    E = _divide_diff(D, qcap)
    ecap = qcap - 1
    s_psi = compose(r.s, psi)
    dpsi = psi.derivative()
    s_new = mul(s_psi, invert(dpsi, cap=dpsi.cap)).scale(t.xi)
    omega = lc.casimir(L)
    g = {}
    # s(psi(y)) E(x, y) Omega
    for (a, b), e in E.items():
        for j, c in s_psi.coeffs.items():
            accumulate(g.setdefault((a, b + j), {}), omega, e * c)
    # g(psi(x), psi(y)); psi^i is known to degree Np + i - 1
    top = max((max(k) for k in r.g.coeffs), default=0)
    pw = [ScalarSeries.const(1)]
    for _ in range(top):
        pw.append(mul(pw[-1], psi))
    for (i, j), T in r.g.coeffs.items():
        for da, ca in pw[i].coeffs.items():
            for db, cb in pw[j].coeffs.items():
                accumulate(g.setdefault((da, db), {}), T, ca * cb)
    xcap = _cap_min(r.g.xcap, Np)
    ycap = _cap_min(r.g.ycap, Np, s_psi.cap, s_new.cap)
    g_new = Tensor2Series(g, xcap, ycap, _cap_min(ecap, r.g.total)).scale(t.xi)
    return StandardRMatrix(L, s_new, g_new)


# ---------------------------------------------------------------------------
# gauge automorphisms


@dataclass(frozen=True, eq=False)
class GaugeAuto:
    """phi(a) = sum_k phi_k(a) x^k; phi_k[c][a] = coefficient of I_c in phi_k(I_a).

    ``exact`` means phi_k = 0 for k beyond the list; otherwise the list is a
    truncation and phi is known to degree len(phi) - 1.
    """

    L: lc.LieAlgebra
    phi: tuple
    exact: bool = True

    @property
    def cap(self):
        return None if self.exact else len(self.phi) - 1

    def apply_vec(self, v, degree=0):
        """phi(v x^degree) as {deg: vec}."""
        out = {}
        for k, M in enumerate(self.phi):
            w = {}
            for a, c in v.items():
                for row in range(self.L.dim):
                    if M[row][a]:
                        addto(w, row, M[row][a] * c)
            if w:
                accumulate(out.setdefault(degree + k, {}), w)
        return {d: w for d, w in out.items() if w}

    def apply_series(self, f):
        out = {}
        for d, v in f.items():
            for e, w in self.apply_vec(v, d).items():
                accumulate(out.setdefault(e, {}), w)
        return {d: w for d, w in out.items() if w}

    def apply_double(self, u):
        """(phi × [phi]) u; the residue part is reduced mod x^m."""
        lau = self.apply_series(u.laurent)
        res = self.apply_series(u.residue)
        cap = u.cap
        if not self.exact:
            low = min(u.laurent, default=0)
            cap = _cap_min(cap, self.cap + low)
        return DoubleElement(lau, res, u.m, {}, cap)

    def apply_tensor(self, T, i, j):
        """(phi ⊗ phi)(T x^i y^j) as {(a, b): Tensor2}."""
        out = {}
        for (a, b), c in T.items():
            left = self.apply_vec({a: c}, i)
            right = self.apply_vec({b: Fraction(1)}, j)
            for da, va in left.items():
                for db, vb in right.items():
                    accumulate(out.setdefault((da, db), {}), lc.outer(va, vb))
        return out

    def to_json(self):
        return {"phi": [[k, [[fmt(c) for c in row] for row in M]] for k, M in enumerate(self.phi)]}


def _matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n) if A[i][k] and B[k][j]), Fraction(0)) for j in range(n)] for i in range(n)]


def check_automorphism(phi, window=None):
    """phi_0 invertible and phi_d([a, b]) = sum_{p+q=d} [phi_p a, phi_q b] for d <= window."""
    L = phi.L
    try:
        linalg.inverse([list(r) for r in phi.phi[0]])
        invertible = True
    except ZeroDivisionError:
        invertible = False
    top = len(phi.phi) - 1
    if window is None:
        window = 2 * top if phi.exact else top
    elif not phi.exact:
        window = min(window, top)
    bad = []
    for a in range(L.dim):
        for b in range(a + 1, L.dim):
            lhs = {}
            for d, v in phi.apply_series({0: lc.bracket(L, {a: Fraction(1)}, {b: Fraction(1)})}).items():
                if d <= window:
                    lhs[d] = v
            rhs = {}
            pa = phi.apply_vec({a: Fraction(1)})
            pb = phi.apply_vec({b: Fraction(1)})
            for p, u in pa.items():
                for q, v in pb.items():
                    if p + q <= window:
                        accumulate(rhs.setdefault(p + q, {}), lc.bracket(L, u, v))
            rhs = {d: v for d, v in rhs.items() if v}
            if lhs != rhs:
                bad.append([a, b])
    return {
        "passed": invertible and not bad,
        "phi0_invertible": invertible,
        "checked_up_to": window,
        "failures": bad[:10],
    }


def gauge_from_spec(L, spec):
    """{"phi": [[k, matrix rows], ...], "exact": true}."""
    terms = sorted((int(k), rows) for k, rows in spec["phi"])
    top = max(k for k, _ in terms)
    zero = [[Fraction(0)] * L.dim for _ in range(L.dim)]
    mats = [[row[:] for row in zero] for _ in range(top + 1)]
    for k, rows in terms:
        if len(rows) != L.dim or any(len(r) != L.dim for r in rows):
            raise ValueError(f"phi_{k} must be {L.dim}x{L.dim}")
        mats[k] = [[frac(c) for c in r] for r in rows]
    return GaugeAuto(L, tuple(tuple(tuple(r) for r in M) for M in mats), bool(spec.get("exact", True)))


def identity_gauge(L):
    I = tuple(tuple(Fraction(int(i == j)) for j in range(L.dim)) for i in range(L.dim))
    return GaugeAuto(L, (I,))


def exp_ad(L, X, cap=8):
    """exp(ad X) for X in x g[[x]] given as {deg: vec} with deg >= 1.

    The series sum ad(X)^k / k! terminates when ad X is nilpotent (as for
    X = x e); otherwise it is truncated at degree ``cap`` and marked inexact.
    """
    if any(d < 1 for d in X):
        raise NotAutomorphism("exp(ad X) needs X without constant term")
    n = L.dim
    adX = {d: lc.ad_matrix(L, v) for d, v in X.items()}
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    total = {0: ident}
    power = {0: ident}
    exact = True
    k = 0
    fact = Fraction(1)
    while True:
        k += 1
        fact *= k
        new = {}
        for d, M in power.items():
            for e, A in adX.items():
                if d + e > cap:
                    exact = False
                    continue
                P = _matmul(A, M)
                if any(any(row) for row in P):
                    if d + e in new:
                        new[d + e] = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(new[d + e], P)]
                    else:
                        new[d + e] = P
        new = {d: M for d, M in new.items() if any(any(r) for r in M)}
        if not new:
            break
        for d, M in new.items():
            if d in total:
                total[d] = [[x + y / fact for x, y in zip(r1, r2)] for r1, r2 in zip(total[d], M)]
            else:
                total[d] = [[y / fact for y in r] for r in M]
        power = new
    top = max(total) if exact else cap
    zero = [[Fraction(0)] * n for _ in range(n)]
    mats = tuple(tuple(tuple(r) for r in total.get(d, zero)) for d in range(top + 1))
    return GaugeAuto(L, mats, exact)


def compose_gauge(phi, psi):
    """(phi ∘ psi)_d = sum_{p+q=d} phi_p psi_q."""
    n = phi.L.dim
    top = len(phi.phi) + len(psi.phi) - 2
    mats = []
    for d in range(top + 1):
        acc = [[Fraction(0)] * n for _ in range(n)]
        for p in range(d + 1):
            q = d - p
            if p < len(phi.phi) and q < len(psi.phi):
                P = _matmul([list(r) for r in phi.phi[p]], [list(r) for r in psi.phi[q]])
                acc = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(acc, P)]
        mats.append(tuple(tuple(r) for r in acc))
    exact = phi.exact and psi.exact
    if not exact:
        mats = mats[: min(len(phi.phi), len(psi.phi))]
    return GaugeAuto(phi.L, tuple(mats), exact)


def diagonal_conjugation(L, d):
    """Constant automorphism Ad(diag(d)) of sl(n): e_ij -> (d_i/d_j) e_ij, h fixed."""
    pairs = lc.sl_index_pairs(len(d))
    if len(pairs) != L.dim:
        raise NotAutomorphism("diagonal conjugation needs the builtin sl(n) basis")
    d = [frac(v) for v in d]
    if not all(d):
        raise NotAutomorphism("diagonal entries must be nonzero")
    M = [[Fraction(0)] * L.dim for _ in range(L.dim)]
    for idx, p in enumerate(pairs):
        M[idx][idx] = Fraction(1) if p is None else d[p[0]] / d[p[1]]
    return GaugeAuto(L, (tuple(tuple(r) for r in M),))


def gauge_apply(r, phi, window=None):
    """(phi ⊗ phi) r in standard form.

    s is unchanged; g~ = (phi ⊗ phi) g + s(y) ((phi_x ⊗ phi_y) Omega - Omega)/(x - y),
    where the difference quotient is a polynomial because phi(y) ⊗ phi(y)
    fixes Omega.
    """
    report = check_automorphism(phi, window)
    if not report["passed"]:
        raise NotAutomorphism(f"phi fails the automorphism test: {report}")
    L = r.L
    omega = lc.casimir(L)
    D = phi.apply_tensor(omega, 0, 0)
    accumulate(D.setdefault((0, 0), {}), omega, -1)
    D = {k: v for k, v in D.items() if v}
    dcap = max((a + b for a, b in D), default=0) + 1
    E = _divide_diff_tensor(D, dcap)
    g = {}
    for (a, b), T in E.items():
        for j, c in r.s.coeffs.items():
            accumulate(g.setdefault((a, b + j), {}), T, c)
    for (i, j), T in r.g.coeffs.items():
        for key, V in phi.apply_tensor(T, i, j).items():
            accumulate(g.setdefault(key, {}), V)
    xcap, ycap, total = r.g.xcap, _cap_min(r.g.ycap, r.s.cap), r.g.total
    if not phi.exact:
        # the difference quotient needs D up to total degree a + b + 1
        xcap = _cap_min(xcap, phi.cap)
        ycap = _cap_min(ycap, phi.cap)
        total = _cap_min(total, phi.cap - 1)
    return StandardRMatrix(L, r.s, Tensor2Series(g, xcap, ycap, total))


def apply_W(W, phi):
    from .lagrangian import WBasis

    return WBasis(W.L, W.m, W.K, {k: phi.apply_double(e) for k, e in W.elements.items()})
