"""Independent reference computations used by the tests.

Nothing here calls the library's bracket, Casimir or series code. sl(n) is
realized in its defining representation V; the Killing-normalized Casimir
acts on V⊗V as (P - I/n)/(2n), P the flip. Series are handled by sympy.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import sympy as sp

x, y, x1, x2, x3, t = sp.symbols("x y x1 x2 x3 t")


# ---------------------------------------------------------------------------
# defining representation


def unit(n, i, j):
    M = sp.zeros(n, n)
    M[i, j] = 1
    return M


def rep(n, label):
    """Matrix of a basis label: e_ij, h_i, or e/h/f for sl(2)."""
    if n == 2 and label in ("e", "h", "f"):
        label = {"e": "e12", "h": "h1", "f": "e21"}[label]
    if label[0] == "h":
        i = int(label[1:]) - 1
        return unit(n, i, i) - unit(n, i + 1, i + 1)
    i, j = int(label[1]) - 1, int(label[2]) - 1
    return unit(n, i, j)


def kron(*mats):
    out = mats[0]
    for M in mats[1:]:
        out = sp.kronecker_product(out, M)
    return out


def flip(n):
    P = sp.zeros(n * n, n * n)
    for i in range(n):
        for j in range(n):
            P[i * n + j, j * n + i] = 1
    return P


def omega(n):
    return (flip(n) - sp.eye(n * n) / n) / (2 * n)


def r_dj(n):
    """sum_{i<j} E_ij ⊗ E_ji / 2n + half the Cartan part of Omega."""
    up = sp.zeros(n * n, n * n)
    for i in range(n):
        for j in range(i + 1, n):
            up += kron(unit(n, i, j), unit(n, j, i))
    cart = sp.zeros(n * n, n * n)
    for i in range(n):
        cart += kron(unit(n, i, i), unit(n, i, i))
    cart -= sp.eye(n * n) / n
    return (up + cart / 2) / (2 * n)


def tensor_matrix(n, labels, T):
    """Sum of c * rho(a) ⊗ rho(b) over a sparse Tensor2 {(a, b): c}."""
    M = sp.zeros(n * n, n * n)
    for (a, b), c in T.items():
        M += sp.Rational(c.numerator, c.denominator) * kron(rep(n, labels[a]), rep(n, labels[b]))
    return M


# ---------------------------------------------------------------------------
# r-matrices as polynomial numerators: r = A(x, y) / (x - y)


def base_numerator(n, i):
    W = omega(n)
    if i == 1:
        return W
    if i == 2:
        return y * W + (x - y) * r_dj(n)
    if i == 3:
        return y**2 * W + (x - y) * y * W
    raise ValueError(i)


def numerator_from(r, n):
    """A(x, y) = s(y) Omega + (x - y) g(x, y) for a library StandardRMatrix (exact)."""
    labels = r.L.labels
    s = sum(sp.Rational(c.numerator, c.denominator) * y**k for k, c in r.s.coeffs.items())
    A = s * omega(n)
    for (i, j), T in r.g.coeffs.items():
        A += (x - y) * x**i * y**j * tensor_matrix(n, labels, T)
    return A.applyfunc(sp.expand)


def skew_numerator(n, labels, s):
    """(x - y) s(x, y) for a Taylor tensor series s given as {(i, j): Tensor2}."""
    A = sp.zeros(n * n, n * n)
    for (i, j), T in s.items():
        A += (x - y) * x**i * y**j * tensor_matrix(n, labels, T)
    return A


def _embed(n, M, which):
    """M in End(V⊗V) placed at slots (1,2), (1,3) or (2,3) of V⊗V⊗V."""
    I = sp.eye(n)
    if which == "12":
        return kron(M, I)
    P23 = kron(I, flip(n))
    if which == "13":
        return P23 * kron(M, I) * P23
    return kron(I, M)


def cyb_numerator(n, A):
    """CYB(r) * (x1-x2)(x1-x3)(x2-x3) as a polynomial matrix in x1, x2, x3."""
    A12 = _embed(n, A.subs({x: x1, y: x2}, simultaneous=True), "12")
    A13 = _embed(n, A.subs({x: x1, y: x3}, simultaneous=True), "13")
    A23 = _embed(n, A.subs({x: x2, y: x3}, simultaneous=True), "23")

    def br(P, Q):
        return P * Q - Q * P

    N = (x2 - x3) * br(A12, A13) + (x1 - x3) * br(A12, A23) + (x1 - x2) * br(A13, A23)
    return N.applyfunc(sp.expand)


def cyb_is_zero(n, A):
    return cyb_numerator(n, A).is_zero_matrix


def cyb_coefficients(n, A, W):
    """Coefficients of CYB(r) expanded for |x3| < |x2| < |x1|, all degrees <= W.

    Returns {(i1, i2, i3): sympy matrix} with zero matrices dropped.
    1/((x1-x2)(x1-x3)(x2-x3)) = sum x2^a x1^{-a-1} x3^b x1^{-b-1} x3^c x2^{-c-1}.
    """
    N = cyb_numerator(n, A)
    dim = N.shape[0]
    out = {}
    for r_, c_ in itertools.product(range(dim), repeat=2):
        e = N[r_, c_]
        if e == 0:
            continue
        for (p1, p2, p3), coeff in sp.Poly(e, x1, x2, x3).terms():
            for a in range(2 * W + 2):
                for b in range(W + 1):
                    for c in range(W + 1):
                        key = (p1 - a - b - 2, p2 + a - c - 1, p3 + b + c)
                        if max(key) > W:
                            continue
                        M = out.setdefault(key, sp.zeros(dim, dim))
                        M[r_, c_] += coeff
    return {k: M for k, M in out.items() if not M.is_zero_matrix}


def library_cyb_matrices(res, n, labels):
    """Library Tensor3Series residual pushed into End(V⊗V⊗V)."""
    out = {}
    for key, T in res.coeffs.items():
        M = sp.zeros(n**3, n**3)
        for (a, b, c), v in T.items():
            M += sp.Rational(v.numerator, v.denominator) * kron(
                rep(n, labels[a]), rep(n, labels[b]), rep(n, labels[c])
            )
        if not M.is_zero_matrix:
            out[key] = M
    return out


# ---------------------------------------------------------------------------
# scalar series


def to_sympy(f, var=y):
    return sum((sp.Rational(c.numerator, c.denominator) * var**k for k, c in f.coeffs.items()), sp.Integer(0))


def series_coeffs(expr, upto, var=y):
    """{k: Fraction} of the Laurent expansion of expr at 0 through degree upto."""
    ser = sp.series(expr, var, 0, upto + 1).removeO()
    ser = sp.expand(ser)
    out = {}
    for term in sp.Add.make_args(ser):
        c, k = term.as_coeff_exponent(var)
        if c != 0 and k <= upto:
            out[int(k)] = Fraction(int(sp.numer(c)), int(sp.denom(c)))
    return out


def residue_of_inverse(f):
    return sp.residue(1 / to_sympy(f), y, 0)


def trace_of_power(u_expr, k, n, alpha, var=x):
    """t(u^k) = sum_{i <= n-2} alpha_i [x^i] u^k + [x^{n-1}] u^k."""
    c = series_coeffs(u_expr**k, n - 1, var)
    total = Fraction(0)
    for i, v in c.items():
        if i == n - 1:
            total += v
        elif i <= n - 2:
            total += v * Fraction(alpha.get(i, 0))
    return total
