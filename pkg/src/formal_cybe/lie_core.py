"""Finite-dimensional simple Lie algebras over Q given by structure constants.

Elements of g are sparse dicts ``{basis_index: Fraction}``; elements of g⊗g
are dicts ``{(a, b): Fraction}`` and of g⊗g⊗g ``{(a, b, c): Fraction}``.

The Casimir element is built from the inverse Killing matrix,
``Omega = sum_{ab} kinv[a][b] I_a ⊗ I_b``, so everything stays rational.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import linalg
from ._sparse import addto, frac
from .errors import (
    AntisymmetryViolation,
    BadDecomposition,
    BadRank,
    DimensionMismatch,
    FormalCYBEError,
    JacobiViolation,
    KillingDegenerate,
)


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    dim: int
    labels: tuple
    constants: dict  # (a, b) -> {c: coeff}, only a != b with nonzero bracket
    killing: tuple
    killing_inverse: tuple
    triangular: tuple | None = None  # (n_plus, cartan, n_minus) index tuples
    name: str = "custom"
    _pairs: dict = field(default_factory=dict, repr=False)

    def index(self, label):
        if isinstance(label, int):
            if not 0 <= label < self.dim:
                raise DimensionMismatch(f"basis index {label} out of range")
            return label
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionMismatch(f"unknown basis label {label!r}") from None

    def basis(self, a):
        return {self.index(a): Fraction(1)}

    def struct(self, a, b):
        """Sparse [I_a, I_b] as a tuple of (c, coeff) pairs."""
        return self.constants.get((a, b), ())

    def dual_basis(self, a):
        """I^a, the Killing-dual of I_a: kappa(I^a, I_b) = delta_ab."""
        row = self.killing_inverse[a]
        return {b: v for b, v in enumerate(row) if v}

    def __repr__(self):
        return f"LieAlgebra({self.name}, dim={self.dim})"


def _killing_matrix(dim, constants):
    # kappa_ab = tr(ad I_a ad I_b) = sum_{c,d} C[a][d][c] C[b][c][d]
    ad = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for (a, b), terms in constants.items():
        for c, v in terms:
            ad[a][c][b] = v  # ad(I_a) maps I_b to sum_c v I_c; column b, row c
    kappa = []
    for a in range(dim):
        row = []
        for b in range(dim):
            tr = Fraction(0)
            A, B = ad[a], ad[b]
            for i in range(dim):
                Ai = A[i]
                for j in range(dim):
                    if Ai[j] and B[j][i]:
                        tr += Ai[j] * B[j][i]
            row.append(tr)
        kappa.append(tuple(row))
    return tuple(kappa)


def from_constants(dim, entries, labels=None, name="custom", triangular=None):
    """Build and validate an algebra from a full list of (a, b, c, value) entries."""
    if dim < 1:
        raise BadRank("dimension must be positive")
    dense = {}
    for a, b, c, v in entries:
        a, b, c = int(a), int(b), int(c)
        if not all(0 <= t < dim for t in (a, b, c)):
            raise DimensionMismatch(f"constant index {(a, b, c)} outside 0..{dim - 1}")
        v = frac(v)
        if v:
            dense[(a, b, c)] = dense.get((a, b, c), Fraction(0)) + v
    for (a, b, c), v in dense.items():
        if dense.get((b, a, c), Fraction(0)) != -v:
            raise AntisymmetryViolation(f"c[{a}][{b}][{c}] = {v} but c[{b}][{a}][{c}] != {-v}")
    constants = {}
    for (a, b, c), v in sorted(dense.items()):
        if v:
            constants.setdefault((a, b), []).append((c, v))
    constants = {k: tuple(v) for k, v in constants.items()}
    _check_jacobi(dim, constants)
    kappa = _killing_matrix(dim, constants)
    try:
        kinv = linalg.inverse([list(r) for r in kappa])
    except ZeroDivisionError:
        raise KillingDegenerate("Killing form is degenerate; algebra is not semisimple") from None
    L = LieAlgebra(
        dim=dim,
        labels=tuple(labels) if labels else tuple(f"I{i}" for i in range(dim)),
        constants=constants,
        killing=kappa,
        killing_inverse=tuple(tuple(r) for r in kinv),
        triangular=triangular,
        name=name,
    )
    _check_invariance(L)
    return L


def _check_jacobi(dim, constants):
    for a in range(dim):
        for b in range(a + 1, dim):
            for c in range(b + 1, dim):
                total = {}
                for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                    for d, v in constants.get((y, z), ()):
                        for e, w in constants.get((x, d), ()):
                            addto(total, e, v * w)
                if total:
                    raise JacobiViolation(f"Jacobi identity fails on basis triple {(a, b, c)}")


def _check_invariance(L):
    # kappa([a,b],c) + kappa(b,[a,c]) = 0
    n = L.dim
    for a, b, c in product(range(n), repeat=3):
        s = Fraction(0)
        for d, v in L.struct(a, b):
            s += v * L.killing[d][c]
        for d, v in L.struct(a, c):
            s += v * L.killing[b][d]
        if s:
            raise FormalCYBEError(f"Killing form not ad-invariant at {(a, b, c)}")


def sl(n):
    """sl(n) in the frozen basis e_ij (i<j), h_i = e_ii - e_{i+1,i+1}, e_ij (i>j).

    Index pairs are ordered lexicographically inside each block.
    """
    if n < 2:
        raise BadRank(f"sl(n) needs n >= 2, got {n}")
    upper = [(i, j) for i in range(n) for j in range(n) if i < j]
    lower = [(i, j) for i in range(n) for j in range(n) if i > j]
    labels = [f"e{i + 1}{j + 1}" for i, j in upper]
    labels += [f"h{i + 1}" for i in range(n - 1)]
    labels += [f"e{i + 1}{j + 1}" for i, j in lower]
    if n == 2:
        labels = ["e", "h", "f"]
    mats = []
    for i, j in upper:
        mats.append({(i, j): Fraction(1)})
    for i in range(n - 1):
        mats.append({(i, i): Fraction(1), (i + 1, i + 1): Fraction(-1)})
    for i, j in lower:
        mats.append({(i, j): Fraction(1)})
    off_index = {p: k for k, p in enumerate(upper)}
    off_index.update({p: len(upper) + n - 1 + k for k, p in enumerate(lower)})

    def coords(m):
        out = {}
        diag = [Fraction(0)] * n
        for (i, j), v in m.items():
            if i == j:
                diag[i] += v
            else:
                addto(out, off_index[(i, j)], v)
        run = Fraction(0)
        for i in range(n - 1):
            run += diag[i]
            addto(out, len(upper) + i, run)
        return out

    def mul(p, q):
        out = {}
        for (i, j), v in p.items():
            for (k, l), w in q.items():
                if j == k:
                    addto(out, (i, l), v * w)
        return out

    entries = []
    dim = len(mats)
    for a in range(dim):
        for b in range(dim):
            comm = mul(mats[a], mats[b])
            for k, v in mul(mats[b], mats[a]).items():
                addto(comm, k, -v)
            for c, v in coords(comm).items():
                entries.append((a, b, c, v))
    nu = len(upper)
    tri = (tuple(range(nu)), tuple(range(nu, nu + n - 1)), tuple(range(nu + n - 1, dim)))
    return from_constants(dim, entries, labels=labels, name=f"sl({n})", triangular=tri)


def sl_index_pairs(n):
    """Matrix position (i, j) of each basis vector of sl(n); None for Cartan vectors."""
    upper = [(i, j) for i in range(n) for j in range(n) if i < j]
    lower = [(i, j) for i in range(n) for j in range(n) if i > j]
    return upper + [None] * (n - 1) + lower


def load_lie_algebra(spec):
    """Load from a manifest-style dict or a name such as ``"sl3"``.

    ``{"builtin": "sl", "rank": n}`` gives sl(n) (``rank`` is the matrix size);
    ``{"custom": {"dim": d, "constants": [[a, b, c, "p/q"], ...]}}`` gives a
    user-defined algebra. Every invariant is verified before returning.
    """
    if isinstance(spec, str):
        name = spec.replace("(", "").replace(")", "").lower()
        if name.startswith("sl") and name[2:].isdigit():
            return sl(int(name[2:]))
        raise BadRank(f"unknown builtin algebra {spec!r}")
    if "algebra" in spec:
        spec = spec["algebra"]
    if "builtin" in spec:
        if spec["builtin"] != "sl":
            raise BadRank(f"unsupported builtin {spec['builtin']!r}")
        rank = spec.get("rank")
        if not isinstance(rank, int):
            raise BadRank("builtin sl needs an integer 'rank'")
        return sl(rank)
    if "custom" in spec:
        c = spec["custom"]
        tri = c.get("triangular")
        if tri is not None:
            tri = tuple(tuple(int(i) for i in part) for part in tri)
        return from_constants(int(c["dim"]), c["constants"], labels=c.get("labels"), triangular=tri)
    raise BadRank(f"cannot interpret algebra spec {spec!r}")


# ---------------------------------------------------------------------------
# elements of g


def _conform(L, a):
    for k in a:
        if not (isinstance(k, int) and 0 <= k < L.dim):
            raise DimensionMismatch(f"element index {k!r} does not conform to {L}")


def vec(L, coeffs):
    """Accept a length-n sequence or a sparse dict and return a sparse dict."""
    if isinstance(coeffs, dict):
        out = {L.index(k): frac(v) for k, v in coeffs.items()}
    else:
        if len(coeffs) != L.dim:
            raise DimensionMismatch(f"expected {L.dim} coefficients, got {len(coeffs)}")
        out = {i: frac(v) for i, v in enumerate(coeffs)}
    return {k: v for k, v in out.items() if v}


def bracket(L, a, b):
    _conform(L, a)
    _conform(L, b)
    out = {}
    for i, u in a.items():
        for j, v in b.items():
            uv = u * v
            for c, w in L.struct(i, j):
                addto(out, c, uv * w)
    return out


def killing_form(L, a, b):
    _conform(L, a)
    _conform(L, b)
    K = L.killing
    s = Fraction(0)
    for i, u in a.items():
        Ki = K[i]
        for j, v in b.items():
            if Ki[j]:
                s += u * v * Ki[j]
    return s


def ad_matrix(L, a):
    """Matrix M with M[c][b] = coefficient of I_c in [a, I_b]."""
    n = L.dim
    M = [[Fraction(0)] * n for _ in range(n)]
    for b in range(n):
        for c, v in bracket(L, a, {b: Fraction(1)}).items():
            M[c][b] = v
    return M


# ---------------------------------------------------------------------------
# g ⊗ g


def casimir(L):
    kinv = L.killing_inverse
    return {(a, b): kinv[a][b] for a in range(L.dim) for b in range(L.dim) if kinv[a][b]}


def tau(t):
    return {(b, a): v for (a, b), v in t.items()}


def outer(u, v):
    out = {}
    for a, x in u.items():
        for b, y in v.items():
            out[(a, b)] = x * y
    return out


def act_left(L, a, t):
    """(ad a ⊗ 1) t."""
    out = {}
    for i, u in a.items():
        for (p, q), v in t.items():
            uv = u * v
            for c, w in L.struct(i, p):
                addto(out, (c, q), uv * w)
    return out


def act_right(L, a, t):
    """(1 ⊗ ad a) t."""
    out = {}
    for i, u in a.items():
        for (p, q), v in t.items():
            uv = u * v
            for c, w in L.struct(i, q):
                addto(out, (p, c), uv * w)
    return out


def act(L, a, t):
    """[a ⊗ 1 + 1 ⊗ a, t]."""
    out = act_left(L, a, t)
    for k, v in act_right(L, a, t).items():
        addto(out, k, v)
    return out


def drinfeld_jimbo(L, decomposition=None):
    """r_DJ = 1/2 Omega_h + sum over n_+ x n_- of the Casimir block.

    ``decomposition`` is ``(n_plus, cartan, n_minus)`` as index sequences;
    by default the algebra's own triangular decomposition is used.
    The result satisfies r_DJ + tau(r_DJ) = Omega.
    """
    decomposition = decomposition or L.triangular
    if decomposition is None:
        raise BadDecomposition("no triangular decomposition supplied")
    npos, cartan, nneg = (tuple(L.index(i) for i in part) for part in decomposition)
    _check_decomposition(L, npos, cartan, nneg)
    omega = casimir(L)
    hset, pset, mset = set(cartan), set(npos), set(nneg)
    r = {}
    for (a, b), v in omega.items():
        if a in hset and b in hset:
            r[(a, b)] = v / 2
        elif a in pset and b in mset:
            r[(a, b)] = v
        elif not ((a in mset and b in pset) or (a in hset) == (b in hset)):
            raise BadDecomposition("Casimir mixes the Cartan part with root spaces")
    return r


def _check_decomposition(L, npos, cartan, nneg):
    allidx = list(npos) + list(cartan) + list(nneg)
    if sorted(allidx) != list(range(L.dim)):
        raise BadDecomposition("decomposition must partition the basis")
    P, H, M = set(npos), set(cartan), set(nneg)
    if not H:
        raise BadDecomposition("empty Cartan part")

    def inside(vals, S):
        return all(c in S for c in vals)

    for a in H:
        for b in H:
            if L.struct(a, b):
                raise BadDecomposition("Cartan part is not abelian")
        for b in P:
            if not inside([c for c, _ in L.struct(a, b)], P):
                raise BadDecomposition("[h, n+] not contained in n+")
        for b in M:
            if not inside([c for c, _ in L.struct(a, b)], M):
                raise BadDecomposition("[h, n-] not contained in n-")
    for S in (P, M):
        for a in S:
            for b in S:
                if not inside([c for c, _ in L.struct(a, b)], S):
                    raise BadDecomposition("n+ / n- not closed under the bracket")
    K = L.killing
    for a in range(L.dim):
        for b in range(L.dim):
            if not K[a][b]:
                continue
            if (a in H) != (b in H) or (a in P and b in P) or (a in M and b in M):
                raise BadDecomposition("Killing form does not pair n+ with n- and h with h")


# ---------------------------------------------------------------------------
# g ⊗ g ⊗ g products of embedded 2-tensors


def br_12_13(L, A, B):
    """[(a⊗b)^12, (c⊗d)^13] = [a, c] ⊗ b ⊗ d."""
    out = {}
    for (a, b), u in A.items():
        for (c, d), v in B.items():
            st = L.struct(a, c)
            if st:
                uv = u * v
                for e, w in st:
                    addto(out, (e, b, d), uv * w)
    return out


def br_12_23(L, A, B):
    """[(a⊗b)^12, (c⊗d)^23] = a ⊗ [b, c] ⊗ d."""
    out = {}
    for (a, b), u in A.items():
        for (c, d), v in B.items():
            st = L.struct(b, c)
            if st:
                uv = u * v
                for e, w in st:
                    addto(out, (a, e, d), uv * w)
    return out


def br_13_23(L, A, B):
    """[(a⊗b)^13, (c⊗d)^23] = a ⊗ c ⊗ [b, d]."""
    out = {}
    for (a, b), u in A.items():
        for (c, d), v in B.items():
            st = L.struct(b, d)
            if st:
                uv = u * v
                for e, w in st:
                    addto(out, (a, c, e), uv * w)
    return out
