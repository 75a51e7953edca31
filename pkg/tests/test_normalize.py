from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from formal_cybe import cybe
from formal_cybe import lagrangian as LG
from formal_cybe import lie_core as lc
from formal_cybe import normalize as N
from formal_cybe.errors import (
    AllZeroWindow,
    NotAutomorphism,
    Obstructed,
    UnsupportedMultiplicity,
    WrongMultiplicity,
    ZeroSeries,
)
from formal_cybe.series import (
    ScalarSeries,
    StandardRMatrix,
    Tensor2Series,
    base_rmatrix,
    residual_report,
    skew_residual,
)
from strategies import SL2, SL3, nonzero_fracs, random_skew, seeded, small_fracs, wedge

F = Fraction
x, y, tau = O.x, O.y, O.t


# ---------------------------------------------------------------------------
# multiplicity and residue


def test_multiplicity_classes():
    assert N.multiplicity(ScalarSeries({0: 2, 1: 1})) == 0
    assert N.multiplicity(ScalarSeries({1: 1})) == 1
    assert N.multiplicity(ScalarSeries({2: 1, 5: 1}, 6)) == 2
    with pytest.raises(UnsupportedMultiplicity) as exc:
        N.multiplicity(ScalarSeries({3: 1}))
    assert exc.value.order == 3
    with pytest.raises(ZeroSeries):
        N.multiplicity(ScalarSeries({}))
    with pytest.raises(AllZeroWindow):
        N.multiplicity(ScalarSeries({}, 4))
    with pytest.raises(WrongMultiplicity):
        N.multiplicity(ScalarSeries({-1: 1}))


@given(nonzero_fracs, small_fracs, small_fracs)
def test_residue_matches_laurent_oracle(s2, s3, s4):
    s = ScalarSeries({2: s2, 3: s3, 4: s4})
    res = N.residue_obstruction(s)
    assert res == -s3 / s2**2
    assert sp.Rational(res.numerator, res.denominator) == O.residue_of_inverse(s)


def test_residue_needs_multiplicity_two():
    with pytest.raises(WrongMultiplicity):
        N.residue_obstruction(ScalarSeries({1: 1}))


# ---------------------------------------------------------------------------
# solve_psi


@settings(max_examples=20)
@given(st.sampled_from([0, 1]), st.lists(small_fracs, min_size=4, max_size=4), nonzero_fracs)
def test_solve_psi_certificate(m, rest, lead):
    s = ScalarSeries({m: lead, **{m + 1 + k: c for k, c in enumerate(rest)}})
    t = N.solve_psi(s, window=8)
    assert t.xi == 1 / lead
    cert = N.ode_residual(s, t, m)
    assert cert.cap >= 8 and not cert.coeffs


@settings(max_examples=10)
@given(nonzero_fracs, small_fracs, small_fracs)
def test_solve_psi_unobstructed_double_pole(lead, s4, s5):
    s = ScalarSeries({2: lead, 4: s4, 5: s5})
    t = N.solve_psi(s, window=8)
    assert t.psi.coeff(2) == 0
    assert not N.ode_residual(s, t, 2).coeffs


def test_obstructed_and_normalizable_double_poles():
    with pytest.raises(Obstructed) as exc:
        N.solve_psi(ScalarSeries({2: 1, 3: 1}))
    assert exc.value.residue == -1 and str(exc.value) == "obstruction residue -1"
    t = N.solve_psi(ScalarSeries({2: 1, 4: 1}), window=8)
    # [DERIVED] psi = y + y^3 + 5/3 y^5 + 16/5 y^7
    assert t.psi.coeffs == {1: 1, 3: 1, 5: F(5, 3), 7: F(16, 5)}


def test_solve_psi_simple_pole_closed_form():
    # s = y + y^2 is solved by psi = y/(1 - y)
    t = N.solve_psi(ScalarSeries({1: 1, 2: 1}), window=8)
    assert t.psi.coeffs == {k: 1 for k in range(1, 9)}


def test_coord_transform_validation():
    with pytest.raises(ValueError):
        N.CoordTransform(ScalarSeries({1: 2}))
    with pytest.raises(ValueError):
        N.CoordTransform(ScalarSeries({0: 1, 1: 1}))
    with pytest.raises(ValueError):
        N.CoordTransform(ScalarSeries({1: 1}), 0)
    js = N.CoordTransform(ScalarSeries({1: 1, 2: F(1, 2)}), 3).to_json()
    assert js == {"psi": [[1, "1/1"], [2, "1/2"]], "psi_cap": None, "xi": "3/1"}


# ---------------------------------------------------------------------------
# substitute_coords


def substitution_oracle(r, t, n, degree):
    """Total-degree <= degree coefficients of (x - y) xi r(psi(x), psi(y)) in End(V⊗V)."""
    A = O.numerator_from(r, n)
    px, py = O.to_sympy(t.psi, x), O.to_sympy(t.psi, y)
    xi = sp.Rational(t.xi.numerator, t.xi.denominator)
    q = sp.cancel((px - py) / (x - y))
    expr = A.subs({x: px, y: py}, simultaneous=True) * xi / q
    scaled = expr.subs({x: tau * x, y: tau * y}, simultaneous=True)
    out = scaled.applyfunc(lambda e: sp.expand(sp.series(e, tau, 0, degree + 1).removeO()))
    return out.subs(tau, 1)


def _truncate_total(M, degree):
    def cut(e):
        e = sp.expand(e)
        if e == 0:
            return e
        return sum(c * x**i * y**j for (i, j), c in sp.Poly(e, x, y).terms() if i + j <= degree)

    return M.applyfunc(cut)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_substitute_coords_matches_sympy(i):
    r = base_rmatrix(SL2, i)
    t = N.CoordTransform(ScalarSeries({1: 1, 2: 1, 3: F(-1, 2)}), F(2))
    rt = N.substitute_coords(r, t, window=8)
    deg = 4
    lib = _truncate_total(O.numerator_from(StandardRMatrix(SL2, rt.s.truncate(None), _exact(rt.g)), 2), deg)
    want = _truncate_total(substitution_oracle(r, t, 2, deg), deg)
    assert (lib - want).is_zero_matrix


def _exact(g):
    return Tensor2Series(g.coeffs)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_substitution_preserves_cybe_and_skew(i):
    t = N.CoordTransform(ScalarSeries({1: 1, 2: 1}), 3)
    rt = N.substitute_coords(base_rmatrix(SL3, i), t, window=10)
    assert skew_residual(rt).is_zero()
    rep = residual_report(cybe.cyb_residual(rt, 3))
    assert rep["zero_on_window"] and rep["guaranteed_window"]["x1"] >= 2


@pytest.mark.parametrize("i", [2, 3])
def test_normalization_round_trip(i):
    r = base_rmatrix(SL2, i)
    rt = N.substitute_coords(r, N.CoordTransform(ScalarSeries({1: 1, 2: 1}), 3), window=12)
    if i == 3:
        assert N.residue_obstruction(rt.s) == 0
    back = N.substitute_coords(rt, N.solve_psi(rt.s, window=10), window=10)
    assert back.s.coeffs == {i - 1: 1}
    low = {k: v for k, v in back.g.coeffs.items() if sum(k) <= 3}
    assert low == r.g.coeffs


# ---------------------------------------------------------------------------
# gauge transformations


def conj_oracle(r, n, U):
    """(x - y)(phi⊗phi) r for phi = Ad(U(x)), as a polynomial matrix."""
    A = O.numerator_from(r, n)
    Ux, Uy = U.subs(y, x), U.subs(x, y)
    left = O.kron(Ux, Uy)
    right = O.kron(Ux.inv(), Uy.inv())
    return (left * A * right).applyfunc(sp.expand)


@pytest.mark.parametrize("i", [1, 2, 3])
@pytest.mark.parametrize("c", [1, F(-2, 3)])
def test_gauge_apply_matches_conjugation_sl2(i, c):
    phi = N.exp_ad(SL2, {1: {0: F(c)}})
    assert phi.exact and len(phi.phi) == 3
    c = F(c)
    U = sp.eye(2) + sp.Rational(c.numerator, c.denominator) * x * O.unit(2, 0, 1)
    got = O.numerator_from(N.gauge_apply(base_rmatrix(SL2, i), phi), 2)
    assert (got - conj_oracle(base_rmatrix(SL2, i), 2, U)).is_zero_matrix


@pytest.mark.parametrize("i", [1, 2, 3])
def test_gauge_apply_matches_conjugation_sl3(i):
    e12, e23 = SL3.index("e12"), SL3.index("e23")
    phi = N.exp_ad(SL3, {1: {e12: F(1)}, 2: {e23: F(1)}})
    assert phi.exact
    X = x * O.unit(3, 0, 1) + x**2 * O.unit(3, 1, 2)
    U = sp.eye(3) + X + X * X / 2
    got = O.numerator_from(N.gauge_apply(base_rmatrix(SL3, i), phi), 3)
    assert (got - conj_oracle(base_rmatrix(SL3, i), 3, U)).is_zero_matrix


def test_diagonal_conjugation():
    phi = N.diagonal_conjugation(SL3, [2, 1, F(1, 3)])
    assert N.check_automorphism(phi)["passed"]
    U = sp.diag(2, 1, sp.Rational(1, 3))
    r = base_rmatrix(SL3, 2)
    got = O.numerator_from(N.gauge_apply(r, phi), 3)
    assert (got - conj_oracle(r, 3, U)).is_zero_matrix
    with pytest.raises(NotAutomorphism):
        N.diagonal_conjugation(SL3, [1, 0, 1])


def test_exp_ad_truncates_non_nilpotent():
    phi = N.exp_ad(SL2, {1: {1: F(1)}}, cap=5)
    assert not phi.exact and phi.cap == 5
    # exp(ad x h) scales e by exp(2x): coefficient of x^3 is 8/6
    assert phi.phi[3][0][0] == F(4, 3)
    assert N.check_automorphism(phi)["passed"]
    with pytest.raises(NotAutomorphism):
        N.exp_ad(SL2, {0: {0: F(1)}})


def test_check_automorphism_detects_failure():
    M = tuple(tuple(F(int(a == b)) * (2 if a == 0 else 1) for b in range(3)) for a in range(3))
    bad = N.GaugeAuto(SL2, (M,))
    rep = N.check_automorphism(bad)
    assert not rep["passed"] and rep["failures"]
    with pytest.raises(NotAutomorphism):
        N.gauge_apply(base_rmatrix(SL2, 1), bad)
    zero = ((F(0),) * 3,) * 3
    assert not N.check_automorphism(N.GaugeAuto(SL2, (zero,)))["phi0_invertible"]


def test_compose_gauge_inverse():
    phi, inv = N.exp_ad(SL2, {1: {0: F(1)}}), N.exp_ad(SL2, {1: {0: F(-1)}})
    comp = N.compose_gauge(phi, inv)
    ident = N.identity_gauge(SL2)
    assert comp.phi[0] == ident.phi[0] and all(not any(any(r) for r in M) for M in comp.phi[1:])


def test_gauge_from_spec():
    spec = {"phi": [[0, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]], [1, [[0, "-2", 0], [0, 0, 1], [0, 0, 0]]], [2, [[0, 0, -1], [0, 0, 0], [0, 0, 0]]]]}
    phi = N.gauge_from_spec(SL2, spec)
    assert N.check_automorphism(phi)["passed"]
    assert phi.phi == N.exp_ad(SL2, {1: {0: F(1)}}).phi
    with pytest.raises(ValueError):
        N.gauge_from_spec(SL2, {"phi": [[0, [[1, 0], [0, 1]]]]})


def gauge_cases():
    L = SL2
    yield L, 1, N.exp_ad(L, {1: {0: F(1)}}), wedge(L, "h", "e")
    yield L, 2, N.exp_ad(L, {1: {2: F(1, 2)}}), wedge(L, "h", "e", F(-1, 3))
    yield L, 3, N.exp_ad(L, {1: {0: F(1)}, 2: {2: F(2)}}), Tensor2Series()
    yield SL3, 2, N.diagonal_conjugation(SL3, [3, 1, 1]), wedge(SL3, "h1", "e13")


@pytest.mark.parametrize("L,i,phi,s", list(gauge_cases()))
def test_gauge_coherence(L, i, phi, s):
    r = base_rmatrix(L, i).add_tensor(s, sign=-1)
    Wa = LG.build_W(N.gauge_apply(r, phi), 4)
    Wb = N.apply_W(LG.build_W(r, 4), phi)
    assert LG.span_equal(Wa, Wb)


def test_gauge_twist_formula():
    # [DERIVED] r_1 - (phi⊗phi) r_1 = -(t/4)(h⊗e - e⊗h) + (t^2/4)(x - y) e⊗e for phi = exp(ad t x e)
    t = F(3)
    g = N.gauge_apply(base_rmatrix(SL2, 1), N.exp_ad(SL2, {1: {0: t}})).g
    diff = (-g).coeffs
    assert diff[(0, 0)] == {(1, 0): -t / 4, (0, 1): t / 4}
    assert diff[(1, 0)] == {(0, 0): t * t / 4} and diff[(0, 1)] == {(0, 0): -t * t / 4}


# ---------------------------------------------------------------------------
# multiplicity >= 3 never solves the CYBE


@settings(max_examples=10)
@given(st.integers(0, 10_000), st.sampled_from([3, 4]))
def test_high_multiplicity_fails_cybe(seed, m):
    L = SL2
    omega = lc.casimir(L)
    g = {}
    # g = (1/2) (s(x) - s(y))/(x - y) Omega + skew part
    for a in range(m):
        g[(a, m - 1 - a)] = {k: v / 2 for k, v in omega.items()}
    skew = random_skew(L, seeded(seed), degree=2, density=0.2)
    r = StandardRMatrix(L, ScalarSeries({m: 1}), Tensor2Series(g) + skew)
    assert skew_residual(r).is_zero()
    rep = residual_report(cybe.cyb_residual(r, 4))
    # a vanishing residual here would only be inconclusive, never a counterexample
    assert not rep["zero_on_window"]
