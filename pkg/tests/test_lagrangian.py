from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formal_cybe import lagrangian as LG
from formal_cybe.doubles import DoubleElement
from formal_cybe.errors import InfiniteRank, NotNormalized, NotSkew, WindowTooSmall
from formal_cybe.series import ScalarSeries, StandardRMatrix, Tensor2Series, base_rmatrix
from strategies import SL2, SL3, wedge

F = Fraction


@pytest.mark.parametrize("L", [SL2, SL3], ids=["sl2", "sl3"])
@pytest.mark.parametrize("i", [1, 2, 3])
def test_build_w_matches_standard(L, i):
    W = LG.build_W(base_rmatrix(L, i), 3)
    assert W.m == i - 1
    assert LG.span_equal(W, LG.standard_W(i, L, 3))
    assert LG.check_duality(W)["passed"]
    assert LG.check_isotropy(W)["passed"]


@pytest.mark.parametrize("i", [1, 2, 3])
def test_subalgebra_and_complement(i):
    W = LG.build_W(base_rmatrix(SL2, i), 3)
    sub = LG.check_subalgebra(W)
    assert sub["passed"] and sub["verified"] > 0
    assert LG.complementarity(W)["passed"]
    assert LG.projection_report(W)["negative_degrees_covered"]


def test_w1_basis_is_dual_casimir_pattern():
    W = LG.build_W(base_rmatrix(SL2, 1), 2)
    # w_{k,a} = I^a x^{-k-1}
    assert W.elements[(1, 1)].laurent == {-2: {1: F(1, 8)}}
    entry = W.to_json()[0]
    assert entry[:2] == [0, 0] and entry[2] == [[-1, 2, "1/4"]] and entry[3] == []


def test_w3_pattern():
    W = LG.build_W(base_rmatrix(SL2, 3), 2)
    assert W.elements[(0, 0)].laurent == {} and W.elements[(0, 0)].residue == {1: {2: F(-1, 4)}}


def test_build_w_requires_normal_form():
    r = StandardRMatrix(SL2, ScalarSeries({1: 2}), Tensor2Series())
    with pytest.raises(NotNormalized):
        LG.build_W(r, 2)
    bad = StandardRMatrix(SL2, ScalarSeries({1: 1}), Tensor2Series())
    with pytest.raises(NotSkew):
        LG.build_W(bad, 2)
    r2 = base_rmatrix(SL2, 2)
    short = StandardRMatrix(SL2, r2.s.truncate(2), Tensor2Series(r2.g.coeffs, 2, 2))
    with pytest.raises(WindowTooSmall):
        LG.build_W(short, 4)


def test_twisted_w_is_isotropic_for_a_twist():
    r = base_rmatrix(SL2, 2).add_tensor(wedge(SL2, "h", "e", F(1, 2)), sign=-1)
    W = LG.build_W(r, 3)
    assert LG.check_isotropy(W)["passed"]
    assert LG.check_subalgebra(W)["passed"]


def test_non_twist_breaks_subalgebra():
    s = Tensor2Series({(0, 0): {(0, 2): F(1), (2, 0): F(-1)}})
    r = base_rmatrix(SL2, 1).add_tensor(s, sign=-1)
    W = LG.build_W(r, 3)
    assert LG.check_isotropy(W)["passed"]
    assert not LG.check_subalgebra(W)["passed"]


@pytest.mark.parametrize("i", [1, 2, 3])
def test_t_map_round_trip(i):
    s = wedge(SL2, "h", "e")
    T = LG.twist_to_T(s, i, SL2)
    assert LG.check_T_skew(T) == []
    assert LG.T_to_twist(T).coeffs == s.coeffs
    W = LG.associated_W(T)
    assert LG.span_equal(W, LG.build_W(base_rmatrix(SL2, i).add_tensor(s, sign=-1), T.K))


def test_t_map_of_h_wedge_e():
    T = LG.twist_to_T(wedge(SL2, "h", "e"), 1, SL2)
    # T(w_{0,e}) = coefficient of ⊗ e in h⊗e - e⊗h = h
    assert T.images[(0, 0)] == {0: {1: 1}}
    assert T.images[(0, 1)] == {0: {0: -1}}
    assert T.apply({(0, 0): F(2)}) == {0: {1: 2}}


def test_t_map_errors():
    T = LG.LinearMapT(SL2, 1, 0, {(0, 0): {0: {1: F(1)}}})
    with pytest.raises(NotSkew):
        LG.T_to_twist(T)
    part = LG.LinearMapT(SL2, 1, 0, {}, complete=False)
    with pytest.raises(InfiniteRank):
        LG.T_to_twist(part)
    with pytest.raises(InfiniteRank):
        part.apply({(3, 0): F(1)})


@settings(max_examples=10)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 2), st.integers(0, 2), st.integers(-2, 2)), max_size=4))
def test_t_round_trip_random_skew(terms):
    s = {}
    for i, j, a, b, c in terms:
        for key, ab, v in (((i, j), (a, b), c), ((j, i), (b, a), -c)):
            t = s.setdefault(key, {})
            t[ab] = t.get(ab, 0) + v
    s = Tensor2Series(s)
    T = LG.twist_to_T(s, 1, SL2, K=1)
    assert LG.T_to_twist(T).coeffs == s.coeffs


def test_commensurability_of_constant_twist():
    r = base_rmatrix(SL2, 1).add_tensor(wedge(SL2, "h", "e"), sign=-1)
    rep = LG.commensurability(LG.build_W(r, 5), 1)
    assert rep["stabilized"] and rep["verdict"] == "finite on window"
    same = LG.commensurability(LG.build_W(base_rmatrix(SL2, 1), 5), 1)
    assert same["dim_sum_quotient"] == 0


def test_decompose_recovers_element():
    W = LG.build_W(base_rmatrix(SL2, 2), 3)
    u = W.elements[(1, 0)].scale(3) + W.elements[(0, 2)]
    coeffs, rem = LG.decompose(W, u)
    assert coeffs == {(0, 2): 1, (1, 0): 3} and rem.is_zero()
    with pytest.raises(WindowTooSmall):
        LG.decompose(W, DoubleElement({-9: {0: 1}}, {}, 1))
