import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from berezin_lp import cpn, quad
from berezin_lp.cpn import CPnParams, CPnState, CPnSymbol
from berezin_lp.fock import multi_indices
from berezin_lp.spectral import build_matrix


def state(n, N, a):
    return CPnState(CPnParams(n, N), a)


def test_params_and_state_validation():
    with pytest.raises(ValueError):
        CPnParams(1, 0)
    with pytest.raises(ValueError):
        state(2, 3, (2, 2))
    assert CPnParams(2, 4).dimension == len(list(CPnParams(2, 4).indices())) == 15


def test_fubini_study_weight_values():
    assert cpn.fubini_study_weight(np.array([[0j]]))[0] == pytest.approx(2.0)
    assert cpn.fubini_study_weight(np.array([[1 / math.sqrt(2), 1j / math.sqrt(2)]]))[0] == pytest.approx(0.5)


def test_fubini_study_volume():
    vol = integrate.quad(lambda r: 2 * math.pi * r * 2 * (1 + r * r) ** -2, 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert vol == pytest.approx(2 * math.pi, rel=1e-12)


def test_chart_integral_spot_values():
    assert cpn.lcalcul_integral(1, (0,), 0).to_float() == pytest.approx(0.5)
    assert cpn.lcalcul_integral(1, (1,), 1).to_float() == pytest.approx(0.25)
    assert cpn.lcalcul_integral(1, (1,), 2).to_float() == pytest.approx(1 / 12)
    assert cpn.lcalcul_integral(2, (1, 0), 2).to_float() == pytest.approx(1 / 96, rel=1e-14)


@pytest.mark.parametrize("b", [0, 3, 10, 20])
def test_chart_integral_against_scipy_n1(b):
    for a in range(min(b, 10) + 1):
        f = lambda r: r ** (2 * a + 1) * (1 + r * r) ** -(b + 2)
        ref = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13)[0] + \
            integrate.quad(f, 1, np.inf, epsabs=0, epsrel=1e-13)[0]
        assert cpn.lcalcul_integral(1, (a,), b).to_float() == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("a,b", [((0, 0), 0), ((1, 0), 2), ((2, 1), 4), ((1, 3), 6)])
def test_chart_integral_against_scipy_n2(a, b):
    f = lambda r2, r1: (r1 ** (2 * a[0] + 1) * r2 ** (2 * a[1] + 1)
                        * (1 + r1 * r1 + r2 * r2) ** -(b + 3))
    ref = integrate.dblquad(f, 0, np.inf, 0, np.inf, epsabs=0, epsrel=1e-11)[0]
    assert cpn.lcalcul_integral(2, a, b).to_float() == pytest.approx(ref, rel=1e-8)


def test_chart_integral_accepts_half_integers():
    # Gamma form: a = 1/2, b = 3/2 gives Gamma(3/2) Gamma(2) / (2 Gamma(7/2))
    expected = math.gamma(1.5) * math.gamma(2) / (2 * math.gamma(3.5))
    assert cpn.lcalcul_integral(1, (0.5,), 1.5).to_float() == pytest.approx(expected)


# ---------------------------------------------------------------- matrix elements

def test_H_matrix_elements():
    for n, N in [(1, 2), (2, 3)]:
        params = CPnParams(n, N)
        for a in params.indices():
            assert cpn.cpn_matrix_element(params, CPnSymbol.H(n), a, a) == pytest.approx(
                (a[0] + 1) / (N + n + 1), rel=1e-13)
            assert cpn.cpn_matrix_element(params, CPnSymbol.constant(n), a, a) == pytest.approx(1.0, rel=1e-13)
            for b in params.indices():
                if b != a:
                    assert cpn.cpn_matrix_element(params, CPnSymbol.H(n), a, b) == 0.0


def test_unbounded_symbol_rejected():
    with pytest.raises(cpn.UnsupportedSymbolError):
        cpn.cpn_matrix_element(CPnParams(1, 2), CPnSymbol.monomial((3,), (3,), 0), (0,), (0,))
    with pytest.raises(cpn.UnsupportedSymbolError):
        cpn.cpn_matrix_element(CPnParams(1, 2), "H", (0,), (0,))


def test_model_eigenvalues():
    assert cpn.cpn_model_eigenvalue(CPnParams(1, 2), (0,)) == pytest.approx(0.25)
    assert cpn.cpn_model_eigenvalue(CPnParams(1, 2), (1,)) == pytest.approx(0.5)
    M = build_matrix("cpn", CPnSymbol.H(1), CPnParams(1, 2))
    assert np.allclose(np.diag(M.entries), [0.25, 0.5, 0.75]) and M.is_diagonal()
    for n in (1, 2, 3):
        params = CPnParams(n, 7)
        vals = [cpn.cpn_model_eigenvalue(params, a) for a in params.indices()]
        assert 0 < min(vals) and max(vals) <= 1
        for k in range(8):
            assert cpn.cpn_level_multiplicity(params, k) == len(cpn.level_indices(params, k))


@pytest.mark.parametrize("n,N", [(1, 3), (1, 8), (2, 2), (2, 5)])
def test_orthonormality_and_H_by_quadrature(n, N):
    params = CPnParams(n, N)
    states = [CPnState(params, a) for a in params.indices()]
    G = quad.quadrature_matrix(states, lambda r: np.ones(r.shape[0]))
    assert np.max(np.abs(G - np.eye(len(states)))) <= 1e-8
    T = quad.quadrature_matrix(states, lambda r: r[:, 0] ** 2 / (1 + np.sum(r * r, axis=1)))
    expected = np.array([cpn.cpn_model_eigenvalue(params, s.index) for s in states])
    assert np.max(np.abs(T - np.diag(expected))) <= 1e-8


# ---------------------------------------------------------------- sup norms

def test_sup_norm_spot_values():
    for N in (1, 5, 30):
        s = state(2, N, (0, 0))
        assert cpn.cpn_sup_norm_closed(s).to_float() == pytest.approx(
            math.sqrt((N + 2) * (N + 1) / (2 * math.pi) ** 2), rel=1e-13)
    assert cpn.cpn_sup_norm_closed(state(1, 2, (1,))).to_float() == pytest.approx(math.sqrt(3 / math.pi) / 2)
    assert cpn.cpn_critical_point(state(2, 10, (4, 2))) == pytest.approx((1.0, math.sqrt(0.5)))


def test_degenerate_index():
    s = state(1, 4, (4,))
    with pytest.raises(cpn.DegenerateIndexError):
        cpn.cpn_sup_norm_closed(s)
    with pytest.raises(cpn.DegenerateIndexError):
        cpn.cpn_critical_point(s)
    # |e_(N)| = Lambda |w|^N (1+|w|^2)^(-N/2) increases to Lambda at infinity
    assert cpn.cpn_sup_norm_homogeneous(s).to_float() == pytest.approx(s.normalizer.to_float())
    assert quad.sup_norm_search(s).value == pytest.approx(s.normalizer.to_float(), rel=1e-8)


@settings(max_examples=40)
@given(st.integers(1, 3).flatmap(lambda n: st.integers(1, 60).flatmap(
    lambda N: st.tuples(st.just(n), st.just(N), st.lists(st.integers(0, N), min_size=n, max_size=n)
                        .filter(lambda a: sum(a) < N)))))
def test_homogeneous_sup_equals_closed(args):
    n, N, a = args
    s = state(n, N, a)
    assert cpn.cpn_sup_norm_homogeneous(s).log_mag == pytest.approx(cpn.cpn_sup_norm_closed(s).log_mag, abs=1e-12)


@pytest.mark.parametrize("n,N", [(1, 2), (1, 11), (1, 30), (2, 3), (2, 12)])
def test_sup_closed_vs_search(n, N):
    params = CPnParams(n, N)
    for a in list(params.indices())[:: max(1, params.dimension // 12)]:
        s = CPnState(params, a)
        found = quad.sup_norm_search(s).value
        assert found == pytest.approx(cpn.cpn_norm(s, math.inf).to_float(), rel=1e-6)


def test_single_mode_maximizes_sup_at_half_level():
    for N in range(2, 41):
        k = N // 2
        params = CPnParams(2, N)
        sups = {a: cpn.cpn_sup_norm_closed(CPnState(params, a)).log_mag for a in multi_indices(2, k)}
        best = max(sups.values())
        winners = {a for a, v in sups.items() if v >= best - 1e-12}
        assert winners <= {(k, 0), (0, k)}


# ---------------------------------------------------------------- L^p norms

def test_p2_normalization_up_to_N200():
    worst = 0.0
    for n in (1, 2, 3):
        for N in range(1, 201):
            for a1 in range(N + 1):
                worst = max(worst, abs(cpn.cpn_lp_norm_closed(CPnParams(n, N), a1, 2).to_float() - 1))
    assert worst <= 1e-12


def test_lp_spot_value():
    v = cpn.cpn_lp_norm_closed(CPnParams(1, 2), 1, 4).to_float()
    assert v == pytest.approx((3 / (5 * math.pi)) ** 0.25, rel=1e-14)
    assert v == pytest.approx(0.6610744, abs=1e-7)
    with pytest.raises(ValueError):
        cpn.cpn_lp_norm_closed(CPnParams(2, 4), (1, 1), 4)
    with pytest.raises(ValueError):
        cpn.cpn_lp_norm_closed(CPnParams(1, 4), 1, math.inf)


@settings(max_examples=60)
@given(st.integers(1, 3), st.integers(1, 80), st.floats(2.0, 40.0), st.data())
def test_single_mode_closed_equals_general_form(n, N, p, data):
    a1 = data.draw(st.integers(0, N))
    params = CPnParams(n, N)
    closed = cpn.cpn_lp_norm_closed(params, a1, p).log_mag
    general = cpn.cpn_lp_norm_general(CPnState(params, (a1,) + (0,) * (n - 1)), p).log_mag
    assert closed == pytest.approx(general, abs=1e-10)


@settings(max_examples=60)
@given(st.integers(1, 3), st.integers(1, 80), st.floats(2.0, 40.0), st.data())
def test_holder_interpolation(n, N, p, data):
    a = data.draw(st.lists(st.integers(0, N), min_size=n, max_size=n).filter(lambda a: sum(a) <= N))
    s = state(n, N, a)
    assert cpn.cpn_norm(s, p).log_mag <= (1 - 2 / p) * cpn.cpn_norm(s, math.inf).log_mag + 1e-10


def test_general_form_against_quadrature():
    s = state(2, 6, (2, 1))
    assert cpn.cpn_lp_norm_general(s, 4).to_float() == pytest.approx(quad.lp_norm_quadrature(s, 4), rel=1e-8)
    assert quad.lp_norm_quadrature(state(1, 2, (1,)), 2) == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------- asymptotics

def test_asymptotic_constants():
    assert cpn.cpn_asymptotic_constant(1, math.inf) == pytest.approx((math.sqrt(2) * math.pi ** 1.5) ** -0.5)
    # the commonly quoted 0.35638 is a rounding of 0.356353
    assert cpn.cpn_asymptotic_constant(1, math.inf) == pytest.approx(0.35638, abs=5e-5)
    assert cpn.cpn_asymptotic_constant(1, 2) == pytest.approx(1.0)
    assert cpn.cpn_exponent(1, 2) == 0.0
    assert cpn.cpn_exponent(2, 4) == pytest.approx(0.375)
    assert cpn.cpn_asymptotic_constant(2, 4) == pytest.approx(0.5 ** 0.375 * (math.pi ** 2.5 * 2 ** 1.5) ** -0.25)
    assert cpn.saturating_index(2, 7) == (3, 0)
