import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from berezin_lp import cpn, fock, quad, spectral
from berezin_lp.cpn import CPnParams, CPnState, CPnSymbol
from berezin_lp.fock import FockParams, FockSymbol
from berezin_lp.spectral import build_matrix, window_members


# ---------------------------------------------------------------- assembly

def test_fock_harmonic_matrix():
    M = build_matrix("fock", FockSymbol.harmonic(1), FockParams(1, 4), truncation=6)
    assert M.is_diagonal()
    assert np.allclose(np.diag(M.entries), np.arange(1, 8) / 4, rtol=0, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_harmonic_spectrum_and_multiplicities(n):
    for N in (1, 7, 20):
        M = build_matrix("fock", FockSymbol.harmonic(n), FockParams(n, N), truncation=6)
        assert M.is_diagonal(tol=0.0)
        expected = [(sum(a) + n) / N for a in M.indices]
        assert np.max(np.abs(np.diag(M.entries) - expected)) <= 1e-14
        for k in range(7):
            assert sum(1 for a in M.indices if sum(a) == k) == math.comb(k + n - 1, n - 1)


def test_identity_symbol():
    M = build_matrix("cpn", CPnSymbol.constant(2), CPnParams(2, 3))
    assert np.allclose(M.entries, np.eye(M.size), atol=1e-13)
    M = build_matrix("fock", FockSymbol.constant(2), FockParams(2, 3), truncation=3)
    assert np.array_equal(M.entries, np.eye(M.size))


def test_assembly_errors():
    with pytest.raises(ValueError):
        build_matrix("fock", FockSymbol.harmonic(1), FockParams(1, 2))
    with pytest.raises(spectral.SpectralError):
        build_matrix("fock", FockSymbol.monomial((1,), (0,)), FockParams(1, 2), truncation=3)
    with pytest.raises(cpn.UnsupportedSymbolError):
        build_matrix("cpn", FockSymbol.harmonic(1), CPnParams(1, 2))
    with pytest.raises(ValueError):
        build_matrix("torus", FockSymbol.harmonic(1), CPnParams(1, 2))


def test_spectral_radius_bounded_by_symbol_sup():
    # (w + conj w)/(1 + |w|^2) has sup 1 on the chart
    sym = CPnSymbol(1, {((1,), (0,), 1): 1.0, ((0,), (1,), 1): 1.0})
    for N in (1, 5, 20):
        M = build_matrix("cpn", sym, CPnParams(1, N))
        assert M.is_hermitian()
        assert np.max(np.abs(np.linalg.eigvalsh(M.entries))) <= 1 + 1e-12
        H2 = build_matrix("cpn", CPnSymbol.H_power(2, 2), CPnParams(2, N))
        assert np.max(np.abs(np.linalg.eigvalsh(H2.entries))) <= 1 + 1e-12


def test_eigendecompose():
    vals, vecs = spectral.eigendecompose(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(vals, [1, 2, 3])
    assert np.allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]])
    rng = np.random.default_rng(7)
    A = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
    H = A + A.conj().T
    vals, vecs = spectral.eigendecompose(H)
    assert np.max(np.abs(vecs @ np.diag(vals) @ vecs.conj().T - H)) <= 1e-10 * np.abs(H).max()
    with pytest.raises(ValueError):
        spectral.eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_spectrum_of_non_diagonal_matrix():
    M = build_matrix("fock", FockSymbol.re_z(1), FockParams(1, 1), truncation=1)
    spec = spectral.spectrum_of(M)
    assert spec.vectors is not None
    assert np.allclose(spec.values, [-0.5, 0.5])


# ---------------------------------------------------------------- windows

def test_window_examples():
    w = window_members(CPnParams(1, 10), 0.5, 1.0)
    assert w.count == 3
    assert sorted(v for v, _ in w.members) == pytest.approx([5 / 12, 6 / 12, 7 / 12])
    h = spectral.harmonic_spectrum(FockParams(1, 8), 20)
    w = window_members(h, 1.0, 0.5)
    assert [lab for _, lab in w.members] == [(7,)]
    assert window_members(CPnParams(1, 10), 0.5 + 1 / 24, 1e-6).empty


def test_window_validation_and_expansion():
    with pytest.raises(ValueError):
        window_members(CPnParams(1, 10), 0.5, 0.0)
    w = spectral.expand_window(spectral.cpn_model_spectrum(CPnParams(1, 10)), 0.5 + 1 / 24, 1e-3)
    assert not w.empty and w.expanded_from == 1e-3
    with pytest.raises(spectral.EmptyWindowError):
        spectral.expand_window(spectral.cpn_model_spectrum(CPnParams(1, 10)), 5.0, 1e-3, max_steps=3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2), st.integers(2, 30), st.floats(0.05, 0.95), st.floats(0.1, 4.0))
def test_window_count_closed_matches_matrix_path(n, N, E, C):
    M = build_matrix("cpn", CPnSymbol.H(n), CPnParams(n, N))
    assert window_members(M, E, C).count == spectral.window_count_closed(n, N, E, C)
    assert window_members(CPnParams(n, N), E, C).count == spectral.window_count_closed(n, N, E, C)


# ---------------------------------------------------------------- quasimodes

def test_single_member_quasimode():
    w = window_members(CPnParams(1, 8), 0.4, 0.5)
    assert w.count == 1
    qm = spectral.sample_quasimode(w, 3)
    assert abs(qm.coefficients[0]) == pytest.approx(1.0, abs=1e-15)
    s = qm.states[0]
    assert spectral.quasimode_sup_norm(qm).value == pytest.approx(
        cpn.cpn_sup_norm_closed(s).to_float(), rel=1e-8)


def test_quasimode_determinism_and_normalization():
    w = window_members(CPnParams(1, 200), 0.5, 1.0)
    a = spectral.sample_quasimode(w, 11)
    b = spectral.sample_quasimode(w, 11)
    assert np.array_equal(a.coefficients, b.coefficients)
    worst = 0.0
    for seed in range(10_000):
        qm = spectral.sample_quasimode(w, seed)
        worst = max(worst, abs(np.linalg.norm(qm.coefficients) - 1))
    assert worst <= 1e-14
    with pytest.raises(ValueError):
        spectral.quasimode_from_coefficients(w, [1.0])


def test_quasimode_is_unit_in_L2_and_interpolates():
    w = window_members(CPnParams(1, 60), 0.5, 1.0)
    qm = spectral.sample_quasimode(w, 0)
    assert quad.lp_norm_quadrature(qm, 2) == pytest.approx(1.0, abs=1e-9)
    sup = spectral.quasimode_sup_norm(qm).value
    assert quad.lp_norm_quadrature(qm, 4) <= math.sqrt(sup) * (1 + 1e-9)


def test_quasimode_through_eigenvectors():
    M = build_matrix("fock", FockSymbol.re_z(1), FockParams(1, 1), truncation=1)
    w = window_members(M, 0.5, 0.1, N=1)
    qm = spectral.sample_quasimode(w, 0)
    assert np.allclose(np.abs(qm.basis_coefficients), [1 / math.sqrt(2)] * 2)


@settings(max_examples=100)
@given(st.integers(20, 400), st.floats(0.2, 3.0), st.floats(-0.9, 0.9), st.data())
def test_off_window_mass_bound_holds(N, C, shift, data):
    E = 0.5
    mu = E + shift * C / N
    m = data.draw(st.integers(2, 12))
    lam = E + np.array(data.draw(st.lists(st.floats(-5.0, 5.0), min_size=m, max_size=m))) / N
    coeffs = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=m, max_size=m)))
    if np.linalg.norm(coeffs) == 0:
        coeffs[0] = 1.0
    coeffs = coeffs / np.linalg.norm(coeffs)
    mass, bound = spectral.off_window_mass_bound(coeffs, lam, mu, E, C, N)
    assert mass <= bound * (1 + 1e-12) + 1e-15


def test_off_window_mass_bound_needs_interior_mu():
    with pytest.raises(ValueError):
        spectral.off_window_mass_bound([1.0], [0.5], 0.7, 0.5, 1.0, 10)


# ---------------------------------------------------------------- kernels and projector

def test_fejer_kernel():
    k = spectral.fejer_kernel(1.5)
    assert k(0.0) == 1.0
    assert k(2 * math.pi / 1.5) == pytest.approx(0.0, abs=1e-30)
    assert k.integral == pytest.approx(2 * math.pi / 1.5)
    for xi in (0.05, 0.4, 1.0, 1.4, 2.0):
        val = 2 * integrate.quad(lambda t: float(k(t)), 0, np.inf, weight="cos", wvar=xi, limlst=200)[0]
        assert val == pytest.approx(float(k.fourier(xi)), abs=2e-3)
    with pytest.raises(ValueError):
        spectral.fejer_kernel(0.0)


def test_bump_kernel():
    k = spectral.bump_kernel(1.0)
    assert k(0.0) == pytest.approx(1.0)
    t = np.linspace(-200, 200, 4001)
    assert np.min(k(t)) >= 0
    for xi in (1.2, 2.0):
        val = 2 * integrate.quad(lambda s: float(k(s)), 0, np.inf, weight="cos", wvar=xi, limlst=200)[0]
        assert abs(val) <= 1e-6


def test_projector_diagonal_trivial_cases():
    spec = spectral.cpn_model_spectrum(CPnParams(1, 30))
    zero = spectral.WindowKernel(lambda t: np.zeros_like(np.asarray(t, dtype=float)), 1.0, "zero")
    pd = spectral.projector_diagonal(spec, zero, 0.5)
    assert np.all(pd.values == 0) and pd.sup == 0
    single = spectral.cpn_model_spectrum(CPnParams(1, 30), levels=[12])
    E = single.values[0]
    pd = spectral.projector_diagonal(single, spectral.fejer_kernel(1.0), E, radii=np.linspace(0, 3, 31))
    s = CPnState(CPnParams(1, 30), (12,))
    expected = np.exp(2 * s.log_abs(np.linspace(0, 3, 31)[:, None].astype(complex)))
    assert np.allclose(pd.values, expected, rtol=1e-12)
    assert pd.integral == pytest.approx(1.0, rel=1e-8)
    assert pd.sup == pytest.approx(cpn.cpn_sup_norm_closed(s).to_float() ** 2, rel=1e-10)


def test_projector_diagonal_integral_equals_trace():
    spec = spectral.cpn_model_spectrum(CPnParams(1, 100))
    pd = spectral.projector_diagonal(spec, spectral.fejer_kernel(1.0), 0.5)
    assert pd.integral == pytest.approx(pd.trace, rel=1e-8)


def test_slope_fit():
    f = spectral.slope_fit([(N, 3 * N ** 2) for N in (10, 20, 40, 80)])
    assert f.slope == pytest.approx(2.0) and f.intercept == pytest.approx(math.log(3)) and f.r2 == pytest.approx(1.0)
    assert spectral.slope_fit([(N, 5.0) for N in (1, 2, 3, 4)]).slope == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        spectral.slope_fit([(1, 1.0), (2, 2.0), (3, 3.0)])
    with pytest.raises(ValueError):
        spectral.slope_fit([(1, 1.0), (2, -2.0), (3, 3.0), (4, 1.0)])


def test_fock_sup_slope_n2():
    pts = [(N, fock.fock_lp_norm_closed(fock.FockState(FockParams(2, N), (round(N / 2), 0)), math.inf).to_float())
           for N in (250, 500, 1000, 2000, 4000)]
    assert spectral.slope_fit(pts).slope == pytest.approx(0.75, abs=0.01)
