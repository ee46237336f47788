import math
import warnings

import numpy as np
import pytest

from berezin_lp import fbi
from berezin_lp.fbi import Grid1D, PhaseGrid, SampledFunction1D, SampledPhaseSpaceFunction


def hermite_input(variant, N, k):
    xg = fbi.default_x_grid(N, k, variant)
    f = (lambda x: fbi.hermite_function(k, x)) if variant == "appendix" else \
        (lambda x: fbi.semiclassical_hermite(k, N, x))
    return SampledFunction1D.from_function(f, xg)


def gaussian_input(variant, N, center=0.3):
    u = hermite_input(variant, N, 0)
    scale = 1.0 if variant == "appendix" else math.sqrt(N)
    vals = np.exp(-0.5 * (scale * (u.grid.nodes - center / scale)) ** 2 * 1.7)
    out = SampledFunction1D(u.grid, vals.astype(complex))
    out.values /= out.norm()
    return out


def test_hermite_functions_orthonormal():
    x = np.linspace(-20, 20, 8001)
    h = np.array([fbi.hermite_function(k, x) for k in range(6)])
    G = h @ h.T * (x[1] - x[0])
    assert np.max(np.abs(G - np.eye(6))) <= 1e-12
    with pytest.raises(ValueError):
        fbi.hermite_function(-1, x)


def test_grid_and_decay_checks():
    g = Grid1D.symmetric(1.0, 0.25)
    assert g.nodes == pytest.approx([-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1])
    with pytest.raises(fbi.GridTooSmallError):
        SampledFunction1D.from_function(lambda x: np.exp(-x * x), Grid1D.symmetric(1.0, 0.1))
    with pytest.raises(ValueError):
        fbi.default_x_grid(16, 0, "other")


@pytest.mark.parametrize("variant", fbi.VARIANTS)
@pytest.mark.parametrize("k", [0, 2])
def test_isometry_hermite(variant, k):
    assert fbi.isometry_ratio(variant, hermite_input(variant, 16, k), 16) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("variant", fbi.VARIANTS)
def test_isometry_gaussian(variant):
    u = gaussian_input(variant, 16)
    assert fbi.isometry_ratio(variant, u, 16) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("variant", fbi.VARIANTS)
def test_zero_maps_to_zero(variant):
    u = hermite_input(variant, 16, 0)
    zero = SampledFunction1D(u.grid, np.zeros_like(u.values))
    v = fbi._forward(variant, zero, 16, fbi.default_phase_grid(16, 0, variant))
    assert np.all(v.values == 0)
    assert fbi.pi_phi_project(SampledPhaseSpaceFunction(v.grid, v.values), 16).norm() == 0
    assert fbi.dbar_residual(variant, zero, 16, fbi.default_phase_grid(16, 0, variant)) == 0.0


@pytest.mark.parametrize("variant", fbi.VARIANTS)
def test_range_is_holomorphic(variant):
    assert fbi.dbar_residual(variant, hermite_input(variant, 16, 1), 16) <= 1e-6


def test_dbar_detects_missing_weight():
    # without removing the weight the transform output is not holomorphic
    u = hermite_input("phi", 16, 1)
    grid = fbi.default_phase_grid(16, 1, "phi")
    z = grid.points()[4:-4, 4:-4].ravel()
    d = 1e-4
    F = lambda p: fbi.transform_pointwise("phi", u, 16, p)
    dbar = 0.5 * ((F(z + d) - F(z - d)) + 1j * (F(z + 1j * d) - F(z - 1j * d))) / (2 * d)
    assert np.linalg.norm(dbar) > 1e-2 * np.linalg.norm(F(z))


def test_adjoint_consistency_random_pairs():
    N = 16
    rng = np.random.default_rng(5)
    for variant in fbi.VARIANTS:
        xg = fbi.default_x_grid(N, 0, variant)
        grid = fbi.default_phase_grid(N, 0, variant)
        for _ in range(3):
            c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            scale = math.sqrt(N) if variant == "phi" else 1.0
            u = SampledFunction1D(xg, sum(c[k] * fbi.hermite_function(k, scale * xg.nodes)
                                          for k in range(4)).astype(complex))
            vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            pts = grid.points()
            v = SampledPhaseSpaceFunction(grid, vals * np.exp(-N * np.abs(pts) ** 2 / 4))
            Bu = fbi._forward(variant, u, N, grid)
            lhs = Bu.inner(v)
            rhs = u.inner(fbi.fbi_adjoint(variant, v, N, xg))
            assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(lhs))


def test_adjoint_inverts_forward_phi():
    u = gaussian_input("phi", 16)
    back = fbi.fbi_adjoint_phi(fbi.fbi_forward_phi(u, 16), 16, u.grid)
    diff = SampledFunction1D(u.grid, back.values - u.values)
    assert diff.norm() <= 1e-4


def test_projector_fixes_range_and_is_idempotent():
    N = 16
    u = hermite_input("phi", N, 1)
    v = fbi.fbi_forward_phi(u, N)
    pv = fbi.pi_phi_project(v, N)
    assert SampledPhaseSpaceFunction(v.grid, pv.values - v.values).norm() <= 1e-4 * v.norm()
    ppv = fbi.pi_phi_project(pv, N)
    assert SampledPhaseSpaceFunction(v.grid, ppv.values - pv.values).norm() <= 1e-4 * pv.norm()


def test_projector_positivity():
    N = 16
    grid = fbi.default_phase_grid(N, 0, "phi")
    pts = grid.points()
    rng = np.random.default_rng(0)
    for _ in range(5):
        vals = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * np.exp(-N * np.abs(pts) ** 2 / 8)
        v = SampledPhaseSpaceFunction(grid, vals)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", fbi.GridWarning)
            pv = fbi.pi_phi_project(v, N)
        assert v.inner(pv).real >= -1e-10


def test_projector_kernel_matches_closed_form():
    N = 16
    grid = fbi.default_phase_grid(N, 0, "phi")
    xg = fbi.default_x_grid(N, 0, "phi")
    K = fbi.kernel_matrix("phi", N, grid, xg)
    z = grid.points().ravel()
    idx = [len(z) // 2, len(z) // 2 + 3, len(z) // 3]
    numeric = (K[idx] @ K[idx].conj().T) * xg.spacing
    closed = fbi.pi_phi_kernel(N, z[idx][:, None], z[idx][None, :])
    assert np.max(np.abs(numeric - closed)) <= 1e-8 * np.max(np.abs(closed))


def test_boundary_leak_warning():
    grid = fbi.default_phase_grid(16, 0, "phi")
    v = SampledPhaseSpaceFunction(grid, np.ones(grid.shape, dtype=complex))
    with pytest.warns(fbi.GridWarning):
        fbi.pi_phi_project(v, 16)


def test_nyquist_warning():
    u = SampledFunction1D.from_function(lambda x: fbi.semiclassical_hermite(0, 16, x), Grid1D.symmetric(3.0, 0.2))
    with pytest.warns(fbi.GridWarning):
        fbi.fbi_forward_phi(u, 16)


def test_conjugation_residual_decays_and_correction_matters():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", fbi.GridWarning)
        for k in (0, 1):
            r16 = fbi.conjugation_residual(k, 16)
            r64 = fbi.conjugation_residual(k, 64)
            assert r64.residual < r16.residual
            for N, r in ((16, r16), (64, r64)):
                u = fbi.conjugation_residual(k, N, corrected=False)
                assert u.residual > r.residual
                # the missing shift contributes exactly (1/N) ||B u||
                assert u.residual == pytest.approx(1.0 / N, rel=1e-6)
            assert r16.eigenvalue == pytest.approx((2 * k + 1) / 16)


def test_conjugation_constant_symbol():
    N = 16
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", fbi.GridWarning)
        r = fbi.conjugation_residual(0, N, symbol=lambda z: np.full(z.shape, 1.0 / N))
    assert r.residual <= 1e-8


def test_lp_norm_phase_space():
    N = 16
    v = fbi.fbi_forward_phi(hermite_input("phi", N, 0), N)
    assert fbi.lp_norm_phase_space(v, 2) == pytest.approx(1.0, abs=1e-4)
    grid = PhaseGrid(Grid1D.symmetric(1.0, 0.1), Grid1D.symmetric(1.0, 0.1))
    ind = np.zeros(grid.shape, dtype=complex)
    ind[5:10, 5:10] = 2.0
    w = SampledPhaseSpaceFunction(grid, ind)
    assert fbi.lp_norm_phase_space(w, math.inf) == 2.0
    assert fbi.lp_norm_phase_space(w, 4) == pytest.approx((16 * 25 * 0.01) ** 0.25)
