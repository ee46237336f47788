"""Discretized FBI (Bargmann-type) transforms in one real dimension.

Two normalizations are provided:

* ``appendix``: L^2(R) -> F_N, output weighted by exp(-N|z|^2/2);
  Bu(z) = (N/pi)^(1/2) 2^(1/4) int exp(2 sqrt(pi N) x z - pi x^2 - N z^2/2) u(x) dx * exp(-N|z|^2/2).
* ``phi``: L^2(R) -> H_Phi with Phi(z) = Im(z)^2/2, output weighted by exp(-N Im(z)^2/2);
  Bu(z) = 2^(-1/2) (N/pi)^(3/4) exp(-N Im(z)^2/2) int exp(-N (z - x)^2/2) u(x) dx.

All transforms are direct Riemann sums on uniform grids, which are spectrally
accurate for the Gaussian-class inputs used here. The adjoint and the
projector are the exact discrete adjoints, so ``pi_phi_project = B B^*`` is
Hermitian positive semidefinite on the grid.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fock import INF, check_p

VARIANTS = ("appendix", "phi")


class GridWarning(UserWarning):
    pass


class GridTooSmallError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    center: float
    spacing: float
    count: int

    def __post_init__(self):
        if not self.spacing > 0 or self.count < 2:
            raise ValueError("need spacing > 0 and at least two nodes")

    @property
    def nodes(self) -> np.ndarray:
        return self.center + self.spacing * (np.arange(self.count) - 0.5 * (self.count - 1))

    @classmethod
    def symmetric(cls, half_extent: float, spacing: float, center: float = 0.0) -> "Grid1D":
        count = 2 * int(math.ceil(half_extent / spacing)) + 1
        return cls(center, spacing, count)


@dataclass
class SampledFunction1D:
    grid: Grid1D
    values: np.ndarray

    @classmethod
    def from_function(cls, f: Callable, grid: Grid1D, check_decay: bool = True,
                      tol: float = 1e-12) -> "SampledFunction1D":
        vals = np.asarray(f(grid.nodes), dtype=complex)
        out = cls(grid, vals)
        if check_decay:
            out.check_decay(tol)
        return out

    def check_decay(self, tol: float = 1e-12) -> None:
        peak = np.max(np.abs(self.values), initial=0.0)
        edge = max(abs(self.values[0]), abs(self.values[-1]))
        if peak > 0 and edge > tol * peak:
            raise GridTooSmallError(
                f"boundary value {edge:.3g} exceeds {tol:g} of the peak {peak:.3g}; widen the grid")

    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.spacing))

    def inner(self, other: "SampledFunction1D") -> complex:
        return complex(np.vdot(self.values, other.values) * self.grid.spacing)


@dataclass(frozen=True)
class PhaseGrid:
    re: Grid1D
    im: Grid1D

    @property
    def cell(self) -> float:
        return self.re.spacing * self.im.spacing

    @property
    def shape(self) -> tuple:
        return (self.re.count, self.im.count)

    def points(self) -> np.ndarray:
        r, s = np.meshgrid(self.re.nodes, self.im.nodes, indexing="ij")
        return r + 1j * s


@dataclass
class SampledPhaseSpaceFunction:
    """Weighted function on a rectangle of C; the discrete L^2 norm approximates the L^2(C) norm."""

    grid: PhaseGrid
    values: np.ndarray

    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell))

    def inner(self, other: "SampledPhaseSpaceFunction") -> complex:
        return complex(np.vdot(self.values, other.values) * self.grid.cell)

    def boundary_fraction(self) -> float:
        v = np.abs(self.values)
        peak = v.max(initial=0.0)
        if peak == 0:
            return 0.0
        edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
        return float(edge / peak)


def hermite_function(k: int, x) -> np.ndarray:
    """L^2-normalized Hermite function h_k by the stable three-term recursion."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    for j in range(k):
        h_prev, h = h, math.sqrt(2.0 / (j + 1)) * x * h - math.sqrt(j / (j + 1)) * h_prev
    return h


def semiclassical_hermite(k: int, N: int, x) -> np.ndarray:
    """u_k(x) = N^(1/4) h_k(sqrt(N) x), eigenfunction of the Weyl quantization of x^2 + xi^2
    with eigenvalue (2k + 1)/N."""
    return N ** 0.25 * hermite_function(k, math.sqrt(N) * np.asarray(x, dtype=float))


def default_x_grid(N: int, k: int, variant: str) -> Grid1D:
    """Input grid: scaled Hermite states for ``phi``, unscaled ones for ``appendix``."""
    reach = math.sqrt(2 * k + 1) + 10.0
    if variant == "phi":
        return Grid1D.symmetric(reach / math.sqrt(N), 1.0 / (8.0 * math.sqrt(N)))
    if variant == "appendix":
        return Grid1D.symmetric(reach, 0.05)
    raise ValueError(f"unknown variant {variant!r}")


def default_phase_grid(N: int, k: int, variant: str) -> PhaseGrid:
    """Spacing 1/(4 sqrt N) per axis, extent 8/sqrt(N) beyond the classical region."""
    h = 1.0 / (4.0 * math.sqrt(N))
    reach = math.sqrt(2 * k + 1) + 8.0
    if variant == "phi":
        ext_r = ext_s = reach / math.sqrt(N)
    elif variant == "appendix":
        ext_r = math.sqrt(math.pi / N) * reach
        ext_s = reach / (2.0 * math.sqrt(math.pi * N))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return PhaseGrid(Grid1D.symmetric(ext_r, h), Grid1D.symmetric(ext_s, h))


def _log_kernel(variant: str, N: int, z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Complex log of the full weighted kernel K(z, x), shape z.shape + x.shape."""
    z = z[..., None]
    r, s = z.real, z.imag
    if variant == "appendix":
        # 2 sqrt(pi N) x z - pi x^2 - N z^2/2 - N|z|^2/2 collapses to a real Gaussian plus a phase
        c = 0.5 * math.log(N / math.pi) + 0.25 * math.log(2.0)
        return (c - math.pi * (x - math.sqrt(N / math.pi) * r) ** 2
                + 1j * (2.0 * math.sqrt(math.pi * N) * x * s - N * r * s))
    if variant == "phi":
        c = -0.5 * math.log(2.0) + 0.75 * math.log(N / math.pi)
        return c - 0.5 * N * (r - x) ** 2 + 1j * N * s * (x - r)
    raise ValueError(f"unknown variant {variant!r}")


def kernel_matrix(variant: str, N: int, grid: PhaseGrid, xgrid: Grid1D) -> np.ndarray:
    """Matrix of K(z, x) with rows over flattened phase-space nodes."""
    z = grid.points().ravel()
    return np.exp(_log_kernel(variant, N, z, xgrid.nodes))


def _nyquist_check(variant: str, N: int, grid: PhaseGrid, xgrid: Grid1D) -> None:
    smax = max(abs(grid.im.nodes[0]), abs(grid.im.nodes[-1]))
    freq = 2.0 * math.sqrt(math.pi * N) * smax if variant == "appendix" else N * smax
    if freq * xgrid.spacing >= math.pi:
        warnings.warn(f"x spacing {xgrid.spacing:.3g} under-resolves the kernel oscillation "
                      f"(frequency {freq:.3g})", GridWarning, stacklevel=3)


def transform_pointwise(variant: str, u: SampledFunction1D, N: int, z) -> np.ndarray:
    """Weighted transform of u at arbitrary complex points z."""
    z = np.asarray(z, dtype=complex)
    K = np.exp(_log_kernel(variant, N, z, u.grid.nodes))
    return (K @ u.values) * u.grid.spacing


def _forward(variant: str, u: SampledFunction1D, N: int, grid: Optional[PhaseGrid]):
    if grid is None:
        k_guess = _reach_index(u, N, variant)
        grid = default_phase_grid(N, k_guess, variant)
    _nyquist_check(variant, N, grid, u.grid)
    K = kernel_matrix(variant, N, grid, u.grid)
    vals = (K @ u.values) * u.grid.spacing
    return SampledPhaseSpaceFunction(grid, vals.reshape(grid.shape))


def _reach_index(u: SampledFunction1D, N: int, variant: str) -> int:
    # smallest k whose classical region covers the bulk of u
    x = u.grid.nodes
    w = np.abs(u.values) ** 2
    if w.sum() == 0:
        return 0
    m2 = float(np.sum(w * x * x) / w.sum())
    scale = N if variant == "phi" else 1.0
    return max(0, int(math.ceil(m2 * scale - 0.5)))


def fbi_forward_appendix(u: SampledFunction1D, N: int, grid: Optional[PhaseGrid] = None):
    return _forward("appendix", u, N, grid)


def fbi_forward_phi(u: SampledFunction1D, N: int, grid: Optional[PhaseGrid] = None):
    return _forward("phi", u, N, grid)


def fbi_adjoint(variant: str, v: SampledPhaseSpaceFunction, N: int, xgrid: Grid1D) -> SampledFunction1D:
    """Exact adjoint of the discrete forward map for the grid inner products."""
    K = kernel_matrix(variant, N, v.grid, xgrid)
    vals = (K.conj().T @ v.values.ravel()) * v.grid.cell
    return SampledFunction1D(xgrid, vals)


def fbi_adjoint_phi(v: SampledPhaseSpaceFunction, N: int, xgrid: Grid1D) -> SampledFunction1D:
    return fbi_adjoint("phi", v, N, xgrid)


def pi_phi_project(v: SampledPhaseSpaceFunction, N: int, xgrid: Optional[Grid1D] = None,
                   leak_tol: float = 1e-8) -> SampledPhaseSpaceFunction:
    """Orthogonal projector onto the range of the phi transform, as B B^*.

    Its kernel is (N/2pi) exp(-N Im(z)^2/2) exp(-N(z - conj(w))^2/4) exp(-N Im(w)^2/2).
    """
    if v.boundary_fraction() > leak_tol:
        warnings.warn(f"input reaches the grid boundary (relative {v.boundary_fraction():.3g})",
                      GridWarning, stacklevel=2)
    if xgrid is None:
        ext = max(abs(v.grid.re.nodes[0]), abs(v.grid.re.nodes[-1])) + 10.0 / math.sqrt(N)
        xgrid = Grid1D.symmetric(ext, 1.0 / (8.0 * math.sqrt(N)))
    K = kernel_matrix("phi", N, v.grid, xgrid)
    back = (K.conj().T @ v.values.ravel()) * v.grid.cell
    vals = (K @ back) * xgrid.spacing
    return SampledPhaseSpaceFunction(v.grid, vals.reshape(v.grid.shape))


def pi_phi_kernel(N: int, z, w) -> np.ndarray:
    """Closed-form kernel of the projector, for cross-checks against B B^*."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return (N / (2 * math.pi) * np.exp(-0.5 * N * z.imag ** 2 - 0.25 * N * (z - np.conj(w)) ** 2
                                       - 0.5 * N * w.imag ** 2))


def isometry_ratio(variant: str, u: SampledFunction1D, N: int, grid: Optional[PhaseGrid] = None) -> float:
    out = _forward(variant, u, N, grid)
    return out.norm() / u.norm()


def holomorphic_weight(variant: str, N: int, z) -> np.ndarray:
    """exp of the weight removed by the transform: N|z|^2/2 or N Im(z)^2/2."""
    z = np.asarray(z, dtype=complex)
    if variant == "appendix":
        return 0.5 * N * np.abs(z) ** 2
    if variant == "phi":
        return 0.5 * N * z.imag ** 2
    raise ValueError(f"unknown variant {variant!r}")


def dbar_residual(variant: str, u: SampledFunction1D, N: int, grid: Optional[PhaseGrid] = None,
                  delta: Optional[float] = None, interior: int = 4) -> float:
    """Relative size of d/dzbar of exp(weight) * (Bu) at interior grid nodes.

    Derivatives are centred differences at z +- delta, z +- i delta, combined
    over (delta, 2 delta) by Richardson extrapolation. The ratio is
    ||exp(-weight) dbar F|| / ||exp(-weight) d F|| on the node set.
    """
    if grid is None:
        grid = default_phase_grid(N, _reach_index(u, N, variant), variant)
    delta = delta or 1e-3 / math.sqrt(N)
    z = grid.points()[interior:-interior, interior:-interior].ravel()

    def F(pts):
        return np.exp(holomorphic_weight(variant, N, pts)) * transform_pointwise(variant, u, N, pts)

    def partials(d):
        fx = (F(z + d) - F(z - d)) / (2 * d)
        fy = (F(z + 1j * d) - F(z - 1j * d)) / (2 * d)
        return fx, fy

    fx1, fy1 = partials(delta)
    fx2, fy2 = partials(2 * delta)
    fx = (4 * fx1 - fx2) / 3
    fy = (4 * fy1 - fy2) / 3
    dbar = 0.5 * (fx + 1j * fy)
    d = 0.5 * (fx - 1j * fy)
    damp = np.exp(-holomorphic_weight(variant, N, z))
    den = np.linalg.norm(damp * d)
    return float(np.linalg.norm(damp * dbar) / den) if den > 0 else 0.0


def toeplitz_phi(symbol: Callable, v: SampledPhaseSpaceFunction, N: int,
                 xgrid: Optional[Grid1D] = None) -> SampledPhaseSpaceFunction:
    """T_Phi(f) v = Pi_Phi(f v) on the grid."""
    fv = SampledPhaseSpaceFunction(v.grid, symbol(v.grid.points()) * v.values)
    return pi_phi_project(fv, N, xgrid, leak_tol=INF)


@dataclass
class ConjugationResult:
    k: int
    N: int
    eigenvalue: float
    residual: float
    floor: float
    corrected: bool


def conjugation_residual(k: int, N: int, corrected: bool = True,
                         symbol: Optional[Callable] = None) -> ConjugationResult:
    """Relative residual ||T_Phi(f) B u_k - (2k+1)/N B u_k|| / ||B u_k||.

    f defaults to Re(z)^2 + Im(z)^2 - 1/N (or without the -1/N shift when
    ``corrected`` is False). ``floor`` estimates the discretization error as
    eigenvalue * ||Pi_Phi B u_k - B u_k|| / ||B u_k||.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    xg = default_x_grid(N, k, "phi")
    u = SampledFunction1D.from_function(lambda x: semiclassical_hermite(k, N, x), xg)
    grid = default_phase_grid(N, k, "phi")
    v = fbi_forward_phi(u, N, grid)
    lam = (2 * k + 1) / N
    if symbol is None:
        shift = 1.0 / N if corrected else 0.0
        symbol = lambda z: z.real ** 2 + z.imag ** 2 - shift
    tv = toeplitz_phi(symbol, v, N, xg)
    res = np.sqrt(np.sum(np.abs(tv.values - lam * v.values) ** 2) * grid.cell) / v.norm()
    pv = pi_phi_project(v, N, xg, leak_tol=INF)
    floor = lam * np.sqrt(np.sum(np.abs(pv.values - v.values) ** 2) * grid.cell) / v.norm()
    if floor > res:
        warnings.warn(f"residual {res:.3g} is below the discretization estimate {floor:.3g}",
                      GridWarning, stacklevel=2)
    return ConjugationResult(k, N, lam, float(res), float(floor), corrected)


def lp_norm_phase_space(v: SampledPhaseSpaceFunction, p: float) -> float:
    """Riemann-sum L^p norm on the grid; p = inf gives max |v|."""
    p = check_p(p)
    a = np.abs(v.values)
    if p == INF:
        return float(a.max(initial=0.0))
    return float((np.sum(a ** p) * v.grid.cell) ** (1.0 / p))
