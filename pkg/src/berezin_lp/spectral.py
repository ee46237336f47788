"""Spectral experiments on truncated Toeplitz matrices and diagonal model operators.

Eigenvalue windows |lambda - E| <= C/N, random quasimodes supported on a
window, smoothed spectral projector diagonals and log-log slope fits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from . import cpn as cpn_mod
from . import fock as fock_mod
from .cpn import CPnParams, CPnState, CPnSymbol
from .fock import FockParams, FockState, FockSymbol


class SpectralError(RuntimeError):
    pass


class EmptyWindowError(ValueError):
    pass


@dataclass
class ToeplitzMatrix:
    """T_N(f) in a truncated orthonormal basis (rows and columns follow ``indices``)."""

    space: str
    params: object
    indices: list
    entries: np.ndarray
    symbol: str

    def __post_init__(self):
        if self.space not in ("fock", "cpn"):
            raise ValueError(f"space must be 'fock' or 'cpn', got {self.space!r}")

    @property
    def size(self) -> int:
        return len(self.indices)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.entries), initial=0.0)))
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= tol * scale)

    def is_diagonal(self, tol: float = 0.0) -> bool:
        off = self.entries - np.diag(np.diag(self.entries))
        return bool(np.max(np.abs(off), initial=0.0) <= tol)

    def states(self) -> list:
        cls = FockState if self.space == "fock" else CPnState
        return [cls(self.params, a) for a in self.indices]


def build_matrix(space: str, symbol, params, truncation: Optional[int] = None) -> ToeplitzMatrix:
    """Assemble T_N(symbol) from closed-form matrix elements.

    Fock space needs ``truncation`` = K_max (indices with |alpha| <= K_max);
    the CP^n basis is finite and used whole.
    """
    if space == "fock":
        if not isinstance(symbol, FockSymbol):
            raise cpn_mod.UnsupportedSymbolError(f"unsupported Fock symbol {symbol!r}")
        if truncation is None:
            raise ValueError("Fock matrices need a truncation level K_max")
        indices = list(fock_mod.multi_indices_upto(params.n, truncation))
        element = lambda a, b: fock_mod.symbol_matrix_element(params, symbol, a, b)
    elif space == "cpn":
        if not isinstance(symbol, CPnSymbol):
            raise cpn_mod.UnsupportedSymbolError(f"unsupported CP^n symbol {symbol!r}")
        indices = list(params.indices())
        element = lambda a, b: cpn_mod.cpn_matrix_element(params, symbol, a, b)
    else:
        raise ValueError(f"unknown space {space!r}")
    k = len(indices)
    pos = {a: i for i, a in enumerate(indices)}
    entries = np.zeros((k, k), dtype=complex)
    # only pairs with matching index shifts can be nonzero
    shifts = sorted({(key[0], key[1]) for key in symbol.terms})
    for j, b in enumerate(indices):
        for alpha, beta in shifts:
            a = tuple(x + y - z for x, y, z in zip(b, alpha, beta))
            i = pos.get(a)
            if i is not None and entries[i, j] == 0:
                entries[i, j] = element(a, b)
    if np.all(entries.imag == 0):
        entries = entries.real
    out = ToeplitzMatrix(space, params, indices, entries, symbol.name)
    if not out.is_hermitian():
        raise SpectralError(f"assembled matrix for {symbol.name} is not Hermitian")
    return out


def eigendecompose(matrix, residual_tol: float = 1e-10):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    M = matrix.entries if isinstance(matrix, ToeplitzMatrix) else np.asarray(matrix)
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-12 * max(1.0, np.abs(M).max(initial=0.0)):
        raise ValueError("matrix is not Hermitian")
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigendecomposition failed; condition number "
                            f"{np.linalg.cond(M):.3g}") from exc
    norm = max(np.linalg.norm(M, 2), 1e-300)
    res = np.linalg.norm(M @ vecs - vecs * vals, axis=0)
    if res.max(initial=0.0) > residual_tol * norm:
        raise SpectralError(f"eigenpair residual {res.max():.3g} exceeds "
                            f"{residual_tol:g} * ||M|| = {residual_tol * norm:.3g}")
    return vals, vecs


@dataclass
class Spectrum:
    """Eigenvalues with labels; ``vectors`` is None for diagonal models (labels are basis indices)."""

    space: str
    params: object
    values: np.ndarray
    labels: list
    vectors: Optional[np.ndarray] = None
    basis: Optional[list] = None


def spectrum_of(matrix: ToeplitzMatrix) -> Spectrum:
    if matrix.is_diagonal():
        d = np.real(np.diag(matrix.entries))
        return Spectrum(matrix.space, matrix.params, d, list(matrix.indices))
    vals, vecs = eigendecompose(matrix)
    return Spectrum(matrix.space, matrix.params, vals, list(range(len(vals))), vecs,
                    list(matrix.indices))


def cpn_model_spectrum(params: CPnParams, levels: Optional[Sequence[int]] = None) -> Spectrum:
    """Spectrum of T_N(H) on CP^n by enumeration; ``levels`` restricts the a_1 values."""
    levels = range(params.N + 1) if levels is None else levels
    labels, values = [], []
    for k in levels:
        if 0 <= k <= params.N:
            for a in cpn_mod.level_indices(params, k):
                labels.append(a)
                values.append(cpn_mod.cpn_model_eigenvalue(params, a))
    return Spectrum("cpn", params, np.array(values, dtype=float), labels)


def harmonic_spectrum(params: FockParams, kmax: int) -> Spectrum:
    labels = list(fock_mod.multi_indices_upto(params.n, kmax))
    values = np.array([fock_mod.harmonic_eigenvalue(params, a) for a in labels])
    return Spectrum("fock", params, values, labels)


@dataclass
class SpectralWindow:
    E: float
    C: float
    N: int
    members: list
    spectrum: Optional[Spectrum] = None
    expanded_from: Optional[float] = None

    @property
    def count(self) -> int:
        return len(self.members)

    @property
    def empty(self) -> bool:
        return not self.members


def window_members(spectrum, E: float, C: float, N: Optional[int] = None) -> SpectralWindow:
    """All (eigenvalue, label) pairs with |lambda - E| <= C/N, multiplicities included.

    For the diagonal models pass a CPnParams / FockParams-backed Spectrum, or a
    CPnParams directly, in which case only the levels near E are enumerated.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    if isinstance(spectrum, CPnParams):
        params = spectrum
        N = params.N
        d = params.N + params.n + 1
        lo = math.floor((E - C / N) * d) - 2
        hi = math.ceil((E + C / N) * d) + 2
        spectrum = cpn_model_spectrum(params, range(max(lo, 0), min(hi, params.N) + 1))
    elif isinstance(spectrum, ToeplitzMatrix):
        spectrum = spectrum_of(spectrum)
    N = N if N is not None else spectrum.params.N
    half = C / N
    # small slack so levels sitting exactly on the window edge are kept
    tol = 1e-12 * max(1.0, abs(E))
    members = [(float(v), lab) for v, lab in zip(spectrum.values, spectrum.labels)
               if abs(v - E) <= half + tol]
    return SpectralWindow(E, C, N, members, spectrum)


def window_count_closed(n: int, N: int, E: float, C: float) -> int:
    """Sum of binom(N-k+n-1, n-1) over levels k with |(k+1)/(N+n+1) - E| <= C/N."""
    d = N + n + 1
    tol = 1e-12 * max(1.0, abs(E))
    return sum(math.comb(N - k + n - 1, n - 1) for k in range(N + 1)
               if abs((k + 1) / d - E) <= C / N + tol)


def expand_window(spectrum, E: float, C: float, factor: float = 2.0,
                  max_steps: int = 20) -> SpectralWindow:
    """Grow C geometrically until the window is nonempty; records the original C."""
    w = window_members(spectrum, E, C)
    c = C
    for _ in range(max_steps):
        if not w.empty:
            break
        c *= factor
        w = window_members(spectrum, E, c)
    if w.empty:
        raise EmptyWindowError(f"window around E={E} still empty after {max_steps} expansions")
    if c != C:
        w.expanded_from = C
    return w


@dataclass
class Quasimode:
    """Unit combination of window eigenfunctions, stored in the basis of states."""

    window: SpectralWindow
    coefficients: np.ndarray
    seed: Optional[int]
    states: list = field(default_factory=list)
    basis_coefficients: Optional[np.ndarray] = None
    radial = False

    @property
    def space(self) -> str:
        return "fock" if isinstance(self.states[0], FockState) else "cpn"

    @property
    def params(self):
        return self.states[0].params

    def index_spread(self) -> int:
        idx = np.array([s.index for s in self.states])
        return int((idx.max(axis=0) - idx.min(axis=0)).max())

    def _terms(self, w):
        w = np.asarray(w, dtype=complex)
        logs = np.stack([s.log_abs(w) for s in self.states], axis=-1)
        phases = np.stack([sum(a * np.angle(w[..., j]) for j, a in enumerate(s.index))
                           if any(s.index) else np.zeros(w.shape[:-1])
                           for s in self.states], axis=-1)
        return logs, phases

    def log_abs(self, w) -> np.ndarray:
        logs, phases = self._terms(w)
        top = np.max(logs, axis=-1, keepdims=True)
        safe = np.where(np.isfinite(top), top, 0.0)
        s = np.sum(self.basis_coefficients * np.exp(logs - safe + 1j * phases), axis=-1)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(s)) + safe[..., 0]

    def values(self, w) -> np.ndarray:
        logs, phases = self._terms(w)
        return np.sum(self.basis_coefficients * np.exp(logs + 1j * phases), axis=-1)

    def radial_grid(self, size: int) -> np.ndarray:
        """Radii concentrated where the member states live."""
        N = self.params.N
        if self.space == "cpn":
            crit = []
            for s in self.states:
                rest = N - sum(s.index)
                crit.append(math.atan(math.sqrt(max(s.index) / rest)) if rest else 0.5 * math.pi)
            width = 8.0 / math.sqrt(N)
            lo = max(0.0, min(crit) - width)
            hi = min(0.5 * math.pi * (1 - 1e-9), max(crit) + width)
            return np.tan(np.linspace(lo, hi, size))
        crit = [math.sqrt(max(s.index) / N) for s in self.states]
        width = 8.0 / math.sqrt(N)
        return np.linspace(max(0.0, min(crit) - width), max(crit) + width, size)


def _states_for(spectrum: Spectrum, labels) -> list:
    cls = FockState if spectrum.space == "fock" else CPnState
    return [cls(spectrum.params, a) for a in labels]


def quasimode_from_coefficients(window: SpectralWindow, coefficients, seed=None) -> Quasimode:
    c = np.asarray(coefficients, dtype=complex)
    if window.empty:
        raise EmptyWindowError("cannot build a quasimode on an empty window")
    if c.shape != (window.count,):
        raise ValueError(f"need {window.count} coefficients, got shape {c.shape}")
    spec = window.spectrum
    labels = [lab for _, lab in window.members]
    if spec is not None and spec.vectors is not None:
        cols = spec.vectors[:, labels]
        basis_c = cols @ c
        states = _states_for(spec, spec.basis)
    else:
        basis_c = c
        states = _states_for(spec, labels)
    return Quasimode(window, c, seed, states, basis_c)


def sample_quasimode(window: SpectralWindow, seed: int) -> Quasimode:
    """Uniform random unit vector on the complex sphere of the window subspace."""
    if window.empty:
        raise EmptyWindowError("cannot sample a quasimode on an empty window")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(window.count) + 1j * rng.standard_normal(window.count)
    z = z / np.linalg.norm(z)
    return quasimode_from_coefficients(window, z, seed)


def quasimode_sup_norm(qm: Quasimode, grid_size: Optional[int] = None):
    """Certified lower bound for sup |V| (grid plus refinement), with a resolution note."""
    from .quad import sup_norm_search

    seeds = []
    if qm.params.n == 1:
        for s in qm.states:
            rest = qm.params.N - sum(s.index)
            if qm.space == "cpn" and rest:
                r = math.sqrt(s.index[0] / rest)
            elif qm.space == "fock":
                r = math.sqrt(s.index[0] / qm.params.N)
            else:
                continue
            seeds.extend((r, t) for t in np.linspace(0, 2 * math.pi, 16, endpoint=False))
    return sup_norm_search(qm, grid_size=grid_size, seeds=seeds)


def off_window_mass(coefficients, eigenvalues, E: float, C: float, N: int) -> float:
    c = np.abs(np.asarray(coefficients)) ** 2
    lam = np.asarray(eigenvalues, dtype=float)
    return float(np.sum(c[np.abs(lam - E) > C / N]))


def off_window_mass_bound(coefficients, eigenvalues, mu: float, E: float, C: float, N: int):
    """(off-window mass, bound) for V = sum a_j e_j with residual r = ||(T - mu)V||.

    Eigenvalues outside the window sit at distance >= C/N - |mu - E| from mu,
    so the off-window mass is at most (r / (C/N - |mu - E|))^2, which is
    (N r / C)^2 when mu = E.
    """
    a = np.asarray(coefficients)
    lam = np.asarray(eigenvalues, dtype=float)
    r = float(np.sqrt(np.sum(np.abs(a) ** 2 * (lam - mu) ** 2)))
    gap = C / N - abs(mu - E)
    if gap <= 0:
        raise ValueError("mu must lie strictly inside the window")
    return off_window_mass(a, lam, E, C, N), (r / gap) ** 2


@dataclass(frozen=True)
class WindowKernel:
    """Nonnegative window rho with rho(0) = 1 and Fourier transform supported in [-radius, radius]."""

    rho: Callable
    radius: float
    name: str
    fourier: Optional[Callable] = None

    def __call__(self, t):
        return self.rho(np.asarray(t, dtype=float))

    @property
    def integral(self) -> float:
        """int rho = rho_hat(0) under rho_hat(xi) = int rho(t) exp(-i t xi) dt."""
        if self.fourier is None:
            raise ValueError("kernel has no closed-form Fourier transform")
        return float(self.fourier(0.0))


def fejer_kernel(radius: float) -> WindowKernel:
    """rho(t) = (sin(radius t/2) / (radius t/2))^2 with triangular transform on [-radius, radius]."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    R = float(radius)

    def rho(t):
        return np.sinc(R * np.asarray(t, dtype=float) / (2 * math.pi)) ** 2

    def fourier(xi):
        return 2 * math.pi / R * np.maximum(0.0, 1.0 - np.abs(np.asarray(xi, dtype=float)) / R)

    return WindowKernel(rho, R, "fejer", fourier)


def bump_kernel(radius: float, nodes: int = 1024) -> WindowKernel:
    """Smooth alternative: rho = |psi|^2 / psi(0)^2 where psi_hat is a C_c^inf bump on [-radius/2, radius/2].

    Then rho_hat = psi_hat * psi_hat (up to 2 pi) is smooth and supported in [-radius, radius].
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    R = float(radius)
    x, w = np.polynomial.legendre.leggauss(nodes)
    xi = 0.25 * R * (x + 1.0)
    wt = 0.25 * R * w
    with np.errstate(divide="ignore", over="ignore"):
        bump = np.exp(-1.0 / (1.0 - (2.0 * xi / R) ** 2))

    def psi(t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        out = np.cos(np.outer(flat, xi)) @ (bump * wt) / math.pi
        return out.reshape(t.shape)

    psi0 = float(psi(np.array(0.0)))

    def rho(t):
        return (psi(t) / psi0) ** 2

    return WindowKernel(rho, R, "bump")


@dataclass
class ProjectorDiagonal:
    radii: np.ndarray
    values: np.ndarray
    sup: float
    sup_radius: float
    integral: float
    trace: float


def projector_diagonal(spectrum: Spectrum, rho: WindowKernel, E: float,
                       radii: Optional[np.ndarray] = None, integrate: bool = True) -> ProjectorDiagonal:
    """x -> sum_j rho(N(E - lambda_j)) |e_j(x)|^2 for a diagonal model with n = 1.

    The diagonal is radial, so it is sampled on ``radii`` and its sup is refined
    by a bounded 1-D search. ``integral`` is the quadrature of the diagonal
    against the volume; ``trace`` is sum_j rho(N(E - lambda_j)) for comparison.
    """
    from .quad import QuadratureSpec, integrate_1d
    from .cpn import fubini_study_weight

    if spectrum.vectors is not None:
        raise ValueError("projector_diagonal expects a diagonal model spectrum")
    params = spectrum.params
    if params.n != 1:
        raise ValueError("projector diagonal sampling is implemented for n = 1")
    N = params.N
    weights = np.asarray(rho(N * (E - spectrum.values)), dtype=float)
    keep = np.abs(weights) > 1e-300
    states = _states_for(spectrum, [lab for lab, k in zip(spectrum.labels, keep) if k])
    wk = weights[keep]
    cpn = spectrum.space == "cpn"

    lognorm = np.array([s.log_normalizer for s in states])
    powers = np.array([s.index[0] for s in states], dtype=float)

    def diag(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if not states:
            return np.zeros(r.size)
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.log(r)[:, None]
            mono = np.where(powers[None, :] > 0, powers[None, :] * lr, 0.0)
        base = -0.5 * N * np.log1p(r * r) if cpn else -0.5 * N * r * r
        logs = 2.0 * (lognorm[None, :] + mono + base[:, None])
        return np.exp(logs) @ wk

    if radii is None:
        if cpn:
            radii = np.tan(np.linspace(0.0, 0.5 * math.pi, 4001)[:-1])
        else:
            radii = np.linspace(0.0, math.sqrt(max(spectrum.values.max(), 1.0)) * 2 + 2, 4001)
    vals = diag(radii)
    i = int(np.argmax(vals))
    lo, hi = radii[max(i - 1, 0)], radii[min(i + 1, radii.size - 1)]
    sup, sup_r = float(vals[i]), float(radii[i])
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: -float(diag(x)[0]), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-12})
        if -res.fun > sup:
            sup, sup_r = float(-res.fun), float(res.x)
    integral = math.nan
    if integrate:
        def F(r):
            out = diag(r) * 2 * math.pi * r
            if cpn:
                out = out * fubini_study_weight(np.asarray(r)[:, None].astype(complex))
            return out

        spec = QuadratureSpec(rel_tol=1e-10, transform="tangent" if cpn else "tail-split",
                              split=None if cpn else 2.0 * math.sqrt(max(spectrum.values.max(), 1.0)) + 1,
                              scale=1.0 if cpn else 1.0 / math.sqrt(N))
        bps = sorted({math.sqrt(s.index[0] / max(N - s.index[0], 0.5)) if cpn
                      else math.sqrt(s.index[0] / N) for s in states})
        integral = float(integrate_1d(F, 0.0, math.inf, spec, bps)[0])
    trace = float(np.sum(weights))
    return ProjectorDiagonal(np.asarray(radii), vals, sup, sup_r, integral, trace)


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r2: float

    def __iter__(self):
        yield from (self.slope, self.intercept, self.r2)


def slope_fit(points: Sequence) -> SlopeFit:
    """Least-squares fit of ln(value) = slope * ln(N) + intercept."""
    pts = [(float(N), float(v)) for N, v in points]
    if len(pts) < 4:
        raise ValueError("slope fit needs at least 4 points")
    x = np.log([N for N, _ in pts])
    if any(v <= 0 for _, v in pts) or any(N <= 0 for N, _ in pts):
        raise ValueError("slope fit needs positive N and values")
    if np.ptp(x) == 0:
        raise ValueError("slope fit needs at least two distinct N")
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), r2)
