"""Bargmann space F_N on C^n.

Basis states are ``e_a(z) = N^((n+|a|)/2) exp(-N|z|^2/2) z^a / (pi^(n/2) sqrt(a!))``.
Multi-indices are plain tuples of non-negative ints. ``p = math.inf`` selects
the sup norm; every norm formula branches on it explicitly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .special_fn import E_moment, LogReal, artin_theta, log_factorial

INF = math.inf
MultiIndex = tuple


def as_index(alpha: Sequence[int], n: Optional[int] = None) -> tuple:
    idx = tuple(int(a) for a in alpha)
    if any(a < 0 for a in idx):
        raise ValueError(f"multi-index entries must be non-negative: {idx}")
    if n is not None and len(idx) != n:
        raise ValueError(f"multi-index {idx} has length {len(idx)}, expected {n}")
    return idx


def multi_indices(n: int, total: int) -> Iterator[tuple]:
    """All multi-indices of length n with entry sum ``total``."""
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in multi_indices(n - 1, total - first):
            yield (first,) + rest


def multi_indices_upto(n: int, kmax: int) -> Iterator[tuple]:
    for k in range(kmax + 1):
        yield from multi_indices(n, k)


def level_multiplicity(n: int, k: int) -> int:
    return math.comb(k + n - 1, n - 1)


def check_p(p: float) -> float:
    p = float(p)
    if not p >= 2:
        raise ValueError(f"p must lie in [2, inf], got {p}")
    return p


@dataclass(frozen=True)
class FockParams:
    n: int
    N: int

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise ValueError(f"need n >= 1 and N >= 1, got n={self.n}, N={self.N}")

    @property
    def hbar(self) -> float:
        return 1.0 / self.N


@dataclass(frozen=True)
class FockState:
    params: FockParams
    index: tuple

    def __post_init__(self):
        object.__setattr__(self, "index", as_index(self.index, self.params.n))

    @property
    def log_normalizer(self) -> float:
        """ln of N^((n+|a|)/2) / (pi^(n/2) sqrt(a!))."""
        n, N = self.params.n, self.params.N
        k = sum(self.index)
        return (0.5 * (n + k) * math.log(N) - 0.5 * n * math.log(math.pi)
                - 0.5 * math.fsum(log_factorial(a) for a in self.index))

    def log_abs(self, z) -> np.ndarray:
        """ln|e_a(z)| for points z of shape (..., n); -inf where a factor vanishes."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        N = self.params.N
        out = self.log_normalizer - 0.5 * N * np.sum(r * r, axis=-1)
        with np.errstate(divide="ignore"):
            for j, a in enumerate(self.index):
                if a:
                    out = out + a * np.log(r[..., j])
        return out

    def values(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        phase = np.zeros(z.shape[:-1])
        for j, a in enumerate(self.index):
            if a:
                phase = phase + a * np.angle(z[..., j])
        return np.exp(self.log_abs(z) + 1j * phase)


@dataclass
class NormReport:
    """One (p, N, index) record of closed-form vs oracle values."""

    p: float
    N: int
    index: tuple
    closed_form: LogReal
    quadrature: Optional[float] = None
    asymptotic: Optional[float] = None
    rel_discrepancy: Optional[float] = field(default=None, init=False)

    def __post_init__(self):
        if self.quadrature is not None:
            ref = self.closed_form.to_float()
            self.rel_discrepancy = abs(ref - self.quadrature) / ref


def fock_eval(state: FockState, z) -> tuple[LogReal, float]:
    """Value of e_a at one point, as (magnitude, phase)."""
    z = np.asarray(z, dtype=complex).reshape(state.params.n)
    log_mag = float(state.log_abs(z))
    if log_mag == -math.inf:
        return LogReal(0), 0.0
    phase = float(sum(a * np.angle(zj) for a, zj in zip(state.index, z)))
    return LogReal(1, log_mag), phase


def bergman_kernel(params: FockParams, w, z) -> complex:
    """Reproducing kernel K(w, z) = sum_a conj(e_a(z)) e_a(w)."""
    w = np.asarray(w, dtype=complex).reshape(params.n)
    z = np.asarray(z, dtype=complex).reshape(params.n)
    N = params.N
    expo = (-0.5 * N * np.vdot(z, z).real - 0.5 * N * np.vdot(w, w).real
            + N * np.vdot(z, w))
    return complex((N / math.pi) ** params.n * np.exp(expo))


def shift_matrix_element(params: FockParams, nu: Sequence[int], alpha: Sequence[int]) -> float:
    """<e_{nu+alpha}, z^alpha e_nu> = N^(-|alpha|/2) sqrt((nu+alpha)!/nu!)."""
    nu = as_index(nu, params.n)
    alpha = as_index(alpha, params.n)
    log_val = -0.5 * sum(alpha) * math.log(params.N)
    for v, a in zip(nu, alpha):
        log_val += 0.5 * (log_factorial(v + a) - log_factorial(v))
    return math.exp(log_val)


@dataclass(frozen=True)
class FockSymbol:
    """Polynomial symbol sum c * z^alpha * conj(z)^beta, keyed by (alpha, beta)."""

    n: int
    terms: Mapping[tuple, complex]
    name: str = "polynomial"

    @classmethod
    def constant(cls, n: int, c: float = 1.0):
        zero = (0,) * n
        return cls(n, {(zero, zero): c}, name="constant" if c != 1 else "one")

    @classmethod
    def monomial(cls, alpha, beta, c: complex = 1.0):
        alpha, beta = as_index(alpha), as_index(beta)
        return cls(len(alpha), {(alpha, beta): c}, name=f"z^{alpha} zbar^{beta}")

    @classmethod
    def radial(cls, n: int, coeffs: Mapping[tuple, float]):
        """Polynomial in |z_1|^2..|z_n|^2; ``coeffs`` maps exponent tuples to coefficients."""
        terms = {(as_index(m, n), as_index(m, n)): c for m, c in coeffs.items()}
        return cls(n, terms, name="radial")

    @classmethod
    def harmonic(cls, n: int):
        """|z|^2, the Toeplitz harmonic oscillator."""
        coeffs = {tuple(int(i == j) for i in range(n)): 1.0 for j in range(n)}
        sym = cls.radial(n, coeffs)
        return cls(n, sym.terms, name="harmonic")

    @classmethod
    def re_z(cls, n: int, j: int = 0):
        e = tuple(int(i == j) for i in range(n))
        zero = (0,) * n
        return cls(n, {(e, zero): 0.5, (zero, e): 0.5}, name=f"Re z{j + 1}")

    def is_real(self) -> bool:
        for (a, b), c in self.terms.items():
            if abs(self.terms.get((b, a), 0) - np.conj(c)) > 1e-15 * max(1.0, abs(c)):
                return False
        return True

    def is_radial(self) -> bool:
        return all(a == b for a, b in self.terms)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for (a, b), c in self.terms.items():
            term = np.full(z.shape[:-1], c, dtype=complex)
            for j in range(self.n):
                term = term * z[..., j] ** a[j] * np.conj(z[..., j]) ** b[j]
            out = out + term
        return out


def monomial_matrix_element(params: FockParams, alpha, beta, mu, nu) -> float:
    """<e_mu, T_N(z^alpha zbar^beta) e_nu> = <z^beta e_mu, z^alpha e_nu>."""
    if tuple(m + b for m, b in zip(mu, beta)) != tuple(v + a for v, a in zip(nu, alpha)):
        return 0.0
    return shift_matrix_element(params, mu, beta) * shift_matrix_element(params, nu, alpha)


def symbol_matrix_element(params: FockParams, symbol: FockSymbol, mu, nu) -> complex:
    return sum(c * monomial_matrix_element(params, a, b, mu, nu)
               for (a, b), c in symbol.terms.items())


def radial_symbol_diagonal(params: FockParams, coeffs: Mapping[tuple, float], nu) -> float:
    """Diagonal entry on e_nu of T_N(sum_m c_m |z_1|^(2 m_1) ... |z_n|^(2 m_n))."""
    nu = as_index(nu, params.n)
    total = 0.0
    for m, c in coeffs.items():
        m = as_index(m, params.n)
        log_term = -sum(m) * math.log(params.N)
        for v, k in zip(nu, m):
            log_term += log_factorial(v + k) - log_factorial(v)
        total += c * math.exp(log_term)
    return total


def harmonic_eigenvalue(params: FockParams, alpha) -> float:
    alpha = as_index(alpha, params.n)
    return (sum(alpha) + params.n) / params.N


def _log_E(a: float, N: float) -> float:
    return E_moment(a, N).log_mag


def fock_lp_norm_closed(state: FockState, p: float) -> LogReal:
    """Exact ||e_nu||_p from the Gaussian-moment product formula."""
    p = check_p(p)
    n, N = state.params.n, state.params.N
    nu = state.index
    if p == INF:
        # 0^0 = 1 for vanishing entries
        val = 0.5 * n * math.log(N) - 0.5 * n * math.log(math.pi)
        for v in nu:
            if v:
                val += 0.5 * v * math.log(v)
            val -= 0.5 * v + 0.5 * log_factorial(v)
        return LogReal(1, val)
    if p == 2:
        return LogReal(1, 0.0)
    val = (0.5 * sum(nu) + n / p) * math.log(2.0 / p)
    for v in nu:
        val += _log_E(p * v, N) / p - 0.5 * _log_E(2 * v, N)
    return LogReal(1, val)


def epsilon_correction(p: float, v: int) -> float:
    """Stirling correction exponent for one coordinate of the product norm formula."""
    p = check_p(p)
    if p == INF:
        return -artin_theta(v + 1.0) / (24.0 * (v + 1))
    return (artin_theta(0.5 * p * v + 1.0) / (6.0 * p * (p * v + 2.0))
            - artin_theta(v + 1.0) / (24.0 * (v + 1)))


def log_f(x, p: float):
    """ln of ((x + 2/p)/(x + 1))^(x/2) (px + 2)^(1/(2p)) / (2x + 2)^(1/4)."""
    x = np.asarray(x, dtype=float)
    return (0.5 * x * np.log1p((2.0 / p - 1.0) / (x + 1.0))
            + np.log(p * x + 2.0) / (2.0 * p) - 0.25 * np.log(2.0 * x + 2.0))


def log_g(x):
    """ln of (x/(x + 1))^(x/2) / (2x + 2)^(1/4), with the x = 0 limit."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.where(x > 0, 0.5 * x * np.log(np.where(x > 0, x, 1.0) / (x + 1.0)), 0.0)
    return head - 0.25 * np.log(2.0 * x + 2.0)


def fock_lp_norm_eqnormep(state: FockState, p: float) -> tuple[LogReal, list]:
    """Stirling-refined product form of ||e_nu||_p.

    Returns the norm and the per-coordinate correction exponents, each of which
    must lie in [-1/24, 1/24].
    """
    p = check_p(p)
    N = state.params.N
    eps = [epsilon_correction(p, v) for v in state.index]
    base = math.log(math.pi ** 1.5 / (N * math.e))
    val = 0.0
    for v, e in zip(state.index, eps):
        if p == INF:
            val += -0.5 * base + e + float(log_g(v))
        else:
            val += (1.0 / p - 0.5) * base + e + math.log(2.0 / p) / p + float(log_f(v, p))
    return LogReal(1, val), eps


@dataclass
class ConvexityReport:
    p: float
    min_second_diff_f: float
    min_second_diff_g: float
    tol: float = 1e-12

    @property
    def ok(self) -> bool:
        return self.min_second_diff_f >= -self.tol and self.min_second_diff_g >= -self.tol


def _min_second_divided_difference(x: np.ndarray, y: np.ndarray) -> float:
    h0 = x[1:-1] - x[:-2]
    h1 = x[2:] - x[1:-1]
    d = 2.0 * ((y[2:] - y[1:-1]) / h1 - (y[1:-1] - y[:-2]) / h0) / (h0 + h1)
    return float(d.min())


def log_convexity_check(p: float, x_grid, tol: float = 1e-12) -> ConvexityReport:
    p = check_p(p)
    x = np.sort(np.asarray(x_grid, dtype=float))
    if x.size < 3 or x[0] < 0:
        raise ValueError("need at least three grid points in [0, inf)")
    fmin = _min_second_divided_difference(x, log_f(x, p)) if p != INF else 0.0
    gmin = _min_second_divided_difference(x, log_g(x))
    return ConvexityReport(p, fmin, gmin, tol)


def ratio_bound_constant(n: int) -> float:
    return math.exp(1.0 / 24.0) * (math.exp(1.0 / 12.0) * math.sqrt(math.e / math.sqrt(2 * math.pi))) ** n


def sharpness_ratio_bound(nu, p: float, N: int = 1) -> tuple[float, float]:
    """||e_nu||_p / ||e_mu||_p with mu = (|nu|, 0, ..., 0), and its dimensional bound.

    The ratio does not depend on N; it is accepted only to build the states.
    """
    nu = as_index(nu)
    if sum(nu) < 1:
        raise ValueError("need |nu| >= 1")
    params = FockParams(len(nu), N)
    mu = (sum(nu),) + (0,) * (len(nu) - 1)
    ratio = (fock_lp_norm_closed(FockState(params, nu), p)
             / fock_lp_norm_closed(FockState(params, mu), p)).to_float()
    return ratio, ratio_bound_constant(len(nu))


def nu_k(n: int, alpha: int, k: int) -> tuple[tuple, int]:
    """Index with ``alpha`` equal non-zero entries summing to k.

    k is rounded to the nearest multiple of alpha (ties upward); the adjusted
    k is returned alongside.
    """
    if not 1 <= alpha <= n:
        raise ValueError(f"alpha must lie in [1, {n}], got {alpha}")
    q = max(1, int(math.floor(k / alpha + 0.5)))
    return (q,) * alpha + (0,) * (n - alpha), q * alpha


def fock_exponent(n: int, alpha: int, p: float) -> float:
    p = check_p(p)
    return (n - 0.5 * alpha) * (0.5 - (0.0 if p == INF else 1.0 / p))


def fock_asymptotic_prediction(lam: float, alpha: int, p: float, N: int, n: int) -> float:
    """Predicted growth N^((n - alpha/2)(1/2 - 1/p)); the constant is left to a fit.

    ``lam`` only fixes the family k ~ lam N and does not enter the power.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    return float(N) ** fock_exponent(n, alpha, p)


def saturating_fock_index(n: int, N: int, lam: float = 0.5) -> tuple:
    k = int(round(lam * N))
    return (k,) + (0,) * (n - 1)
