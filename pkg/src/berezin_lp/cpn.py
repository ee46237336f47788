"""Holomorphic sections on CP^n in the affine chart w in C^n.

The basis is ``e_a(w) = Lambda_a w^a / (1 + |w|^2)^(N/2)`` for |a| <= N,
orthonormal against the Fubini-Study volume ``2^n (1+|w|^2)^(-(n+1)) dw``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .fock import INF, as_index, check_p, multi_indices
from .special_fn import LogReal, log_beta, log_factorial, log_multinomial


class DegenerateIndexError(ValueError):
    """|a| = N: the sup-norm maximizer leaves the affine chart."""


class UnsupportedSymbolError(ValueError):
    pass


@dataclass(frozen=True)
class CPnParams:
    n: int
    N: int

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise ValueError(f"need n >= 1 and N >= 1, got n={self.n}, N={self.N}")

    @property
    def dimension(self) -> int:
        return math.comb(self.N + self.n, self.n)

    def indices(self) -> Iterator[tuple]:
        for k in range(self.N + 1):
            yield from multi_indices(self.n, k)


def log_normalizer(params: CPnParams, a) -> float:
    """ln Lambda_a, Lambda_a^2 = (N+n)! / ((2 pi)^n a! (N-|a|)!)."""
    a = as_index(a, params.n)
    n, N = params.n, params.N
    if sum(a) > N:
        raise ValueError(f"|a| = {sum(a)} exceeds N = {N}")
    return 0.5 * (log_factorial(N + n) - log_factorial(N) - n * math.log(2 * math.pi)
                  + log_multinomial(N, a).log_mag)


@dataclass(frozen=True)
class CPnState:
    params: CPnParams
    index: tuple

    def __post_init__(self):
        object.__setattr__(self, "index", as_index(self.index, self.params.n))
        if sum(self.index) > self.params.N:
            raise ValueError(f"|a| = {sum(self.index)} exceeds N = {self.params.N}")

    @property
    def normalizer(self) -> LogReal:
        return LogReal(1, log_normalizer(self.params, self.index))

    @property
    def log_normalizer(self) -> float:
        return log_normalizer(self.params, self.index)

    def log_abs(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        r = np.abs(w)
        out = self.log_normalizer - 0.5 * self.params.N * np.log1p(np.sum(r * r, axis=-1))
        with np.errstate(divide="ignore"):
            for j, a in enumerate(self.index):
                if a:
                    out = out + a * np.log(r[..., j])
        return out

    def values(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        phase = np.zeros(w.shape[:-1])
        for j, a in enumerate(self.index):
            if a:
                phase = phase + a * np.angle(w[..., j])
        return np.exp(self.log_abs(w) + 1j * phase)


def fubini_study_weight(w) -> np.ndarray:
    """2^n (1 + |w|^2)^(-(n+1)) for points of shape (..., n)."""
    w = np.asarray(w, dtype=complex)
    n = w.shape[-1]
    return 2.0 ** n * (1.0 + np.sum(np.abs(w) ** 2, axis=-1)) ** (-(n + 1))


def lcalcul_integral(n: int, a, b: float) -> LogReal:
    """int over [0,inf)^n of prod r_j^(2a_j+1) (1+|r|^2)^(-(b+n+1)) dr = a!(b-|a|)!/(2^n (b+n)!).

    Written with Gamma functions so half-integer exponents (from p-th powers)
    are also accepted.
    """
    a = tuple(float(x) for x in a)
    if len(a) != n:
        raise ValueError(f"index {a} has length {len(a)}, expected {n}")
    if any(x < 0 for x in a):
        raise ValueError("entries must be non-negative")
    rest = b - sum(a)
    if rest < 0:
        raise ValueError(f"|a| = {sum(a)} exceeds b = {b}")
    val = (math.fsum(math.lgamma(x + 1) for x in a) + math.lgamma(rest + 1)
           - n * math.log(2.0) - math.lgamma(b + n + 1))
    return LogReal(1, val)


@dataclass(frozen=True)
class CPnSymbol:
    """Sum of c * w^alpha conj(w)^beta / (1+|w|^2)^k, keyed by (alpha, beta, k).

    These are the symbols whose matrix elements reduce to one-variable Beta
    integrals; anything else is rejected by :func:`cpn_matrix_element`.
    """

    n: int
    terms: Mapping[tuple, complex]
    name: str = "rational"

    @classmethod
    def constant(cls, n: int, c: float = 1.0):
        zero = (0,) * n
        return cls(n, {(zero, zero, 0): c}, name="one" if c == 1 else "constant")

    @classmethod
    def H(cls, n: int):
        """|w_1|^2 / (1 + |w|^2)."""
        e = (1,) + (0,) * (n - 1)
        return cls(n, {(e, e, 1): 1.0}, name="H")

    @classmethod
    def H_power(cls, n: int, m: int):
        e = (m,) + (0,) * (n - 1)
        return cls(n, {(e, e, m): 1.0}, name=f"H^{m}")

    @classmethod
    def monomial(cls, alpha, beta, k: int = 0, c: complex = 1.0):
        alpha, beta = as_index(alpha), as_index(beta)
        return cls(len(alpha), {(alpha, beta, int(k)): c}, name="monomial")

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        rho = 1.0 + np.sum(np.abs(w) ** 2, axis=-1)
        out = np.zeros(w.shape[:-1], dtype=complex)
        for (a, b, k), c in self.terms.items():
            term = c * rho ** (-k)
            for j in range(self.n):
                term = term * w[..., j] ** a[j] * np.conj(w[..., j]) ** b[j]
            out = out + term
        return out


def _monomial_element(params: CPnParams, alpha, beta, k, a, b) -> float:
    # <e_a, f e_b> = Lambda_a Lambda_b int conj(w^a) w^alpha conj(w)^beta w^b rho^(-N-k) dvol;
    # the angular integral forces a + beta = b + alpha, then the radial part is the chart integral
    n, N = params.n, params.N
    c = tuple(x + y for x, y in zip(a, beta))
    if c != tuple(x + y for x, y in zip(b, alpha)):
        return 0.0
    if sum(c) > N + k:
        raise UnsupportedSymbolError(
            f"term w^{alpha} conj(w)^{beta}/(1+|w|^2)^{k} is unbounded on the chart")
    log_val = (log_normalizer(params, a) + log_normalizer(params, b)
               + n * math.log(4 * math.pi) + lcalcul_integral(n, c, N + k).log_mag)
    return math.exp(log_val)


def cpn_matrix_element(params: CPnParams, symbol: CPnSymbol, a, b) -> complex:
    """<e_a, T_N(symbol) e_b>, with the inner product conjugate-linear in its first slot."""
    if not isinstance(symbol, CPnSymbol):
        raise UnsupportedSymbolError(f"no closed-form reduction for {symbol!r}")
    a = as_index(a, params.n)
    b = as_index(b, params.n)
    if sum(a) > params.N or sum(b) > params.N:
        raise ValueError("indices must satisfy |a|, |b| <= N")
    total = 0.0
    for (alpha, beta, k), c in symbol.terms.items():
        total += c * _monomial_element(params, alpha, beta, k, a, b)
    return total


def cpn_model_eigenvalue(params: CPnParams, a) -> float:
    a = as_index(a, params.n)
    if sum(a) > params.N:
        raise ValueError(f"|a| = {sum(a)} exceeds N = {params.N}")
    return (a[0] + 1) / (params.N + params.n + 1)


def cpn_level_multiplicity(params: CPnParams, k: int) -> int:
    """Number of indices with a_1 = k."""
    if not 0 <= k <= params.N:
        return 0
    return math.comb(params.N - k + params.n - 1, params.n - 1)


def cpn_critical_point(state: CPnState) -> tuple:
    """Radii r_j = sqrt(a_j / (N - |a|)) maximizing |e_a| in the chart."""
    rest = state.params.N - sum(state.index)
    if rest == 0:
        raise DegenerateIndexError("|a| = N: the maximizer is at infinity in this chart")
    return tuple(math.sqrt(a / rest) for a in state.index)


def cpn_sup_norm_closed(state: CPnState) -> LogReal:
    """Lambda_a (N-|a|)^((N-|a|)/2) N^(-N/2) prod a_j^(a_j/2), with 0^0 = 1."""
    N = state.params.N
    rest = N - sum(state.index)
    if rest == 0:
        raise DegenerateIndexError("closed form needs |a| < N; use the search path")
    val = state.log_normalizer + 0.5 * rest * math.log(rest) - 0.5 * N * math.log(N)
    for a in state.index:
        if a:
            val += 0.5 * a * math.log(a)
    return LogReal(1, val)


def cpn_sup_norm_homogeneous(state: CPnState) -> LogReal:
    """Sup norm valid for every |a| <= N, written in homogeneous coordinates.

    With a_0 = N - |a| the value is Lambda_a prod_{j=0..n} (a_j/N)^(a_j/2); this
    equals :func:`cpn_sup_norm_closed` when |a| < N.
    """
    N = state.params.N
    full = (N - sum(state.index),) + state.index
    val = state.log_normalizer
    for a in full:
        if a:
            val += 0.5 * a * (math.log(a) - math.log(N))
    return LogReal(1, val)


def _single_mode(params: CPnParams, a) -> int:
    if isinstance(a, (int, np.integer)):
        return int(a)
    a = as_index(a, params.n)
    if any(a[1:]):
        raise ValueError(f"closed L^p form needs a = (a1, 0, ..., 0), got {a}")
    return a[0]


def cpn_lp_norm_closed(params: CPnParams, a1, p: float) -> LogReal:
    """||e_a||_p for a = (a1, 0, ..., 0) and finite p via one Beta function.

    The p-th power is Lambda_a^p 2 (2 pi)^n / prod_{k=2..n}(pN/2 + k)
    * (1/2) B(p(N-a1)/2 + 1, p a1/2 + 1). The normalizer enters as Lambda^p
    (multiplying the integral); p = 2 then gives 1.
    """
    p = check_p(p)
    if p == INF:
        raise ValueError("use cpn_sup_norm_closed for p = inf")
    a1 = _single_mode(params, a1)
    n, N = params.n, params.N
    if not 0 <= a1 <= N:
        raise ValueError(f"a1 must lie in [0, N], got {a1}")
    a = (a1,) + (0,) * (n - 1)
    q = 0.5 * p * N
    log_pth = (p * log_normalizer(params, a) + n * math.log(2 * math.pi)
               - math.fsum(math.log(q + k) for k in range(2, n + 1))
               + log_beta(0.5 * p * (N - a1) + 1, 0.5 * p * a1 + 1).log_mag)
    return LogReal(1, log_pth / p)


def cpn_lp_norm_general(state: CPnState, p: float) -> LogReal:
    """||e_a||_p for any index via the radial Beta-type integral in Gamma form.

    Independent of :func:`cpn_lp_norm_closed`: the p-th power is
    Lambda^p (4 pi)^n times the chart integral with exponents p a_j / 2.
    """
    p = check_p(p)
    if p == INF:
        return cpn_sup_norm_homogeneous(state)
    n, N = state.params.n, state.params.N
    # |e|^p dvol = Lambda^p prod r^(p a_j) (1+r^2)^(-(pN/2 + n + 1)) 2^n (2 pi)^n prod r_j dr_j
    c = tuple(0.5 * p * x for x in state.index)
    radial = lcalcul_integral(n, c, 0.5 * p * N).log_mag
    log_pth = p * state.log_normalizer + n * math.log(4 * math.pi) + radial
    return LogReal(1, log_pth / p)


def saturating_index(n: int, N: int) -> tuple:
    """a_N = (floor(N/2), 0, ..., 0)."""
    return (N // 2,) + (0,) * (n - 1)


def cpn_exponent(n: int, p: float) -> float:
    p = check_p(p)
    return (n - 0.5) * (0.5 - (0.0 if p == INF else 1.0 / p))


def cpn_asymptotic_constant(n: int, p: float) -> float:
    p = check_p(p)
    base = 2.0 ** (n - 0.5) * math.pi ** (n + 0.5)
    if p == INF:
        return base ** -0.5
    return (2.0 / p) ** ((n - 0.5) / p) * base ** -(0.5 - 1.0 / p)


def cpn_asymptotic_prediction(n: int, p: float, N: int) -> float:
    return cpn_asymptotic_constant(n, p) * float(N) ** cpn_exponent(n, p)


def cpn_norm(state: CPnState, p: float) -> LogReal:
    """Closed-form norm for any p: sup, single-mode Beta, or general Gamma form."""
    p = check_p(p)
    if p == INF:
        if sum(state.index) == state.params.N:
            return cpn_sup_norm_homogeneous(state)
        return cpn_sup_norm_closed(state)
    if not any(state.index[1:]):
        return cpn_lp_norm_closed(state.params, state.index[0], p)
    return cpn_lp_norm_general(state, p)


def level_indices(params: CPnParams, a1: int) -> list:
    """All indices in the eigenspace of T_N(H) with first entry a1."""
    if params.n == 1:
        return [(a1,)]
    out = []
    for k in range(params.N - a1 + 1):
        out.extend((a1,) + tail for tail in multi_indices(params.n - 1, k))
    return out
