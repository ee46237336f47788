"""Quadrature oracles used to check the closed-form norm formulas.

Nothing here calls the Gamma-function machinery of :mod:`special_fn`; every
value is produced by adaptive Gauss-Kronrod integration of the pointwise
integrand, evaluated in log domain and exponentiated pointwise.
"""
from __future__ import annotations

import functools
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cpn import CPnParams, CPnState, fubini_study_weight
from .fock import INF, FockParams, FockState, check_p

# 15-point Kronrod rule with its embedded 7-point Gauss rule on [-1, 1]
_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970])
_WG = np.zeros(15)
_WG[1::2] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
             0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
             0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
             0.129484966168869693270611432679082]

TRANSFORMS = ("none", "tangent", "tail-split")


class QuadratureError(RuntimeError):
    def __init__(self, message, worst_interval=None):
        super().__init__(message)
        self.worst_interval = worst_interval


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and domain handling for :func:`integrate_1d`.

    ``transform`` applies to [a, inf): ``tangent`` maps x = a + scale*tan(t),
    ``tail-split`` integrates [a, split] directly and maps the tail by
    x = split + scale*t/(1-t).
    """

    rel_tol: float = 1e-12
    abs_tol: float = 0.0
    max_depth: int = 60
    transform: str = "tail-split"
    split: Optional[float] = None
    scale: float = 1.0
    initial_pieces: int = 4
    max_intervals: int = 20000

    def __post_init__(self):
        if not self.rel_tol > 0 or self.abs_tol < 0:
            raise ValueError("need rel_tol > 0 and abs_tol >= 0")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}; pick from {TRANSFORMS}")

    def replace(self, **kw) -> "QuadratureSpec":
        return QuadratureSpec(**{**self.__dict__, **kw})


def _gk15(f, a: float, b: float):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = np.asarray(f(c + h * _XK), dtype=float)
    k = h * np.tensordot(_WK, y, axes=(0, 0))
    g = h * np.tensordot(_WG, y, axes=(0, 0))
    return k, np.max(np.abs(np.atleast_1d(k - g)))


def _adaptive(f, pieces: Sequence[float], spec: QuadratureSpec):
    heap = []
    counter = 0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, err = _gk15(f, a, b)
        heap.append((-err, counter, a, b, 0, val))
        counter += 1
    heapq.heapify(heap)
    total = sum((item[5] for item in heap[1:]), start=heap[0][5])
    err_total = math.fsum(-item[0] for item in heap)
    while True:
        scale = float(np.max(np.abs(np.atleast_1d(total))))
        target = max(spec.rel_tol * scale, spec.abs_tol)
        if err_total <= target:
            break
        neg_err, _, a, b, depth, old = heapq.heappop(heap)
        if depth >= spec.max_depth or len(heap) >= spec.max_intervals:
            raise QuadratureError(
                f"no convergence: error {err_total:.3g} vs target {target:.3g}; "
                f"worst interval [{a!r}, {b!r}] at depth {depth}", (a, b))
        m = 0.5 * (a + b)
        total = total - old
        err_total += neg_err
        for lo, hi in ((a, m), (m, b)):
            val, err = _gk15(f, lo, hi)
            heapq.heappush(heap, (-err, counter, lo, hi, depth + 1, val))
            counter += 1
            total = total + val
            err_total += err
    # final sum in left-to-right order, independent of the refinement history
    ordered = sorted(heap, key=lambda t: t[2])
    total = sum((item[5] for item in ordered[1:]), start=ordered[0][5])
    return total, math.fsum(-item[0] for item in heap)


def _pieces(a: float, b: float, n: int, breakpoints=()) -> list:
    pts = list(np.linspace(a, b, max(1, n) + 1))
    pts.extend(x for x in breakpoints if a < x < b)
    return sorted(set(float(x) for x in pts))


def integrate_1d(f: Callable, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(),
                 breakpoints: Sequence[float] = ()):
    """Adaptive Gauss-Kronrod integral of a vectorized f over [a, b].

    ``f`` maps an array of shape (m,) to shape (m,) or (m, k); vector-valued
    integrands share one subdivision, with the error measured by the largest
    component. ``b`` may be ``inf``. Returns (value, error estimate).
    """
    if b < a:
        raise ValueError("need a <= b")
    if b == a:
        probe = np.asarray(f(np.array([a], dtype=float)), dtype=float)
        return np.zeros(probe.shape[1:]) if probe.ndim > 1 else 0.0, 0.0
    if math.isfinite(b):
        val, err = _adaptive(f, _pieces(a, b, spec.initial_pieces, breakpoints), spec)
        return _unwrap(val), err
    L = spec.scale
    if spec.transform == "tangent":
        def g(t):
            tt = np.tan(t)
            return _broadcast_mul(f(a + L * tt), L * (1.0 + tt * tt))
        tb = [math.atan((x - a) / L) for x in breakpoints if x > a]
        val, err = _adaptive(g, _pieces(0.0, 0.5 * math.pi, spec.initial_pieces, tb), spec)
        return _unwrap(val), err
    if spec.transform == "none":
        raise ValueError("an infinite interval needs transform 'tangent' or 'tail-split'")
    s = spec.split if spec.split is not None else a + L
    if s <= a:
        raise ValueError("split point must exceed the left endpoint")

    def tail(t):
        return _broadcast_mul(f(s + L * t / (1.0 - t)), L / (1.0 - t) ** 2)

    # one adaptive run over the concatenated parameter [0, 2): [0,1] -> [a, s], [1,2) -> tail
    def joined(u):
        u = np.asarray(u)
        head_mask = u <= 1.0
        out = None
        if head_mask.any():
            hv = np.asarray(f(a + (s - a) * u[head_mask]), dtype=float) * (s - a)
            out = np.zeros((u.size,) + hv.shape[1:])
            out[head_mask] = hv
        if (~head_mask).any():
            tv = np.asarray(tail(u[~head_mask] - 1.0), dtype=float)
            if out is None:
                out = np.zeros((u.size,) + tv.shape[1:])
            out[~head_mask] = tv
        return out

    jb = [(x - a) / (s - a) for x in breakpoints if a < x < s]
    jb += [1.0 + (x - s) / (x - s + L) for x in breakpoints if x > s]
    pieces = sorted(set(_pieces(0.0, 1.0, spec.initial_pieces, jb)
                        + _pieces(1.0, 2.0, spec.initial_pieces, jb)))
    val, err = _adaptive(joined, pieces, spec)
    return _unwrap(val), err


def _broadcast_mul(values, factor):
    values = np.asarray(values, dtype=float)
    factor = np.asarray(factor, dtype=float)
    if values.ndim > 1:
        factor = factor.reshape((-1,) + (1,) * (values.ndim - 1))
    with np.errstate(invalid="ignore"):
        out = values * factor
    # 0 * inf at the compactified end point contributes nothing
    return np.where(np.isnan(out), 0.0, out)


def _unwrap(val):
    val = np.asarray(val)
    return float(val) if val.ndim == 0 else val


def nested_radial_integral(F: Callable, n: int, spec: QuadratureSpec,
                           breakpoints: Sequence[Sequence[float]] = ()) -> float:
    """Integral of F over [0, inf)^n by n nested adaptive 1-D integrals.

    ``F`` maps radii of shape (m, n) to values of shape (m,). Inner integrals
    are computed vector-valued over batches of outer nodes.
    """
    bps = list(breakpoints) + [()] * (n - len(breakpoints))

    def level(fixed: np.ndarray) -> np.ndarray:
        d = fixed.shape[1]
        if d == n:
            return np.asarray(F(fixed), dtype=float)

        def integrand(x):
            x = np.asarray(x, dtype=float)
            pts = np.concatenate([np.repeat(fixed, x.size, axis=0),
                                  np.tile(x, fixed.shape[0])[:, None]], axis=1)
            vals = level(pts)
            return vals.reshape(fixed.shape[0], x.size).T

        val, _ = integrate_1d(integrand, 0.0, INF, spec, bps[d])
        return np.atleast_1d(val)

    return float(level(np.zeros((1, 0)))[0])


def _fock_factors(state: FockState) -> list:
    one = FockParams(1, state.params.N)
    return [FockState(one, (v,)) for v in state.index]


@functools.lru_cache(maxsize=4096)
def _fock_factor_norm(state, p, spec):
    return lp_norm_quadrature(state, p, spec)


@functools.lru_cache(maxsize=4096)
def _fock_factor_sup(state, grid_size, refine):
    return sup_norm_search(state, grid_size, refine)


def _radial_spec(descriptor, spec: Optional[QuadratureSpec]) -> tuple:
    """Spec and breakpoints suited to the peak structure of a basis state."""
    if isinstance(descriptor, FockState):
        N = descriptor.params.N
        peak = max(descriptor.index)
        split = 4.0 * math.sqrt(peak / N) + 1.0
        base = spec or QuadratureSpec()
        spec = base.replace(transform="tail-split", split=split, scale=1.0 / math.sqrt(N))
        width = 1.0 / math.sqrt(N)
        bps = [tuple(x for x in (math.sqrt(v / N) - 3 * width, math.sqrt(v / N),
                                 math.sqrt(v / N) + 3 * width) if x > 0)
               for v in descriptor.index]
        return spec, bps
    if isinstance(descriptor, CPnState):
        N = descriptor.params.N
        rest = max(N - sum(descriptor.index), 0.5)
        base = spec or QuadratureSpec()
        spec = base.replace(transform="tangent", scale=1.0)
        bps = [(math.sqrt(a / rest),) if a else () for a in descriptor.index]
        return spec, bps
    raise TypeError(f"no radial reduction for {type(descriptor).__name__}")


def _log_radial(descriptor, r: np.ndarray) -> np.ndarray:
    return descriptor.log_abs(r.astype(complex))


def lp_norm_quadrature(descriptor, p: float, spec: Optional[QuadratureSpec] = None,
                       angular_points: Optional[int] = None) -> float:
    """||descriptor||_p by adaptive quadrature against the space's volume.

    Basis states (FockState, CPnState) reduce to n nested radial integrals
    since |e_a| depends on |w_j| only; each angle contributes 2 pi. Quasimodes
    (objects with ``space``, ``params`` and ``values``) use a trapezoid rule in
    each angle, which is spectrally accurate for these trigonometric sums.
    """
    p = check_p(p)
    if p == INF:
        return sup_norm_search(descriptor)[0]
    if isinstance(descriptor, FockState) and descriptor.params.n > 1:
        # |e_nu| is a product over coordinates, so the integral factorizes
        return math.prod(_fock_factor_norm(s, p, spec) for s in _fock_factors(descriptor))
    if isinstance(descriptor, (FockState, CPnState)):
        n = descriptor.params.n
        rspec, bps = _radial_spec(descriptor, spec)
        # peak value guards against overflow/underflow of |e|^p
        probe = _peak_log_abs(descriptor)
        fs = isinstance(descriptor, CPnState)

        def F(r):
            logv = p * (_log_radial(descriptor, r) - probe)
            out = np.exp(logv) * np.prod(r, axis=1) * (2 * math.pi) ** n
            if fs:
                out = out * fubini_study_weight(r.astype(complex))
            return out

        total = nested_radial_integral(F, n, rspec, bps)
        return math.exp(probe + math.log(total) / p)
    return _quasimode_lp(descriptor, p, spec, angular_points)


def _peak_log_abs(descriptor) -> float:
    # coarse radial scan, not the closed-form maximizer
    n = descriptor.params.n
    grid = np.concatenate([np.linspace(0.0, 1.0, 41)[1:] ** 2 * 6.0, [0.0]])
    best = -math.inf
    for j in range(n):
        r = np.zeros((grid.size, n))
        r[:, j] = grid
        for k in range(n):
            if k != j:
                r[:, k] = 0.5 * grid
        best = max(best, float(np.max(_log_radial(descriptor, r))))
    r = np.tile(grid[:, None], (1, n)) / math.sqrt(n)
    best = max(best, float(np.max(_log_radial(descriptor, r))))
    return best if math.isfinite(best) else 0.0


def _angular_nodes(n: int, M: int) -> np.ndarray:
    th = 2 * math.pi * np.arange(M) / M
    mesh = np.meshgrid(*([th] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _quasimode_lp(qm, p: float, spec: Optional[QuadratureSpec], angular_points: Optional[int]):
    n = qm.params.n
    if n > 2:
        raise ValueError("quasimode quadrature supports n <= 2 only")
    spread = qm.index_spread()
    M = angular_points or int(4 * max(spread, 1) * max(p, 2) + 32)
    theta = _angular_nodes(n, M)
    dtheta = (2 * math.pi / M) ** n
    probe = max(_peak_log_abs(s) for s in qm.states)
    cpn = qm.space == "cpn"

    def F(r):
        m = r.shape[0]
        w = (r[:, None, :] * np.exp(1j * theta[None, :, :])).reshape(-1, n)
        logv = qm.log_abs(w).reshape(m, -1)
        ang = np.sum(np.exp(p * (logv - probe)), axis=1) * dtheta
        out = ang * np.prod(r, axis=1)
        if cpn:
            out = out * fubini_study_weight(r.astype(complex))
        return out

    ref = qm.states[0]
    rspec, bps = _radial_spec(ref, spec)
    total = nested_radial_integral(F, n, rspec, bps)
    return math.exp(probe + math.log(total) / p)


@dataclass
class SupSearchResult:
    value: float
    argmax: np.ndarray
    grid_points: int
    note: str = ""

    def __iter__(self):
        yield self.value
        yield self.argmax

    def __getitem__(self, i):
        return (self.value, self.argmax)[i]


def _radial_grid(descriptor, size: int) -> np.ndarray:
    N = descriptor.params.N
    if isinstance(descriptor, FockState):
        top = math.sqrt(max(descriptor.index) / N) + 10.0 / math.sqrt(N)
        return np.linspace(0.0, top, size)
    # CP^n chart: uniform in the angle phi with r = tan(phi)
    phi = np.linspace(0.0, 0.5 * math.pi, size + 1)[:-1]
    return np.tan(phi)


def sup_norm_search(descriptor, grid_size: Optional[int] = None, refine: bool = True,
                    seeds: Sequence[Sequence[float]] = ()) -> SupSearchResult:
    """Lower bound for sup |descriptor| by grid search plus local refinement.

    Radially symmetric descriptors (basis states, or anything exposing
    ``log_abs`` and ``radial = True``) are searched over radii only. Other
    descriptors with ``log_abs`` are searched over (radius, angle) per
    coordinate.
    """
    n = descriptor.params.n
    if isinstance(descriptor, FockState) and n > 1:
        parts = [_fock_factor_sup(s, grid_size, refine) for s in _fock_factors(descriptor)]
        return SupSearchResult(math.prod(r.value for r in parts),
                               np.concatenate([r.argmax for r in parts]),
                               sum(r.grid_points for r in parts), note=parts[0].note + " per coordinate")
    if isinstance(descriptor, CPnState) and sum(descriptor.index) == descriptor.params.N:
        # the maximizer sits at infinity in this chart; the chart centred on the
        # largest coordinate sees the same modulus with a_k and a_0 = 0 swapped
        k = int(np.argmax(descriptor.index))
        swapped = list(descriptor.index)
        swapped[k] = 0
        res = sup_norm_search(CPnState(descriptor.params, tuple(swapped)), grid_size, refine)
        res.note += f"; chart swapped on coordinate {k + 1}"
        return res
    radial = getattr(descriptor, "radial", isinstance(descriptor, (FockState, CPnState)))
    if radial:
        return _radial_search(descriptor, n, grid_size, refine, seeds)
    return _phase_space_search(descriptor, n, grid_size, refine, seeds)


def _zoom(fn, x0: np.ndarray, half: np.ndarray, lower: np.ndarray, points: int = 11,
          shrink: float = 4.0, tol: float = 1e-13):
    """Maximize fn by repeatedly re-gridding a shrinking box around the incumbent.

    ``fn`` is vectorized over rows of an (m, d) array; the box is clipped at
    ``lower``. Deterministic, and each round is one batched evaluation.
    """
    x = np.asarray(x0, dtype=float).copy()
    half = np.maximum(np.asarray(half, dtype=float), 1e-300)
    best = float(fn(x[None, :])[0])
    offsets = np.linspace(-1.0, 1.0, points)
    d = x.size
    while np.any(half > tol * np.maximum(1.0, np.abs(x))):
        axes = [x[i] + half[i] * offsets for i in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.maximum(np.stack([m.ravel() for m in mesh], axis=1), lower)
        vals = np.asarray(fn(pts), dtype=float)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, x = float(vals[i]), pts[i].copy()
        half = half / shrink
    return best, x


def _grid_spacing(g: np.ndarray, x: float) -> float:
    i = int(np.clip(np.searchsorted(g, x), 1, g.size - 1))
    return float(max(g[i] - g[i - 1], 1e-12))


def _radial_search(desc, n, grid_size, refine, seeds):
    size = grid_size or {1: 4001, 2: 301, 3: 61}.get(n, 21)
    if hasattr(desc, "radial_grid"):
        g = desc.radial_grid(size)
    else:
        g = _radial_grid(desc, size)
    mesh = np.meshgrid(*([g] * n), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    if seeds:
        pts = np.concatenate([pts, np.asarray(seeds, dtype=float).reshape(-1, n)])
    vals = np.asarray(desc.log_abs(pts.astype(complex)), dtype=float)
    order = np.argsort(-vals, kind="stable")[:4]
    best_val, best_pt = float(vals[order[0]]), pts[order[0]].copy()
    if refine:
        fn = lambda x: desc.log_abs(x.astype(complex))
        for i in order:
            half = np.array([_grid_spacing(g, x) for x in pts[i]])
            val, x = _zoom(fn, pts[i], half, np.zeros(n), points=11 if n < 3 else 7)
            if val > best_val:
                best_val, best_pt = val, x
    return SupSearchResult(math.exp(best_val), best_pt, pts.shape[0],
                           note=f"radial grid {size}^{n}, zoom refinement")


def _phase_space_search(desc, n, grid_size, refine, seeds):
    if n > 2:
        raise ValueError("phase-space sup search supports n <= 2 only")
    size = grid_size or (401 if n == 1 else 41)
    n_theta = 128 if n == 1 else 24
    rg = desc.radial_grid(size) if hasattr(desc, "radial_grid") else np.linspace(0, 4, size)
    tg = 2 * math.pi * np.arange(n_theta) / n_theta
    axes = [rg] * n + [tg] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    w = flat[:, :n] * np.exp(1j * flat[:, n:])
    vals = np.asarray(desc.log_abs(w), dtype=float)
    if seeds:
        extra = np.asarray(seeds, dtype=float).reshape(-1, 2 * n)
        ew = extra[:, :n] * np.exp(1j * extra[:, n:])
        flat = np.concatenate([flat, extra])
        vals = np.concatenate([vals, np.asarray(desc.log_abs(ew), dtype=float)])
    order = np.argsort(-vals, kind="stable")[:2]
    best_val, best_pt = float(vals[order[0]]), flat[order[0]].copy()

    def fn(x):
        return desc.log_abs(x[:, :n] * np.exp(1j * x[:, n:]))

    if refine:
        lower = np.concatenate([np.zeros(n), np.full(n, -np.inf)])
        for i in order:
            half = np.array([_grid_spacing(rg, x) for x in flat[i, :n]]
                            + [2 * math.pi / n_theta] * n)
            val, x = _zoom(fn, flat[i], half, lower, points=11 if n == 1 else 5)
            if val > best_val:
                best_val, best_pt = val, x
    best_pt = best_pt.copy()
    best_pt[n:] = np.mod(best_pt[n:], 2 * math.pi)
    return SupSearchResult(math.exp(best_val), best_pt, flat.shape[0],
                           note=f"(r, theta) grid {size}x{n_theta} per coordinate, zoom refinement")


def _basis_radial_profiles(states, r: np.ndarray) -> np.ndarray:
    return np.stack([np.exp(s.log_abs(r.astype(complex))) for s in states], axis=1)


def quadrature_matrix(states: Sequence, radial_symbol: Callable, spec: Optional[QuadratureSpec] = None,
                      angular_points: Optional[int] = None) -> np.ndarray:
    """Gram-type matrix <e_a, f e_b> of a radial symbol f by quadrature.

    For a symbol depending on |w_j| only, the integrand splits into a radial
    part (nested adaptive quadrature, all pairs at once) and an angular part
    prod_j int exp(i (b_j - a_j) theta) d theta (trapezoid rule).
    """
    states = list(states)
    ref = states[0]
    n = ref.params.n
    k = len(states)
    cpn = isinstance(ref, CPnState)
    iu = np.triu_indices(k)

    def F(r):
        prof = _basis_radial_profiles(states, r)
        vals = prof[:, iu[0]] * prof[:, iu[1]]
        w = np.asarray(radial_symbol(r), dtype=float) * np.prod(r, axis=1)
        if cpn:
            w = w * fubini_study_weight(r.astype(complex))
        return vals * w[:, None]

    base = spec or QuadratureSpec()
    if cpn:
        base = base.replace(transform="tangent", scale=1.0)
        top = max(s.params.N for s in states)
        bps = [tuple(np.tan(np.linspace(0.05, 1.5, 12)))] * n
    else:
        N = ref.params.N
        top = max(max(s.index) for s in states)
        base = base.replace(transform="tail-split", split=4.0 * math.sqrt(top / N) + 1.0,
                            scale=1.0 / math.sqrt(N))
        bps = [()] * n
    radial = _nested_vector(F, n, base, bps, len(iu[0]))
    M = angular_points or 2 * (max(max(s.index) for s in states) + 1) + 2
    th = 2 * math.pi * np.arange(M) / M
    idx = np.array([s.index for s in states])
    ang = np.ones(len(iu[0]), dtype=complex)
    for j in range(n):
        diff = idx[iu[1], j] - idx[iu[0], j]
        ang = ang * (np.exp(1j * np.outer(diff, th)).sum(axis=1) * (2 * math.pi / M))
    upper = radial * ang
    out = np.zeros((k, k), dtype=complex)
    out[iu] = upper
    out = out + np.triu(out, 1).conj().T
    return out


def _nested_vector(F, n, spec, bps, width) -> np.ndarray:
    def level(fixed):
        d = fixed.shape[1]
        if d == n:
            return np.asarray(F(fixed), dtype=float)

        def integrand(x):
            x = np.asarray(x, dtype=float)
            pts = np.concatenate([np.repeat(fixed, x.size, axis=0),
                                  np.tile(x, fixed.shape[0])[:, None]], axis=1)
            vals = level(pts)
            return vals.reshape(fixed.shape[0], x.size, width).transpose(1, 0, 2).reshape(x.size, -1)

        val, _ = integrate_1d(integrand, 0.0, INF, spec, bps[d])
        return np.asarray(val).reshape(fixed.shape[0], width)

    return level(np.zeros((1, 0)))[0]


def annulus_mass(descriptor, r_lo: float, r_hi: float, spec: Optional[QuadratureSpec] = None,
                 angular_points: Optional[int] = None) -> float:
    """L^2 mass of a one-dimensional state or quasimode on r_lo <= |w| <= r_hi.

    Angles by the trapezoid rule, radius by adaptive quadrature. The integrand
    is rescaled by its largest sampled value on the annulus so masses far
    below the peak keep full relative accuracy.
    """
    if descriptor.params.n != 1:
        raise ValueError("annulus mass is implemented for n = 1")
    cpn = isinstance(descriptor, CPnState) or getattr(descriptor, "space", None) == "cpn"
    spread = descriptor.index_spread() if hasattr(descriptor, "index_spread") else 0
    M = angular_points or 4 * max(spread, 1) + 16
    theta = 2 * math.pi * np.arange(M) / M

    def log_sq(r):
        r = np.asarray(r, dtype=float)
        w = (r[:, None] * np.exp(1j * theta[None, :])).reshape(-1, 1)
        return 2.0 * descriptor.log_abs(w).reshape(r.size, M)

    hi_probe = r_hi if math.isfinite(r_hi) else r_lo + 1e3
    probe = float(np.max(log_sq(np.linspace(r_lo, hi_probe, 257))))
    probe = probe if math.isfinite(probe) else 0.0

    def F(r):
        r = np.asarray(r, dtype=float)
        out = np.mean(np.exp(log_sq(r) - probe), axis=1) * 2 * math.pi * r
        if cpn:
            out = out * fubini_study_weight(r[:, None].astype(complex))
        return out

    base = spec or QuadratureSpec()
    if math.isinf(r_hi):
        base = base.replace(transform="tangent", scale=max(r_lo, 1.0))
        val, _ = integrate_1d(lambda x: F(r_lo + x), 0.0, INF, base)
    else:
        val, _ = integrate_1d(F, r_lo, r_hi, base)
    return float(val) * math.exp(probe)
