"""Experiment catalog: each id checks one quantitative claim and declares its pass criteria."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import cpn, fbi, fock, quad, spectral
from ..cpn import CPnParams, CPnState
from ..fock import FockParams, FockState
from .config import ExperimentConfig, format_p

NUMERIC_ERRORS = (ArithmeticError, quad.QuadratureError, spectral.SpectralError,
                  np.linalg.LinAlgError)


def fmt_index(a) -> str:
    return "(" + ",".join(str(int(x)) for x in a) + ")"


def fit_record(label: str, points, target: float, tol: float, kind: str = "equal") -> dict:
    """Slope fit with its declared criterion: equal (|s - t| <= tol), upper (s <= t + tol), rate (-s >= t)."""
    f = spectral.slope_fit(points)
    if kind == "equal":
        ok = abs(f.slope - target) <= tol
    elif kind == "upper":
        ok = f.slope <= target + tol
    elif kind == "rate":
        ok = -f.slope >= target - tol
    else:
        raise ValueError(kind)
    return {"label": label, "kind": kind, "slope": f.slope, "intercept": f.intercept,
            "r2": f.r2, "target": target, "tol": tol, "pass": bool(ok)}


def check_record(name: str, value: float, threshold: float, ok: bool) -> dict:
    return {"name": name, "value": float(value), "threshold": float(threshold), "pass": bool(ok)}


@dataclass
class Outcome:
    rows: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)


def _cell(fn, *args):
    """Run one cell; numeric failures become error rows instead of aborting the run."""
    try:
        return fn(*args)
    except NUMERIC_ERRORS as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def _collect(out: Outcome, results) -> list:
    good = []
    for r in results:
        items = r if isinstance(r, list) else [r]
        for item in items:
            if "error" in item:
                out.errors.append(item["error"])
                out.rows.append(item)
            else:
                good.append(item)
                out.rows.append(item)
    return good


def _fock_family(cfg: ExperimentConfig, N: int) -> tuple:
    if cfg.family == "explicit":
        return tuple(cfg.index), sum(cfg.index)
    if cfg.family == "nu_k":
        return fock.nu_k(cfg.n, cfg.alpha, int(round(N / 2)))
    k = int(round(N / 2))
    return (k,) + (0,) * (cfg.n - 1), k


# ----------------------------------------------------------------------------- Fock space

def run_fock_norms(cfg, pmap) -> Outcome:
    cells = [(N, a) for N in cfg.N
             for a in fock.multi_indices_upto(cfg.n, cfg.max_entry * cfg.n)
             if max(a) <= cfg.max_entry]

    def one(N, a):
        rows = []
        state = FockState(FockParams(cfg.n, N), a)
        for p in cfg.p:
            closed = fock.fock_lp_norm_closed(state, p).to_float()
            oracle = quad.lp_norm_quadrature(state, p)
            rows.append({"N": N, "index": fmt_index(a), "p": p, "closed_form": closed,
                         "quadrature": oracle, "rel_discrepancy": abs(closed - oracle) / closed})
        return rows

    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(one, *c), cells))
    worst = max((r["rel_discrepancy"] for r in good), default=math.inf)
    out.checks.append(check_record("max relative discrepancy", worst, cfg.tol_rel, worst <= cfg.tol_rel))
    return out


def _slope_experiment(cfg, pmap, norm_fn, target_fn, label_extra="") -> Outcome:
    cells = [(N, p) for p in cfg.p for N in cfg.N]
    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(norm_fn, *c), cells))
    for p in cfg.p:
        pts = [(r["N"], r["norm"]) for r in good if r["p"] == p]
        out.fits.append(fit_record(f"p={format_p(p)}{label_extra}", pts, target_fn(p), cfg.tol_slope))
    return out


def run_fock_sharpness(cfg, pmap) -> Outcome:
    def one(N, p):
        a, k = _fock_family(cfg, N)
        val = fock.fock_lp_norm_closed(FockState(FockParams(cfg.n, N), a), p).to_float()
        return {"N": N, "p": p, "index": fmt_index(a), "k": k, "norm": val,
                "prediction": fock.fock_asymptotic_prediction(0.5, 1, p, N, cfg.n)}

    alpha = 1 if cfg.family == "mu" else cfg.alpha
    return _slope_experiment(cfg, pmap, one, lambda p: fock.fock_exponent(cfg.n, alpha, p))


def run_fock_nu_k(cfg, pmap) -> Outcome:
    cfg = ExperimentConfig(**{**cfg.__dict__, "family": "nu_k"})

    def one(N, p):
        a, k = _fock_family(cfg, N)
        val = fock.fock_lp_norm_closed(FockState(FockParams(cfg.n, N), a), p).to_float()
        return {"N": N, "p": p, "index": fmt_index(a), "k": k, "norm": val,
                "prediction": fock.fock_asymptotic_prediction(0.5, cfg.alpha, p, N, cfg.n)}

    return _slope_experiment(cfg, pmap, one, lambda p: fock.fock_exponent(cfg.n, cfg.alpha, p),
                             f", alpha={cfg.alpha}")


def run_fock_ratio_bound(cfg, pmap) -> Outcome:
    cells = [(a, p) for p in cfg.p for a in fock.multi_indices(cfg.n, cfg.total)]

    def one(a, p):
        ratio, bound = fock.sharpness_ratio_bound(a, p)
        return {"index": fmt_index(a), "p": p, "ratio": ratio, "bound": bound}

    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(one, *c), cells))
    for p in cfg.p:
        sub = [r for r in good if r["p"] == p]
        worst = max(r["ratio"] for r in sub)
        bound = sub[0]["bound"]
        out.checks.append(check_record(f"max ratio p={format_p(p)}", worst, bound, worst <= bound))
    return out


def run_convexity(cfg, pmap) -> Outcome:
    grid = np.arange(cfg.xmax + 1, dtype=float)
    out = Outcome()
    for p in cfg.p:
        rep = fock.log_convexity_check(p, grid, cfg.tol_abs)
        out.rows.append({"p": p, "min_second_diff_f": rep.min_second_diff_f,
                         "min_second_diff_g": rep.min_second_diff_g})
        worst = min(rep.min_second_diff_f, rep.min_second_diff_g)
        out.checks.append(check_record(f"log-convexity p={format_p(p)}", worst, -cfg.tol_abs, rep.ok))
    return out


# ----------------------------------------------------------------------------- CP^n

def run_cpn_norms(cfg, pmap) -> Outcome:
    cells = []
    for N in cfg.N:
        params = CPnParams(cfg.n, N)
        cells += [(N, a) for a in params.indices() if max(a) <= cfg.max_entry]

    def one(N, a):
        rows = []
        state = CPnState(CPnParams(cfg.n, N), a)
        for p in cfg.p:
            closed = cpn.cpn_norm(state, p).to_float()
            oracle = quad.lp_norm_quadrature(state, p)
            rows.append({"N": N, "index": fmt_index(a), "p": p, "closed_form": closed,
                         "quadrature": oracle, "rel_discrepancy": abs(closed - oracle) / closed})
        return rows

    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(one, *c), cells))
    worst = max((r["rel_discrepancy"] for r in good), default=math.inf)
    out.checks.append(check_record("max relative discrepancy", worst, cfg.tol_rel, worst <= cfg.tol_rel))
    return out


def _cpn_saturating_norm(cfg, N, p) -> dict:
    state = CPnState(CPnParams(cfg.n, N), cpn.saturating_index(cfg.n, N))
    val = cpn.cpn_norm(state, p).to_float()
    pred = cpn.cpn_asymptotic_prediction(cfg.n, p, N)
    return {"N": N, "p": p, "index": fmt_index(state.index), "norm": val,
            "prediction": pred, "ratio": val / pred}


def run_cpn_sharpness(cfg, pmap) -> Outcome:
    return _slope_experiment(cfg, pmap, lambda N, p: _cpn_saturating_norm(cfg, N, p),
                             lambda p: cpn.cpn_exponent(cfg.n, p))


def run_cpn_constant(cfg, pmap) -> Outcome:
    cells = [(N, p) for p in cfg.p for N in cfg.N]
    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(lambda N, p: _cpn_saturating_norm(cfg, N, p), *c), cells))
    for r in good:
        dev = abs(r["ratio"] - 1.0)
        out.checks.append(check_record(f"ratio to prediction N={r['N']} p={format_p(r['p'])}",
                                       dev, cfg.tol_rel, dev <= cfg.tol_rel))
    return out


def run_cpn_spectrum(cfg, pmap) -> Outcome:
    def one(N):
        params = CPnParams(cfg.n, N)
        mat = spectral.build_matrix("cpn", cpn.CPnSymbol.H(cfg.n), params)
        states = mat.states()
        Hq = quad.quadrature_matrix(states, lambda r: r[:, 0] ** 2 / (1 + np.sum(r * r, axis=1)))
        expected = np.array([cpn.cpn_model_eigenvalue(params, a) for a in mat.indices])
        off = float(np.max(np.abs(Hq - np.diag(np.diag(Hq)))))
        diag_err = float(np.max(np.abs(np.diag(Hq).real - expected)))
        closed_err = float(np.max(np.abs(np.diag(mat.entries) - expected)))
        eig = np.linalg.eigvalsh(Hq)
        return {"N": N, "dimension": len(states), "offdiag_max": off, "diag_error": diag_err,
                "closed_form_diag_error": closed_err, "closed_form_diagonal": mat.is_diagonal(),
                "max_eigenvalue": float(eig.max())}

    out = Outcome()
    good = _collect(out, pmap(lambda N: _cell(one, N), cfg.N))
    tol = cfg.tol_rel
    out.checks.append(check_record("quadrature off-diagonal", max(r["offdiag_max"] for r in good),
                                   tol, all(r["offdiag_max"] <= tol for r in good)))
    out.checks.append(check_record("quadrature diagonal error", max(r["diag_error"] for r in good),
                                   tol, all(r["diag_error"] <= tol for r in good)))
    out.checks.append(check_record("largest eigenvalue", max(r["max_eigenvalue"] for r in good),
                                   1.0, all(r["max_eigenvalue"] <= 1.0 + 1e-12 for r in good)))
    out.checks.append(check_record("closed-form matrix diagonal", 0.0, 0.0,
                                   all(r["closed_form_diagonal"] for r in good)))
    return out


def run_weyl_window(cfg, pmap) -> Outcome:
    def one(N):
        w = spectral.window_members(CPnParams(cfg.n, N), cfg.E, cfg.C)
        return {"N": N, "count": w.count, "closed_count": spectral.window_count_closed(cfg.n, N, cfg.E, cfg.C),
                "lowest": min((m[0] for m in w.members), default=math.nan),
                "highest": max((m[0] for m in w.members), default=math.nan)}

    out = Outcome()
    good = _collect(out, pmap(lambda N: _cell(one, N), cfg.N))
    empty = sum(1 for r in good if r["count"] == 0)
    out.checks.append(check_record("empty windows", empty, 0, empty == 0))
    mismatch = sum(1 for r in good if r["count"] != r["closed_count"])
    out.checks.append(check_record("count mismatches vs enumeration", mismatch, 0, mismatch == 0))
    return out


def _kernel(cfg):
    return spectral.fejer_kernel(cfg.radius) if cfg.kernel == "fejer" else spectral.bump_kernel(cfg.radius)


def run_projector_diag(cfg, pmap) -> Outcome:
    kern = _kernel(cfg)

    def one(N):
        spec = spectral.cpn_model_spectrum(CPnParams(1, N))
        pd = spectral.projector_diagonal(spec, kern, cfg.E)
        return {"N": N, "sup": pd.sup, "sup_scaled": pd.sup / math.sqrt(N), "sup_radius": pd.sup_radius,
                "integral": pd.integral, "trace": pd.trace}

    out = Outcome()
    good = _collect(out, pmap(lambda N: _cell(one, N), cfg.N))
    scaled = [r["sup_scaled"] for r in good]
    spread = max(scaled) / min(scaled)
    out.checks.append(check_record("sup/N^(1/2) max/min", spread, cfg.band, spread <= cfg.band))
    out.fits.append(fit_record("integral of diagonal", [(r["N"], r["integral"]) for r in good],
                               0.5, 2 * cfg.tol_slope))
    return out


def _quasimodes(cfg, N):
    w = spectral.window_members(CPnParams(1, N), cfg.E, cfg.C)
    return w, [spectral.sample_quasimode(w, s) for s in cfg.seeds]


def run_quasimode_sup(cfg, pmap) -> Outcome:
    cells = [(N, s) for N in cfg.N for s in cfg.seeds]

    def one(N, seed):
        w = spectral.window_members(CPnParams(1, N), cfg.E, cfg.C)
        qm = spectral.sample_quasimode(w, seed)
        res = spectral.quasimode_sup_norm(qm)
        return {"N": N, "seed": seed, "members": w.count, "sup": res.value,
                "argmax_r": float(res.argmax[0]), "argmax_theta": float(res.argmax[1])}

    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(one, *c), cells))
    best = [(N, max(r["sup"] for r in good if r["N"] == N)) for N in cfg.N]
    fit = fit_record("max over seeds", best, 0.25, cfg.tol_slope, kind="upper")
    out.fits.append(fit)
    law = lambda N: math.exp(fit["intercept"]) * N ** fit["slope"]
    worst = max(r["sup"] / law(r["N"]) for r in good)
    out.checks.append(check_record("largest sample / fitted law", worst, cfg.factor, worst <= cfg.factor))
    return out


def run_quasimode_concentration(cfg, pmap) -> Outcome:
    # region |H - E| > 1/4 with H = r^2/(1+r^2): r^2 < h/(1-h) at h = E - 1/4, r^2 > at h = E + 1/4
    lo_h, hi_h = cfg.E - 0.25, cfg.E + 0.25
    r_in = math.sqrt(lo_h / (1 - lo_h)) if lo_h > 0 else 0.0
    r_out = math.sqrt(hi_h / (1 - hi_h)) if hi_h < 1 else math.inf
    cells = [(N, s) for N in cfg.N for s in cfg.seeds]

    def one(N, seed):
        w = spectral.window_members(CPnParams(1, N), cfg.E, cfg.C)
        qm = spectral.sample_quasimode(w, seed)
        mass = 0.0
        if r_in > 0:
            mass += quad.annulus_mass(qm, 0.0, r_in)
        if math.isfinite(r_out):
            mass += quad.annulus_mass(qm, r_out, math.inf)
        return {"N": N, "seed": seed, "members": w.count, "outside_mass": mass}

    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(one, *c), cells))
    worst = [(N, max(r["outside_mass"] for r in good if r["N"] == N)) for N in cfg.N]
    out.fits.append(fit_record("max outside mass over seeds", worst, cfg.rate, 0.0, kind="rate"))
    return out


# ----------------------------------------------------------------------------- FBI

def run_fbi_isometry(cfg, pmap) -> Outcome:
    cells = [(N, k, v) for N in cfg.N for k in cfg.k for v in fbi.VARIANTS]

    def one(N, k, variant):
        xg = fbi.default_x_grid(N, k, variant)
        f = (lambda x: fbi.hermite_function(k, x)) if variant == "appendix" else \
            (lambda x: fbi.semiclassical_hermite(k, N, x))
        u = fbi.SampledFunction1D.from_function(f, xg)
        grid = fbi.default_phase_grid(N, k, variant)
        ratio = fbi.isometry_ratio(variant, u, N, grid)
        dbar = fbi.dbar_residual(variant, u, N, grid)
        return {"N": N, "k": k, "variant": variant, "norm_ratio": ratio, "dbar_residual": dbar,
                "grid_points": grid.shape[0] * grid.shape[1]}

    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(one, *c), cells))
    dev = max(abs(r["norm_ratio"] - 1) for r in good)
    out.checks.append(check_record("max |norm ratio - 1|", dev, cfg.tol_rel, dev <= cfg.tol_rel))
    db = max(r["dbar_residual"] for r in good)
    out.checks.append(check_record("max dbar residual", db, 1e-6, db <= 1e-6))
    return out


def run_fbi_conjugation(cfg, pmap) -> Outcome:
    cells = [(N, k) for k in cfg.k for N in cfg.N]

    def one(N, k):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", fbi.GridWarning)
            c = fbi.conjugation_residual(k, N, corrected=True)
            u = fbi.conjugation_residual(k, N, corrected=False)
        return {"N": N, "k": k, "eigenvalue": c.eigenvalue, "residual": c.residual,
                "uncorrected_residual": u.residual, "discretization_floor": c.floor}

    out = Outcome()
    good = _collect(out, pmap(lambda c: _cell(one, *c), cells))
    Ns = sorted(cfg.N)
    for k in cfg.k:
        sub = {r["N"]: r for r in good if r["k"] == k}
        dec = all(sub[a]["residual"] > sub[b]["residual"] for a, b in zip(Ns, Ns[1:]))
        out.checks.append(check_record(f"residual decreases in N, k={k}",
                                       sub[Ns[-1]]["residual"], sub[Ns[0]]["residual"], dec))
        ab = all(r["uncorrected_residual"] > r["residual"] for r in sub.values())
        out.checks.append(check_record(f"shift correction helps, k={k}",
                                       min(r["uncorrected_residual"] / r["residual"] for r in sub.values()),
                                       1.0, ab))
    return out


# ----------------------------------------------------------------------------- catalog

@dataclass(frozen=True)
class Plot:
    x: str
    y: str
    series: str = "p"
    kind: str = "loglog"


@dataclass(frozen=True)
class Entry:
    id: str
    anchor: str
    runner: Callable
    defaults: dict
    spaces: tuple = ("fock",)
    needs_N: bool = True
    needs_p: bool = False
    needs_seeds: bool = False
    min_fit_points: int = 0
    plot: Plot = Plot("N", "norm")


SLOPE_N = [250, 500, 1000, 2000, 4000]

CATALOG = {e.id: e for e in [
    Entry("fock-norms", "closed-form L^p and sup norms of Bargmann basis states",
          run_fock_norms, {"n": 1, "N": [1, 4, 16], "p": [2, 3, 4, 7.5, math.inf], "max_entry": 8,
                           "tol_rel": 1e-6},
          needs_p=True, plot=Plot("N", "rel_discrepancy", kind="ratio")),
    Entry("fock-sharpness", "harmonic-oscillator eigenfunctions e_(k,0,...,0) saturate the exponent (n-1/2)(1/2-1/p)",
          run_fock_sharpness, {"n": 1, "N": SLOPE_N, "p": [4, math.inf]},
          needs_p=True, min_fit_points=4),
    Entry("fock-nu-k", "indices with alpha equal nonzero entries grow like N^((n-alpha/2)(1/2-1/p))",
          run_fock_nu_k, {"n": 2, "alpha": 2, "N": SLOPE_N, "p": [4, math.inf]},
          needs_p=True, min_fit_points=4),
    Entry("fock-ratio-bound", "||e_nu||_p is at most a dimensional constant times ||e_(|nu|,0,...,0)||_p",
          run_fock_ratio_bound, {"n": 3, "total": 20, "p": [2, 4, math.inf]},
          needs_N=False, needs_p=True, plot=Plot("index", "ratio", kind="ratio")),
    Entry("convexity", "the one-coordinate factors f and g of the refined norm formula are log-convex",
          run_convexity, {"p": [2, 4, 10], "xmax": 200, "tol_abs": 1e-12},
          needs_N=False, needs_p=True, plot=Plot("p", "min_second_diff_f", series="", kind="ratio")),
    Entry("cpn-norms", "closed-form L^p and sup norms of the CP^n sections e_a",
          run_cpn_norms, {"space": "cpn", "n": 1, "N": [2, 8, 30], "p": [2, 3, 4, 7.5, math.inf],
                          "max_entry": 10, "tol_rel": 1e-6},
          spaces=("cpn",), needs_p=True, plot=Plot("N", "rel_discrepancy", kind="ratio")),
    Entry("cpn-sharpness", "e_(floor(N/2),0,...,0) on CP^n grows like N^((n-1/2)(1/2-1/p))",
          run_cpn_sharpness, {"space": "cpn", "n": 1, "N": SLOPE_N, "p": [4, math.inf]},
          spaces=("cpn",), needs_p=True, min_fit_points=4),
    Entry("cpn-constant", "explicit leading constant of the CP^n saturating family",
          run_cpn_constant, {"space": "cpn", "n": 1, "N": [4000], "p": [4, math.inf], "tol_rel": 0.02},
          spaces=("cpn",), needs_p=True, plot=Plot("N", "ratio", kind="ratio")),
    Entry("cpn-spectrum", "T_N(|w_1|^2/(1+|w|^2)) is diagonal with eigenvalues (a_1+1)/(N+n+1)",
          run_cpn_spectrum, {"space": "cpn", "n": 1, "N": [2, 4, 8], "tol_rel": 1e-8},
          spaces=("cpn",), plot=Plot("N", "diag_error", series="", kind="ratio")),
    Entry("weyl-window", "every window |lambda - E| <= C/N around a regular value contains an eigenvalue",
          run_weyl_window, {"space": "cpn", "n": 1, "E": 0.5, "C": 1.0, "N": list(range(10, 2001))},
          spaces=("cpn",), plot=Plot("N", "count", series="", kind="ratio")),
    Entry("projector-diag", "the smoothed spectral projector diagonal is of size N^(n-1/2)",
          run_projector_diag, {"space": "cpn", "n": 1, "E": 0.5, "N": [50, 100, 200, 400, 800],
                               "radius": 1.0, "kernel": "fejer", "band": 3.0},
          spaces=("cpn",), min_fit_points=4, plot=Plot("N", "integral", series="")),
    Entry("quasimode-sup", "window quasimodes have sup norm O(N^((n-1/2)/2))",
          run_quasimode_sup, {"space": "cpn", "n": 1, "E": 0.5, "C": 1.0, "N": [100, 200, 400, 800],
                              "seeds": list(range(100)), "factor": 3.0},
          spaces=("cpn",), needs_seeds=True, min_fit_points=4, plot=Plot("N", "sup", series="")),
    Entry("quasimode-concentration", "window quasimodes carry negligible mass away from the energy level",
          run_quasimode_concentration, {"space": "cpn", "n": 1, "E": 0.5, "C": 1.0,
                                        "N": [100, 200, 400, 800], "seeds": list(range(100)), "rate": 4.0},
          spaces=("cpn",), needs_seeds=True, min_fit_points=4, plot=Plot("N", "outside_mass", series="")),
    Entry("fbi-isometry", "both FBI transforms are isometries onto holomorphic weighted spaces",
          run_fbi_isometry, {"space": "fbi", "N": [16, 64], "k": [0, 1, 2, 3], "tol_rel": 1e-4},
          spaces=("fbi",), plot=Plot("N", "norm_ratio", series="variant", kind="ratio")),
    Entry("fbi-conjugation", "the FBI transform conjugates Weyl x^2+xi^2 to Toeplitz |z|^2 - 1/N",
          run_fbi_conjugation, {"space": "fbi", "N": [16, 64], "k": [0, 1, 2]},
          spaces=("fbi",), plot=Plot("N", "residual", series="k")),
]}
