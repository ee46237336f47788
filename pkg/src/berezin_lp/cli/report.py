"""Experiment reports and their CSV / JSON / SVG renderings."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


@dataclass
class ExperimentReport:
    experiment: str
    anchor: str
    config: dict
    rows: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    seed_registry: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (not self.errors and all(f["pass"] for f in self.fits)
                and all(c["pass"] for c in self.checks) and bool(self.fits or self.checks))

    def payload(self, include_meta: bool = True) -> dict:
        d = {"experiment": self.experiment, "anchor": self.anchor, "config": self.config,
             "seed_registry": self.seed_registry, "rows": self.rows, "fits": self.fits,
             "checks": self.checks, "errors": self.errors, "pass": self.passed}
        if include_meta:
            d["meta"] = self.meta
        return _jsonable(d)


def _jsonable(x):
    """Non-finite floats become the strings 'inf', '-inf', 'nan' (strict JSON has no such literals)."""
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _jsonable(x.item())
    return x


def to_json(report: ExperimentReport, include_meta: bool = True) -> str:
    return json.dumps(report.payload(include_meta), indent=2, allow_nan=False) + "\n"


def canonical_json(report: ExperimentReport) -> str:
    """The JSON payload without runtime, timestamp and version; identical across re-runs."""
    return to_json(report, include_meta=False)


def load_schema() -> dict:
    return json.loads(resources.files("berezin_lp.cli").joinpath("report_schema.json").read_text())


def validate_json(text: str) -> None:
    import jsonschema

    jsonschema.validate(json.loads(text), load_schema())


# ----------------------------------------------------------------------------- CSV

def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        s = "%.17g" % v
        # keep floats distinguishable from ints so parsing restores the type
        if s.lstrip("-").isdigit():
            s += ".0"
        return s
    return str(v)


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def csv_columns(rows: list) -> list:
    cols: list = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def to_csv(report: ExperimentReport) -> str:
    cols = csv_columns(report.rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in report.rows:
        w.writerow([_fmt_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def read_csv(text: str) -> list:
    """Inverse of to_csv: empty cells (columns absent from a row) are dropped."""
    reader = csv.reader(io.StringIO(text))
    cols = next(reader)
    out = []
    for line in reader:
        out.append({c: _parse_cell(s) for c, s in zip(cols, line) if s != ""})
    return out


# ----------------------------------------------------------------------------- SVG

def to_svg(report: ExperimentReport, plot) -> str:
    """Log-log plot of plot.y against plot.x, one series per distinct plot.series value.

    Each series, fit line and target-slope line carries an SVG id
    (series-*, fit-*, target-*) so tests and readers can locate them.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "berezin-lp"
    rows = [r for r in report.rows if "error" not in r and plot.y in r]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    groups: dict = {}
    for r in rows:
        groups.setdefault(r.get(plot.series) if plot.series else None, []).append(r)
    categorical = any(isinstance(r.get(plot.x), str) for r in rows)
    positive = all(isinstance(r[plot.y], (int, float)) and r[plot.y] > 0 for r in rows)
    for key, sub in groups.items():
        xs = list(range(len(sub))) if categorical else [r[plot.x] for r in sub]
        ys = [float(r[plot.y]) for r in sub]
        label = "all" if key is None else f"{plot.series}={_label(key)}"
        (line,) = ax.plot(xs, ys, "o", label=label)
        line.set_gid(_gid("series", label))
    if not categorical and rows:
        all_x = sorted({float(r[plot.x]) for r in rows})
        for f in report.fits:
            if not (math.isfinite(f["slope"]) and len(all_x) > 1):
                continue
            xs = [all_x[0], all_x[-1]]
            (fl,) = ax.plot(xs, [math.exp(f["intercept"]) * x ** f["slope"] for x in xs], "-",
                            label=f"fit {f['label']}: {f['slope']:.3f}")
            fl.set_gid(_gid("fit", f["label"]))
            y0 = math.exp(f["intercept"]) * xs[0] ** f["slope"]
            target = -f["target"] if f["kind"] == "rate" else f["target"]
            (tl,) = ax.plot(xs, [y0 * (x / xs[0]) ** target for x in xs], "--",
                            label=f"target {f['label']}: {target:g}")
            tl.set_gid(_gid("target", f["label"]))
    if positive and not categorical and plot.kind == "loglog":
        ax.set_xscale("log")
        ax.set_yscale("log")
    elif positive:
        ax.set_yscale("log")
    ax.set_xlabel(plot.x)
    ax.set_ylabel(plot.y)
    ax.set_title(report.experiment)
    if groups:
        ax.legend(fontsize=7)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _gid(prefix: str, label: str) -> str:
    return prefix + "-" + re.sub(r"[^A-Za-z0-9=._-]+", "_", label)


def _label(key) -> str:
    if isinstance(key, float):
        return "inf" if key == math.inf else f"{key:g}"
    return str(key)


def emit(report: ExperimentReport, fmt: str, out_dir, plot=None) -> Path:
    """Write one rendering to out_dir/<experiment>.<fmt> and return the path."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{report.experiment}.{fmt}"
        if fmt == "json":
            text = to_json(report)
            validate_json(text)
        elif fmt == "csv":
            text = to_csv(report)
        elif fmt == "svg":
            if plot is None:
                from .catalog import CATALOG
                plot = CATALOG[report.experiment].plot
            text = to_svg(report, plot)
        else:
            raise ValueError(f"unknown format {fmt!r}")
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {fmt} report under {out_dir}: {exc}") from exc
    return path
