"""Experiment configuration: defaults per experiment, JSON config files and flag overrides."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

THREADS_ENV = "BEREZIN_LP_THREADS"


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def parse_int_list(text: str, field_name: str = "N") -> list:
    """'a:b:step' (b exclusive, step default 1) or a comma-separated list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            out = list(range(*parts))
        else:
            out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(field_name, f"cannot parse {text!r} (use a:b:step or a,b,c)") from None
    if not out:
        raise ConfigError(field_name, f"range {text!r} is empty")
    return out


def parse_p(token) -> float:
    if isinstance(token, (int, float)):
        return float(token)
    t = str(token).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise ConfigError("p", f"cannot parse {token!r}") from None


def parse_p_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [parse_p(x) for x in text]
    return [parse_p(x) for x in str(text).split(",") if x.strip()]


def format_p(p: float) -> str:
    return "inf" if p == math.inf else repr(float(p))


@dataclass
class ExperimentConfig:
    experiment: str
    space: str = "fock"
    n: int = 1
    N: list = field(default_factory=list)
    p: list = field(default_factory=list)
    family: str = "mu"
    alpha: int = 1
    index: Optional[list] = None
    max_entry: int = 8
    total: int = 20
    E: float = 0.5
    C: float = 1.0
    seeds: list = field(default_factory=list)
    k: list = field(default_factory=list)
    radius: float = 1.0
    kernel: str = "fejer"
    xmax: int = 200
    tol_slope: float = 0.05
    tol_rel: float = 1e-6
    tol_abs: float = 1e-12
    band: float = 3.0
    factor: float = 3.0
    rate: float = 4.0
    out: Optional[str] = None
    formats: list = field(default_factory=lambda: ["json"])
    threads: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = [format_p(p) for p in self.p]
        # output location and thread count do not affect results
        d.pop("out")
        d.pop("threads")
        d.pop("formats")
        return d


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"not an integer: {raw!r}") from None
    if value < 1:
        raise ConfigError(THREADS_ENV, "must be >= 1")
    return value


def build_config(experiment: str, file_values: Optional[dict] = None,
                 overrides: Optional[dict] = None) -> ExperimentConfig:
    """Catalog defaults, then config-file values, then flag overrides."""
    from .catalog import CATALOG

    if experiment not in CATALOG:
        raise ConfigError("experiment", f"unknown id {experiment!r}; choose from {sorted(CATALOG)}")
    values = dict(CATALOG[experiment].defaults)
    for source in (file_values or {}, overrides or {}):
        for key, val in source.items():
            if val is not None:
                values[key] = val
    values["experiment"] = experiment
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration field")
    if isinstance(values.get("N"), str):
        values["N"] = parse_int_list(values["N"], "N")
    if isinstance(values.get("seeds"), (str, int)):
        s = values["seeds"]
        values["seeds"] = list(range(s)) if isinstance(s, int) else parse_int_list(s, "seeds")
    if isinstance(values.get("k"), str):
        values["k"] = parse_int_list(values["k"], "k")
    if "p" in values:
        values["p"] = parse_p_list(values["p"])
    if isinstance(values.get("formats"), str):
        values["formats"] = [x for x in values["formats"].split(",") if x]
    values.setdefault("threads", default_threads())
    cfg = ExperimentConfig(**values)
    validate(cfg)
    return cfg


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    return data


def validate(cfg: ExperimentConfig) -> None:
    from .catalog import CATALOG

    entry = CATALOG[cfg.experiment]
    if cfg.space not in entry.spaces:
        raise ConfigError("space", f"{cfg.experiment} runs on {entry.spaces}, got {cfg.space!r}")
    if cfg.n < 1:
        raise ConfigError("n", "must be >= 1")
    if entry.needs_N and (not cfg.N or min(cfg.N) < 1):
        raise ConfigError("N", "need a nonempty list of integers >= 1")
    if entry.needs_p:
        if not cfg.p:
            raise ConfigError("p", "need at least one p value")
        if any(not p >= 2 for p in cfg.p):
            raise ConfigError("p", "values must lie in [2, inf]")
    if not 1 <= cfg.alpha <= cfg.n:
        raise ConfigError("alpha", f"must lie in [1, n={cfg.n}]")
    if cfg.family not in ("mu", "nu_k", "explicit"):
        raise ConfigError("family", "must be mu, nu_k or explicit")
    if cfg.family == "explicit" and (not cfg.index or len(cfg.index) != cfg.n):
        raise ConfigError("index", f"explicit family needs an index of length n={cfg.n}")
    if not cfg.C > 0:
        raise ConfigError("C", "must be positive")
    if not cfg.radius > 0:
        raise ConfigError("radius", "must be positive")
    if cfg.kernel not in ("fejer", "bump"):
        raise ConfigError("kernel", "must be fejer or bump")
    if cfg.tol_slope < 0 or cfg.tol_rel < 0:
        raise ConfigError("tol_slope", "tolerances must be non-negative")
    if entry.needs_seeds and not cfg.seeds:
        raise ConfigError("seeds", "need at least one seed")
    if any(f not in ("csv", "json", "svg") for f in cfg.formats):
        raise ConfigError("formats", "choose from csv, json, svg")
    if cfg.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    if entry.min_fit_points and len(cfg.N) < entry.min_fit_points:
        raise ConfigError("N", f"slope fits need at least {entry.min_fit_points} values of N")
