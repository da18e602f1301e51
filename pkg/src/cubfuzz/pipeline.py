"""Fit -> fuzzify -> aggregate orchestration shared by the CLI and scripts."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import aggregate as agg
from .cub import FitOptions, ModelChoice, select_model
from .fuzzy import (
    CUB_FUZZY, EMPIRICAL, SPLINE, SYSTEMS, IfsProfile, SplineConfig,
    cub_fuzzy_profile, empirical_profile, spline_profile,
)
from .io import RatingsTable, read_table
from .ratings import NEGATIVE, RatingSample, RatingScale, edf

WEIGHT_SCHEMES = ("uncertainty", "membership", "uniform")
DEFAULT_WEIGHTS = {CUB_FUZZY: "uncertainty", EMPIRICAL: "membership", SPLINE: "uniform"}
SEED_ENV = "CUBFUZZ_SEED"


@dataclass
class AnalysisConfig:
    m: int = 7
    ip: int | None = None
    lb: int = 1
    ub: int | None = None
    orientation: str = "positive"
    systems: list = field(default_factory=lambda: list(SYSTEMS))
    spline: SplineConfig = field(default_factory=SplineConfig)
    shelter: str | int = "none"
    alpha: float = 0.05
    # None means the per-system default; otherwise a scheme name or a custom weights file
    weights: str | None = None
    seed: int = 0
    max_iter: int = 1000
    tol: float = 1e-8

    def __post_init__(self):
        bad = [s for s in self.systems if s not in SYSTEMS]
        if bad:
            raise ValueError(f"unknown system(s) {bad}; choose from {SYSTEMS}")
        if isinstance(self.shelter, str) and self.shelter not in ("none", "auto"):
            self.shelter = int(self.shelter)
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.scale  # validates

    @property
    def scale(self) -> RatingScale:
        return RatingScale(self.m, self.ip, self.lb, self.ub, self.orientation)

    @property
    def fit_options(self) -> FitOptions:
        return FitOptions(max_iter=self.max_iter, tol=self.tol)


def load_config_file(path) -> dict:
    """Flatten a JSON/YAML config into AnalysisConfig keyword arguments."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        import yaml
        doc = yaml.safe_load(text) or {}
    else:
        doc = json.loads(text)
    out = {}
    scale = doc.get("scale", {})
    for key in ("m", "ip", "lb", "ub", "orientation"):
        if key in scale:
            out[key] = scale[key]
    for key in ("systems", "shelter", "alpha", "weights", "seed"):
        if key in doc:
            out[key] = doc[key]
    em = doc.get("em", {})
    for key in ("max_iter", "tol"):
        if key in em:
            out[key] = em[key]
    if "spline" in doc:
        out["spline"] = SplineConfig(**doc["spline"])
    return out


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> AnalysisConfig:
    """Defaults < config file < explicit overrides; the seed falls back to $CUBFUZZ_SEED."""
    kw = dict(file_values or {})
    kw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "seed" not in kw and os.environ.get(SEED_ENV):
        kw["seed"] = int(os.environ[SEED_ENV])
    return AnalysisConfig(**kw)


def oriented(table: RatingsTable, cfg: AnalysisConfig) -> tuple[RatingsTable, RatingScale]:
    """Reverse negatively oriented data so that higher categories mean higher feeling."""
    scale = cfg.scale
    if scale.orientation == NEGATIVE:
        return table.reversed(), scale.with_positive_orientation()
    return table, scale


@dataclass
class ItemFit:
    item: str
    n: int
    choice: ModelChoice | None = None
    error: str | None = None


def run_fits(table: RatingsTable, cfg: AnalysisConfig) -> list[ItemFit]:
    """Per-item CUB fits; a failing item is recorded without stopping the others."""
    table, _ = oriented(table, cfg)
    out = []
    for k, name in enumerate(table.item_names):
        try:
            sample = table.item_sample(k)
        except ValueError as exc:
            out.append(ItemFit(name, 0, error=str(exc)))
            continue
        try:
            choice = select_model(sample, cfg.m, cfg.shelter, cfg.alpha, cfg.fit_options)
            out.append(ItemFit(name, sample.n, choice))
        except ValueError as exc:
            out.append(ItemFit(name, sample.n, error=str(exc)))
    return out


def build_profiles(
    table: RatingsTable, cfg: AnalysisConfig, fits: list[ItemFit] | None = None
) -> tuple[dict, list[str]]:
    """Profiles per system per item, plus error messages for items that could not be profiled."""
    if CUB_FUZZY in cfg.systems and fits is None:
        fits = run_fits(table, cfg)
    table, scale = oriented(table, cfg)
    errors = []
    by_item = {f.item: f for f in fits or []}
    profiles = {s: {} for s in cfg.systems}
    for k, name in enumerate(table.item_names):
        try:
            sample = table.item_sample(k)
        except ValueError as exc:
            errors.append(f"{name}: {exc}")
            continue
        F = edf(sample)
        for system in cfg.systems:
            if system == SPLINE:
                profiles[system][name] = spline_profile(scale, cfg.spline)
            elif system == EMPIRICAL:
                profiles[system][name] = empirical_profile(F, scale)
            else:
                f = by_item.get(name)
                if f is None or f.choice is None:
                    errors.append(f"{name}: no CUB fit available ({f.error if f else 'missing'})")
                    continue
                profiles[system][name] = cub_fuzzy_profile(F, f.choice.pi1, scale, f.choice.chosen)
    return profiles, errors


def read_custom_weights(path, item_names) -> agg.WeightVector:
    """Two-column CSV ``item,weight`` matched to the data header."""
    rows = read_table(path)
    got = {r["item"]: float(r["weight"]) for r in rows}
    missing = [n for n in item_names if n not in got]
    if missing:
        raise ValueError(f"{path}: no weight for item(s) {missing}")
    return agg.WeightVector.normalized([got[n] for n in item_names])


def item_weights(
    scheme: str, profiles: list[IfsProfile], columns: list[RatingSample], item_names
) -> agg.WeightVector:
    if scheme == "uniform":
        return agg.WeightVector.uniform(len(profiles))
    if scheme == "uncertainty":
        g = [agg.fuzzy_prop_uncertainty(p, s) for p, s in zip(profiles, columns)]
        return agg.log_inverse_weights(g)
    if scheme == "membership":
        g = [agg.fuzzy_prop_membership(p, s) for p, s in zip(profiles, columns)]
        return agg.log_inverse_weights(g)
    return read_custom_weights(scheme, item_names)


@dataclass
class SystemAggregate:
    system: str
    scheme: str
    weights: agg.WeightVector
    items: tuple
    n: int
    category_membership: np.ndarray
    composite: agg.CompositeResult | None = None
    # membership-only systems
    respondent_mu: np.ndarray | None = None
    item_mu: np.ndarray | None = None
    mu_bar: float | None = None


def run_aggregate(table: RatingsTable, cfg: AnalysisConfig, profiles: dict) -> tuple[list[SystemAggregate], list[str]]:
    """Weights and composites per system over the listwise-complete rows."""
    table, _ = oriented(table, cfg)
    rows = table.complete_rows()
    out, errors = [], []
    if rows.shape[0] == 0:
        return out, ["no complete rows to aggregate"]
    for system in cfg.systems:
        names = [n for n in table.item_names if n in profiles.get(system, {})]
        if len(names) != table.k:
            errors.append(f"{system}: profiles missing for some items; aggregation skipped")
            continue
        profs = [profiles[system][n] for n in names]
        columns = [RatingSample(rows[:, k], cfg.m) for k in range(table.k)]
        scheme = cfg.weights or DEFAULT_WEIGHTS[system]
        try:
            w = item_weights(scheme, profs, columns, names)
            cat = agg.category_weighted_membership(profs, w)
            if system == EMPIRICAL:
                per, mu_bar = agg.membership_aggregate(rows, profs, w)
                item_mu = np.array([agg.fuzzy_prop_membership(p, s) for p, s in zip(profs, columns)])
                out.append(SystemAggregate(system, scheme, w, tuple(names), rows.shape[0], cat,
                                           respondent_mu=per, item_mu=item_mu, mu_bar=mu_bar))
            else:
                comp = agg.composite(rows, profs, w)
                out.append(SystemAggregate(system, scheme, w, tuple(names), rows.shape[0], cat, comp))
        except ValueError as exc:
            errors.append(f"{system}: {exc}")
    return out, errors
