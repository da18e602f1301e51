"""Defuzzification: item weights, IWAM aggregation and composite indicators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fuzzy import CUB_FUZZY, IfsProfile, IfsTriple
from .ratings import RatingSample

G_FLOOR = 1e-9


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    @classmethod
    def uniform(cls, k: int) -> "WeightVector":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def normalized(cls, raw: Sequence[float], tol: float = 1e-6) -> "WeightVector":
        """Accept user weights that sum to 1 within ``tol`` and renormalize exactly."""
        raw = np.asarray(raw, dtype=float)
        if abs(raw.sum() - 1.0) > tol:
            raise ValueError(f"custom weights sum to {raw.sum():.6g}, expected 1")
        return cls(raw / raw.sum())


@dataclass(frozen=True)
class RespondentAggregate:
    mu: float
    nu: float


@dataclass(frozen=True)
class CompositeResult:
    mu_bar: float
    nu_bar: float
    u_bar: float
    s_bar: float
    a_bar: float
    weights: WeightVector
    respondent_mu: np.ndarray
    respondent_nu: np.ndarray
    # per-item means over respondents, columns (mu, nu, u, score, accuracy)
    item_means: np.ndarray
    u_bar_closed_form: float | None = None

    @property
    def per_respondent(self) -> list[RespondentAggregate]:
        return [RespondentAggregate(float(a), float(b)) for a, b in zip(self.respondent_mu, self.respondent_nu)]

    @property
    def n(self) -> int:
        return self.respondent_mu.size


def _mean_over(values: np.ndarray, sample: RatingSample) -> float:
    if values.size != sample.m:
        raise ValueError(f"profile has {values.size} categories, sample scale has {sample.m}")
    return float(np.dot(sample.freq, values) / sample.n)


def fuzzy_prop_membership(profile: IfsProfile, sample: RatingSample) -> float:
    """Share of membership achieved on the item: mean of mu over the ratings."""
    return _mean_over(profile.mu, sample)


def fuzzy_prop_uncertainty(profile: IfsProfile, sample: RatingSample) -> float:
    """Mean hesitancy of the item over the ratings."""
    if profile.u is None:
        raise ValueError(
            f"{profile.system} profile has no hesitancy; use membership-proportion weights"
        )
    return _mean_over(profile.u, sample)


def log_inverse_weights(g: Sequence[float]) -> WeightVector:
    """w_k proportional to ln(1 / g_k); values under 1e-9 are floored there first."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0) or np.any(g > 1):
        raise ValueError("fuzzy proportions must lie in [0, 1]")
    logs = -np.log(np.maximum(g, G_FLOOR))
    total = logs.sum()
    if total <= 0:
        raise ValueError("weights undefined (every proportion equals 1); use uniform")
    return WeightVector(logs / total)


def _check_profiles(profiles: Sequence[IfsProfile], ifs: bool = True):
    if not profiles:
        raise ValueError("no item profiles")
    m = profiles[0].m
    if any(p.m != m for p in profiles):
        raise ValueError("item profiles must share the scale length")
    if ifs and any(p.membership_only for p in profiles):
        raise ValueError("IWAM needs membership and non-membership; got a membership-only profile")


def iwam(ratings_row: Sequence[int], profiles: Sequence[IfsProfile], w: WeightVector) -> RespondentAggregate:
    _check_profiles(profiles)
    if len(ratings_row) != len(profiles) or len(w) != len(profiles):
        raise ValueError(f"row has {len(ratings_row)} ratings for {len(profiles)} items")
    mu = sum(wk * p.mu[r - 1] for wk, p, r in zip(w.weights, profiles, ratings_row))
    nu = sum(wk * p.nu[r - 1] for wk, p, r in zip(w.weights, profiles, ratings_row))
    return RespondentAggregate(float(mu), float(nu))


def _lookup(rows: np.ndarray, profiles: Sequence[IfsProfile], attr: str) -> np.ndarray:
    """n x K matrix of the profile attribute at each observed rating."""
    return np.column_stack([getattr(p, attr)[rows[:, k] - 1] for k, p in enumerate(profiles)])


def _as_rows(rows, k: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValueError("need a non-empty n x K matrix of complete rows")
    if rows.shape[1] != k:
        raise ValueError(f"rows have {rows.shape[1]} items, expected {k}")
    return rows


def composite(rows, profiles: Sequence[IfsProfile], w: WeightVector) -> CompositeResult:
    """Per-respondent IWAM pairs averaged uniformly over respondents."""
    _check_profiles(profiles)
    rows = _as_rows(rows, len(profiles))
    if len(w) != len(profiles):
        raise ValueError("weight vector length does not match the number of items")
    mu = _lookup(rows, profiles, "mu")
    nu = _lookup(rows, profiles, "nu")
    u = _lookup(rows, profiles, "u")
    r_mu = mu @ w.weights
    r_nu = nu @ w.weights
    mu_bar = float(r_mu.mean())
    nu_bar = float(r_nu.mean())
    item = np.column_stack([mu.mean(0), nu.mean(0), u.mean(0)])
    item = np.column_stack([item, item[:, 0] - item[:, 1], item[:, 0] + item[:, 1]])

    closed = None
    if all(p.system == CUB_FUZZY and p.pi1 is not None for p in profiles):
        closed = float(sum(
            wk * (1.0 - p.pi1) * _noncrisp_share(rows[:, k], p)
            for k, (wk, p) in enumerate(zip(w.weights, profiles))
        ))
    return CompositeResult(
        mu_bar=mu_bar,
        nu_bar=nu_bar,
        u_bar=1.0 - mu_bar - nu_bar,
        s_bar=mu_bar - nu_bar,
        a_bar=mu_bar + nu_bar,
        weights=w,
        respondent_mu=r_mu,
        respondent_nu=r_nu,
        item_means=item,
        u_bar_closed_form=closed,
    )


def _noncrisp_share(col: np.ndarray, p: IfsProfile) -> float:
    """F(ub - 1) - F(lb) on this column: share of ratings strictly between the crisp bounds."""
    n = col.size
    return float(np.count_nonzero(col <= p.scale.ub - 1) / n - np.count_nonzero(col <= p.scale.lb) / n)


def membership_aggregate(rows, profiles: Sequence[IfsProfile], w: WeightVector) -> tuple[np.ndarray, float]:
    """Weighted membership per respondent and its mean; works for membership-only systems."""
    _check_profiles(profiles, ifs=False)
    rows = _as_rows(rows, len(profiles))
    per = _lookup(rows, profiles, "mu") @ w.weights
    return per, float(per.mean())


def category_weighted_membership(profiles: Sequence[IfsProfile], w: WeightVector) -> np.ndarray:
    """Weighted membership of each category across items."""
    _check_profiles(profiles, ifs=False)
    return np.sum([wk * p.mu for wk, p in zip(w.weights, profiles)], axis=0)


def _triples_array(x) -> np.ndarray:
    if len(x) and isinstance(x[0], IfsTriple):
        x = [(t.mu, t.nu, t.u) for t in x]
    a = np.asarray(x, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError("expected a sequence of (mu, nu, u) triples")
    return a


def hamming_distance(b, c) -> float:
    """Normalized Hamming distance between two equal-length IFS collections."""
    b = _triples_array(b)
    c = _triples_array(c)
    if b.shape != c.shape:
        raise ValueError(f"length mismatch: {len(b)} vs {len(c)}")
    if len(b) == 0:
        raise ValueError("empty collections")
    return float(np.abs(b - c).sum() / (2 * len(b)))
