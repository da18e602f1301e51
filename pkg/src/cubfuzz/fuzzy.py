"""Per-category intuitionistic fuzzy profiles (membership, non-membership, hesitancy).

Three evaluation systems are provided:

* ``cub_fuzzy``: membership is a linear spline in the empirical distribution
  function, scaled by the fitted CUB feeling weight pi1; hesitancy is the
  constant 1 - pi1 on non-crisp categories.
* ``spline``: a fixed spline over the category scores, identical for every
  item on the same scale.
* ``empirical``: classical fuzzy set (membership only) built on the
  empirical distribution function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ratings import NEGATIVE, Edf, RatingScale

CUB_FUZZY = "cub_fuzzy"
SPLINE = "spline"
EMPIRICAL = "empirical"
SYSTEMS = (CUB_FUZZY, SPLINE, EMPIRICAL)


@dataclass(frozen=True)
class IfsTriple:
    mu: float
    nu: float
    u: float

    def __post_init__(self):
        for name in ("mu", "nu", "u"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if abs(self.mu + self.nu + self.u - 1.0) > 1e-9:
            raise ValueError(f"mu + nu + u = {self.mu + self.nu + self.u}, expected 1")

    @classmethod
    def from_mu_nu(cls, mu: float, nu: float) -> "IfsTriple":
        return cls(mu, nu, 1.0 - mu - nu)


def fuzzy_score(t: IfsTriple) -> float:
    return t.mu - t.nu


def fuzzy_accuracy(t: IfsTriple) -> float:
    return t.mu + t.nu


@dataclass(frozen=True)
class SplineConfig:
    """Spline shape: exponent ``epsilon``, hesitancy exponents ``theta``/``eta``,
    non-crisp range ``a..b`` (``b`` defaults to m - 1)."""

    epsilon: float = 1.0
    theta: float = 1.0
    eta: float = 1.0
    a: int = 1
    b: int | None = None

    def resolved_b(self, scale: RatingScale) -> int:
        return scale.m - 1 if self.b is None else self.b

    def validate(self, scale: RatingScale):
        b = self.resolved_b(scale)
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.theta < 1 or self.eta < 1:
            raise ValueError("theta and eta must be >= 1")
        if not 1 <= self.a < scale.ip < b <= scale.m:
            raise ValueError(f"need 1 <= a < ip < b <= m, got a={self.a} ip={scale.ip} b={b}")


@dataclass(frozen=True)
class IfsProfile:
    """Fuzzy values for categories 1..m of one item.

    ``nu`` and ``u`` are ``None`` for the membership-only empirical system.
    """

    mu: np.ndarray
    nu: np.ndarray | None
    u: np.ndarray | None
    system: str
    scale: RatingScale
    fit_ref: object = None
    degenerate: bool = False
    pi1: float | None = None

    def __post_init__(self):
        for name in ("mu", "nu", "u"):
            v = getattr(self, name)
            if v is not None:
                v = np.array(v, dtype=float)
                v.setflags(write=False)
                object.__setattr__(self, name, v)

    @property
    def m(self) -> int:
        return self.mu.size

    @property
    def membership_only(self) -> bool:
        return self.nu is None

    @property
    def score(self) -> np.ndarray | None:
        return None if self.membership_only else self.mu - self.nu

    @property
    def accuracy(self) -> np.ndarray | None:
        return None if self.membership_only else self.mu + self.nu

    def triple(self, r: int) -> IfsTriple:
        if self.membership_only:
            raise ValueError(f"{self.system} profile carries membership only")
        return IfsTriple(float(self.mu[r - 1]), float(self.nu[r - 1]), float(self.u[r - 1]))

    def triples(self) -> list[IfsTriple]:
        return [self.triple(r) for r in range(1, self.m + 1)]


def _require_positive(scale: RatingScale):
    if scale.orientation == NEGATIVE:
        raise ValueError("negatively oriented scale: reverse the sample first (normalize_orientation)")


def _ratio(num: float, den: float) -> float:
    # empty non-crisp side: no gradation, membership stays flat at pi/2
    return num / den if den > 0 else 0.0


def cub_fuzzy_profile(edf: Edf, pi1_hat: float, scale: RatingScale, fit_ref=None) -> IfsProfile:
    if not 0.0 <= pi1_hat <= 1.0:
        raise ValueError(f"pi1_hat={pi1_hat} outside [0, 1]")
    _require_positive(scale)
    m, ip, lb, ub = scale.m, scale.ip, scale.lb, scale.ub
    F = edf
    half = pi1_hat / 2.0
    mu = np.empty(m)
    nu = np.empty(m)
    u = np.empty(m)
    for r in range(1, m + 1):
        if r <= lb:
            mu[r - 1], nu[r - 1], u[r - 1] = 0.0, 1.0, 0.0
        elif r >= ub:
            mu[r - 1], nu[r - 1], u[r - 1] = 1.0, 0.0, 0.0
        else:
            if r <= ip:
                t = -_ratio(F(ip) - F(r), F(ip) - F(lb))
            else:
                t = _ratio(F(r) - F(ip), F(ub - 1) - F(ip))
            mu[r - 1] = half + half * t
            nu[r - 1] = half - half * t
            u[r - 1] = 1.0 - pi1_hat
    return IfsProfile(mu, nu, u, CUB_FUZZY, scale, fit_ref, pi1=float(pi1_hat))


def spline_membership(scale: RatingScale, cfg: SplineConfig) -> np.ndarray:
    """Raw spline membership before clamping (can dip below 0 at r = a)."""
    cfg.validate(scale)
    a, b, ip, eps = cfg.a, cfg.resolved_b(scale), scale.ip, cfg.epsilon
    mu = np.empty(scale.m)
    for r in range(1, scale.m + 1):
        if r < a:
            mu[r - 1] = 0.0
        elif r <= ip:
            mu[r - 1] = 0.5 - 0.5 * (2.0 * (ip - r) / (b - a)) ** eps
        elif r <= b:
            mu[r - 1] = 0.5 + 0.5 * (2.0 * (r - ip) / (b - a)) ** eps
        else:
            mu[r - 1] = 1.0
    return mu


def spline_profile(scale: RatingScale, cfg: SplineConfig | None = None) -> IfsProfile:
    cfg = cfg or SplineConfig()
    mu = np.clip(spline_membership(scale, cfg), 0.0, 1.0)
    u = mu**cfg.theta * (1.0 - mu) ** cfg.eta
    nu = 1.0 - mu - u
    return IfsProfile(mu, nu, u, SPLINE, scale)


def empirical_profile(edf: Edf, scale: RatingScale) -> IfsProfile:
    """Membership mu(r) = (F(r) - F(lb)) / (1 - F(lb)) on the non-crisp range.

    When every rating sits at or below ``lb`` the increments are undefined;
    the profile is then 0 below ``ub`` and 1 from ``ub`` on, flagged degenerate.
    """
    _require_positive(scale)
    m, lb, ub = scale.m, scale.lb, scale.ub
    F = edf
    rest = 1.0 - F(lb)
    mu = np.zeros(m)
    mu[ub - 1:] = 1.0
    if rest > 0:
        for r in range(lb + 1, ub):
            mu[r - 1] = (F(r) - F(lb)) / rest
    return IfsProfile(mu, None, None, EMPIRICAL, scale, degenerate=rest <= 0)
