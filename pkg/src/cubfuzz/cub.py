"""CUB mixtures (shifted Binomial + Uniform), optionally with a shelter category.

Fitting is done by EM on the frequency table. Parameters are kept inside
``[CLAMP, 1 - CLAMP]`` during the iterations so that responsibilities stay
finite. Some ends are left open: pi (and pi_star) may reach 1, and the shelter
weight delta may reach 0, which keeps the baseline model nested. After EM a
final snap may also move xi onto 0 or 1 exactly. A fit that ends on any
bound is flagged ``boundary``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.stats import chi2

from .ratings import RatingSample

CLAMP = 1e-6
SE_STEP = 1e-4


@dataclass(frozen=True)
class CubParams:
    pi: float
    xi: float

    def __post_init__(self):
        if not (0.0 <= self.pi <= 1.0 and 0.0 <= self.xi <= 1.0):
            raise ValueError(f"need pi, xi in [0, 1], got pi={self.pi} xi={self.xi}")

    @property
    def pi1(self) -> float:
        return self.pi

    @property
    def n_free(self) -> int:
        return 2

    def as_dict(self) -> dict:
        return {"pi": self.pi, "xi": self.xi}


@dataclass(frozen=True)
class CubShelterParams:
    """CUB with shelter at category ``c``: delta*[r=c] + (1-delta)*CUB(pi_star, xi)."""

    pi_star: float
    xi: float
    delta: float
    c: int

    def __post_init__(self):
        if not (0.0 <= self.pi_star <= 1.0 and 0.0 <= self.xi <= 1.0 and 0.0 <= self.delta <= 1.0):
            raise ValueError(
                f"need pi_star, xi, delta in [0, 1], got {self.pi_star}, {self.xi}, {self.delta}"
            )

    @property
    def pi1(self) -> float:
        return self.pi_star * (1.0 - self.delta)

    @property
    def pi2(self) -> float:
        return (1.0 - self.pi_star) * (1.0 - self.delta)

    @property
    def n_free(self) -> int:
        return 3

    @classmethod
    def from_weights(cls, pi1: float, pi2: float, xi: float, c: int) -> "CubShelterParams":
        """Build from the (pi1, pi2, xi) form, where delta = 1 - pi1 - pi2."""
        delta = 1.0 - pi1 - pi2
        return cls(pi1 / (pi1 + pi2), xi, delta, c)

    def as_dict(self) -> dict:
        return {
            "pi_star": self.pi_star,
            "xi": self.xi,
            "delta": self.delta,
            "c": self.c,
            "pi1": self.pi1,
            "pi2": self.pi2,
        }


Params = Union[CubParams, CubShelterParams]


@dataclass
class FitOptions:
    max_iter: int = 1000
    tol: float = 1e-8
    allow_boundary: bool = False
    # optional starting values: (pi, xi) or (pi_star, xi, delta)
    init: tuple | None = None


@dataclass(frozen=True)
class CubFit:
    params: Params
    loglik: float
    n_iter: int
    n: int
    m: int
    converged: bool
    boundary: bool = False
    std_errors: dict = field(default_factory=dict)
    trace: tuple = ()

    @property
    def k(self) -> int:
        return self.params.n_free

    @property
    def bic(self) -> float:
        return -2.0 * self.loglik + self.k * math.log(self.n)

    @property
    def shelter(self) -> bool:
        return isinstance(self.params, CubShelterParams)


def _check_r(m: int, r: int):
    if not 1 <= r <= m:
        raise ValueError(f"category {r} outside 1..{m}")


def shifted_binomial_vector(m: int, xi: float) -> np.ndarray:
    """b_r(xi) = C(m-1, r-1) xi^(m-r) (1-xi)^(r-1) for r = 1..m (0**0 = 1)."""
    r = np.arange(1, m + 1)
    coef = np.array([math.comb(m - 1, k) for k in range(m)], dtype=float)
    return coef * np.power(float(xi), m - r) * np.power(1.0 - xi, r - 1)


def shifted_binomial(m: int, xi: float, r: int) -> float:
    _check_r(m, r)
    return math.comb(m - 1, r - 1) * float(xi) ** (m - r) * (1.0 - xi) ** (r - 1)


def pmf_vector(params: Params, m: int) -> np.ndarray:
    """Probabilities of categories 1..m under a CUB or CUB-shelter law."""
    b = shifted_binomial_vector(m, params.xi)
    if isinstance(params, CubParams):
        return params.pi * b + (1.0 - params.pi) / m
    if not 1 <= params.c <= m:
        raise ValueError(f"shelter category {params.c} outside 1..{m}")
    p = (1.0 - params.delta) * (params.pi_star * b + (1.0 - params.pi_star) / m)
    p[params.c - 1] += params.delta
    return p


def shelter_pmf_weights(pi1: float, pi2: float, xi: float, c: int, m: int) -> np.ndarray:
    """Shelter pmf in the pi1*b_r + pi2/m + (1-pi1-pi2)*[r=c] parameterization."""
    p = pi1 * shifted_binomial_vector(m, xi) + pi2 / m
    p[c - 1] += 1.0 - pi1 - pi2
    return p


def cub_pmf(params: CubParams, m: int, r: int) -> float:
    _check_r(m, r)
    return params.pi * shifted_binomial(m, params.xi, r) + (1.0 - params.pi) / m


def cub_shelter_pmf(params: CubShelterParams, m: int, r: int) -> float:
    _check_r(m, r)
    _check_r(m, params.c)
    p = (1.0 - params.delta) * cub_pmf(CubParams(params.pi_star, params.xi), m, r)
    return p + (params.delta if r == params.c else 0.0)


def _loglik_freq(freq: np.ndarray, p: np.ndarray) -> float:
    seen = freq > 0
    if np.any(p[seen] <= 0.0):
        r = int(np.flatnonzero(seen & (p <= 0.0))[0]) + 1
        raise ValueError(f"observed category {r} has zero probability")
    return float(np.dot(freq[seen], np.log(p[seen])))


def loglik(sample: RatingSample, params: Params, m: int | None = None) -> float:
    m = sample.m if m is None else m
    return _loglik_freq(sample.freq, pmf_vector(params, m))


def _moment_xi(freq: np.ndarray, m: int) -> float:
    rbar = np.dot(freq, np.arange(1, m + 1)) / freq.sum()
    return float(np.clip((m - rbar) / (m - 1), 0.05, 0.95))


def _clip(x: float, lo: float = CLAMP, hi: float = 1.0 - CLAMP) -> float:
    return float(min(max(x, lo), hi))


def _converged(old: float, new: float, tol: float) -> bool:
    return abs(new - old) / (1.0 + abs(new)) < tol


def _snap(theta: list, ll_of, ll: float, bounds: list) -> tuple[list, float]:
    """Move parameters lying near a clamp onto it when that does not lower the likelihood.

    EM creeps sublinearly towards a boundary maximum (e.g. pi -> 0 for
    uniform data), so the iterate is usually still visibly off the clamp
    when the stopping rule fires.
    """
    theta = list(theta)
    for i, (lo, hi) in enumerate(bounds):
        for target in (lo, hi):
            if abs(theta[i] - target) < 0.05 and theta[i] != target:
                cand = theta.copy()
                cand[i] = target
                try:
                    ll_c = ll_of(cand)
                except ValueError:
                    continue
                if ll_c >= ll:
                    theta, ll = cand, ll_c
    return theta, ll


def _degenerate(sample: RatingSample, opts: FitOptions):
    if sample.n < 2:
        raise ValueError("need at least 2 ratings to fit")
    single = np.count_nonzero(sample.freq) == 1
    if single and not opts.allow_boundary:
        raise ValueError("all ratings identical; pass allow_boundary=True to fit anyway")
    return single


# lattice over (pi, xi) including the edges; its best node seeds a second EM
# run, since small or multimodal samples can trap EM in a local maximum
# (narrow ridges near xi = 0 or 1 need the fine spacing)
START_GRID = np.linspace(0.0, 1.0, 101)


def _grid_start(freq: np.ndarray, m: int) -> tuple[float, float]:
    b = np.stack([shifted_binomial_vector(m, x) for x in START_GRID])      # xi x r
    p = START_GRID[:, None, None] * b[None] + (1.0 - START_GRID[:, None, None]) / m
    with np.errstate(divide="ignore"):
        ll = np.where(freq > 0, np.log(p), 0.0) @ freq
    i, j = np.unravel_index(np.argmax(ll), ll.shape)
    # EM iterates inside the clamps; the final snap can still reach an edge
    return _clip(START_GRID[i], CLAMP, 1.0), _clip(START_GRID[j])


def fit_cub(sample: RatingSample, m: int | None = None, opts: FitOptions | None = None) -> CubFit:
    """Maximum-likelihood CUB(pi, xi) fit by EM.

    E-step: tau_r = pi b_r / P(r); M-step: pi = mean(tau),
    xi = (m - Rbar_tau) / (m - 1) with Rbar_tau the tau-weighted mean rating.
    Without ``opts.init`` EM runs from the moment start and from the best
    cell of ``START_GRID``; the higher likelihood wins, the moment start on ties.
    """
    opts = opts or FitOptions()
    m = sample.m if m is None else m
    _degenerate(sample, opts)
    if opts.init is not None:
        starts = [tuple(float(v) for v in opts.init)]
    else:
        starts = [(0.5, _moment_xi(sample.freq, m)), _grid_start(sample.freq, m)]
    best = None
    for st in starts:
        f = _cub_em(sample, m, st, opts)
        if best is None or f.loglik > best.loglik + 1e-12:
            best = f
    return _with_std_errors(best, sample)


def _cub_em(sample: RatingSample, m: int, start: tuple, opts: FitOptions) -> CubFit:
    freq = sample.freq.astype(float)
    n = freq.sum()
    cats = np.arange(1, m + 1)
    pi, xi = start

    ll = loglik(sample, CubParams(pi, xi), m)
    trace = [ll]
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        fb = pi * shifted_binomial_vector(m, xi)
        tau = fb / (fb + (1.0 - pi) / m)
        wt = freq * tau
        sw = wt.sum()
        # pi = 1 is admissible (pure binomial); only the lower end needs a clamp
        pi = _clip(sw / n, CLAMP, 1.0)
        if sw > 0:
            xi = _clip((m - np.dot(wt, cats) / sw) / (m - 1))
        new = _loglik_freq(sample.freq, pi * shifted_binomial_vector(m, xi) + (1.0 - pi) / m)
        trace.append(new)
        done = _converged(ll, new, opts.tol)
        ll = new
        if done:
            converged = True
            break

    def ll_of(t):
        return loglik(sample, CubParams(t[0], t[1]), m)

    (pi, xi), ll = _snap([pi, xi], ll_of, ll, [(CLAMP, 1.0), (0.0, 1.0)])
    boundary = _on_clamp([pi, xi])
    return CubFit(CubParams(pi, xi), ll, it, int(n), m, converged, boundary, {}, tuple(trace))


def fit_cub_shelter(
    sample: RatingSample,
    m: int | None = None,
    c: int | str = "auto",
    opts: FitOptions | None = None,
    base: CubFit | None = None,
) -> CubFit:
    """ML fit of CUB with shelter at ``c``; ``c="auto"`` picks the best BIC over 1..m.

    Unless ``opts.init`` is given, EM is run from two starts, the moment-based
    one and the nested baseline solution (delta = 0), and the better fit is
    kept. The second start guarantees the shelter likelihood never falls
    below the baseline one, which the LR test relies on.
    """
    opts = opts or FitOptions()
    m = sample.m if m is None else m
    if m < 5:
        raise ValueError("shelter model requires m >= 5")
    single = _degenerate(sample, opts)
    if c == "auto":
        if base is None and opts.init is None and not single:
            base = fit_cub(sample, m, opts)
        best = None
        for cc in range(1, m + 1):
            f = fit_cub_shelter(sample, m, cc, opts, base)
            # strict comparison keeps the smaller c on ties
            if best is None or f.bic < best.bic:
                best = f
        return best
    c = int(c)
    if not 1 <= c <= m:
        raise ValueError(f"shelter category {c} outside 1..{m}")

    freq = sample.freq
    n = int(freq.sum())
    if single and freq[c - 1] == n:
        # every rating sits on the shelter: the likelihood is maximized by delta -> 1
        params = CubShelterParams(0.5, _clip((m - c) / (m - 1)), 1.0 - CLAMP, c)
        ll = loglik(sample, params, m)
        return CubFit(params, ll, 0, n, m, True, True, {}, (ll,))

    if opts.init is not None:
        starts = [tuple(float(v) for v in opts.init)]
    else:
        starts = [(0.5, _moment_xi(freq, m), 0.1)]
        if not single:
            base = base or fit_cub(sample, m, opts)
            starts.append((base.params.pi, base.params.xi, 0.0))
    fits = [_shelter_em(sample, m, c, st, opts) for st in starts]
    fit = max(fits, key=lambda f: f.loglik)
    return _with_std_errors(fit, sample)


def _shelter_em(sample: RatingSample, m: int, c: int, start: tuple, opts: FitOptions) -> CubFit:
    freq = sample.freq.astype(float)
    n = freq.sum()
    cats = np.arange(1, m + 1)
    pstar, xi, delta = start
    onehot = np.zeros(m)
    onehot[c - 1] = 1.0

    def dens(pstar, xi, delta):
        pi1 = pstar * (1.0 - delta)
        pi2 = (1.0 - pstar) * (1.0 - delta)
        return pi1 * shifted_binomial_vector(m, xi), np.full(m, pi2 / m), delta * onehot

    ll = _loglik_freq(sample.freq, sum(dens(pstar, xi, delta)))
    trace = [ll]
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        d1, d2, d3 = dens(pstar, xi, delta)
        tot = d1 + d2 + d3
        w1 = np.dot(freq, d1 / tot)
        w2 = np.dot(freq, d2 / tot)
        w3 = np.dot(freq, d3 / tot)
        # the mixing-weight Q function separates into (pi_star) and (delta) parts,
        # so clamping each coordinate is the exact constrained M-step.
        # delta may reach 0: the degenerate component then just gets no mass.
        delta = _clip(w3 / n, 0.0, 1.0 - CLAMP)
        pstar = _clip(w1 / (w1 + w2), CLAMP, 1.0) if w1 + w2 > 0 else pstar
        if w1 > 0:
            xi = _clip((m - np.dot(freq * d1 / tot, cats) / w1) / (m - 1))
        new = _loglik_freq(sample.freq, sum(dens(pstar, xi, delta)))
        trace.append(new)
        done = _converged(ll, new, opts.tol)
        ll = new
        if done:
            converged = True
            break

    def ll_of(t):
        return loglik(sample, CubShelterParams(t[0], t[1], t[2], c), m)

    (pstar, xi, delta), ll = _snap(
        [pstar, xi, delta], ll_of, ll,
        [(CLAMP, 1.0), (0.0, 1.0), (0.0, 1.0 - CLAMP)],
    )
    params = CubShelterParams(pstar, xi, delta, c)
    boundary = _on_clamp([pstar, xi, delta])
    return CubFit(params, ll, it, int(n), m, converged, boundary, {}, tuple(trace))


def _on_clamp(theta) -> bool:
    return any(t <= 10 * CLAMP or t >= 1.0 - 10 * CLAMP for t in theta)


def _with_std_errors(fit: CubFit, sample: RatingSample) -> CubFit:
    if fit.boundary:
        return fit
    try:
        se = std_errors(fit, sample)
    except ValueError:
        return CubFit(fit.params, fit.loglik, fit.n_iter, fit.n, fit.m, fit.converged,
                      True, {}, fit.trace)
    return CubFit(fit.params, fit.loglik, fit.n_iter, fit.n, fit.m, fit.converged,
                  fit.boundary, se, fit.trace)


def _free(params: Params) -> tuple[list, list]:
    if isinstance(params, CubParams):
        return [params.pi, params.xi], ["pi", "xi"]
    return [params.pi_star, params.xi, params.delta], ["pi_star", "xi", "delta"]


def _rebuild(params: Params, theta) -> Params:
    if isinstance(params, CubParams):
        return CubParams(*theta)
    return CubShelterParams(theta[0], theta[1], theta[2], params.c)


def observed_information(fit: CubFit, sample: RatingSample, h: float = SE_STEP) -> np.ndarray:
    """Negative Hessian of the log-likelihood by central finite differences."""
    theta, _ = _free(fit.params)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta - 2 * h <= 0.0) or np.any(theta + 2 * h >= 1.0):
        raise ValueError("estimate on or near the parameter boundary; information undefined")

    def f(t):
        return loglik(sample, _rebuild(fit.params, t), fit.m)

    k = theta.size
    hess = np.empty((k, k))
    f0 = f(theta)
    eye = np.eye(k) * h
    for i in range(k):
        hess[i, i] = (f(theta + eye[i]) - 2.0 * f0 + f(theta - eye[i])) / h**2
        for j in range(i + 1, k):
            v = (f(theta + eye[i] + eye[j]) - f(theta + eye[i] - eye[j])
                 - f(theta - eye[i] + eye[j]) + f(theta - eye[i] - eye[j])) / (4 * h**2)
            hess[i, j] = hess[j, i] = v
    return -hess


def std_errors(fit: CubFit, sample: RatingSample) -> dict:
    """Asymptotic standard errors from the inverse observed information.

    For shelter fits, errors for pi1 and pi2 follow by the delta method.
    """
    info = observed_information(fit, sample)
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        raise ValueError("observed information not positive definite (boundary or ill-conditioned fit)")
    cov = np.linalg.inv(info)
    _, names = _free(fit.params)
    se = {name: float(math.sqrt(cov[i, i])) for i, name in enumerate(names)}
    if isinstance(fit.params, CubShelterParams):
        ps, d = fit.params.pi_star, fit.params.delta
        for name, grad in (("pi1", [1 - d, 0.0, -ps]), ("pi2", [-(1 - d), 0.0, -(1 - ps)])):
            g = np.asarray(grad)
            se[name] = float(math.sqrt(g @ cov @ g))
    return se


def lr_test(fit_base: CubFit, fit_shelter: CubFit, n: int | None = None) -> tuple[float, float]:
    """Likelihood-ratio test of the shelter term against a chi-square(1) reference.

    delta = 0 lies on the boundary, so the nominal reference is conservative.
    """
    if n is not None and (fit_base.n != n or fit_shelter.n != n):
        raise ValueError("fits were computed on samples of different size")
    stat = 2.0 * (fit_shelter.loglik - fit_base.loglik)
    if stat < -1e-6:
        raise ValueError(f"negative LR statistic {stat:.3g}: shelter fit did not reach the base likelihood")
    stat = max(stat, 0.0)
    return stat, float(chi2.sf(stat, 1))


@dataclass(frozen=True)
class ModelChoice:
    base: CubFit
    shelter: CubFit | None
    statistic: float | None
    p_value: float | None
    retained: bool
    # number of shelter categories searched; p_value is Bonferroni-adjusted by it
    n_candidates: int = 1

    @property
    def chosen(self) -> CubFit:
        return self.shelter if self.retained else self.base

    @property
    def pi1(self) -> float:
        return self.chosen.params.pi1


def select_model(
    sample: RatingSample,
    m: int | None = None,
    shelter: int | str | None = None,
    alpha: float = 0.05,
    opts: FitOptions | None = None,
) -> ModelChoice:
    """Baseline fit, plus a shelter fit kept only when the LR test rejects at ``alpha``.

    With ``shelter="auto"`` the category is picked from the data among m
    candidates, so the chi-square(1) p-value is multiplied by m (Bonferroni)
    before comparing with ``alpha``.
    """
    m = sample.m if m is None else m
    base = fit_cub(sample, m, opts)
    if shelter in (None, "none"):
        return ModelChoice(base, None, None, None, False)
    sh = fit_cub_shelter(sample, m, shelter, opts, base)
    stat, p = lr_test(base, sh, sample.n)
    k = m if shelter == "auto" else 1
    p = min(1.0, k * p)
    return ModelChoice(base, sh, stat, p, p < alpha, k)


def simulate(params: Params, m: int, n: int, seed: int | np.random.Generator | None = None) -> RatingSample:
    """Draw ``n`` ratings by inverse-CDF over the model pmf."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(pmf_vector(params, m))
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return RatingSample(np.minimum(idx, m - 1) + 1, m)
