"""Ordinal rating scales, samples and the empirical distribution function."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

POSITIVE = "positive"
NEGATIVE = "negative"


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RatingScale:
    """An ordinal scale 1..m.

    ``ip`` is the indifference point and ``lb``/``ub`` are the crisp bounds:
    categories ``<= lb`` are certainly negative, categories ``>= ub`` are
    certainly positive. ``ip`` defaults to the middle category, which only
    exists for odd ``m``.
    """

    m: int
    ip: int | None = None
    lb: int = 1
    ub: int | None = None
    orientation: str = POSITIVE

    def __post_init__(self):
        m = self.m
        if int(m) != m or m < 5:
            raise ValueError(f"scale length must be an integer >= 5, got {m}")
        if self.ip is None:
            if m % 2 == 0:
                raise ValueError(f"even scale (m={m}) requires an explicit indifference point")
            object.__setattr__(self, "ip", (m + 1) // 2)
        if self.ub is None:
            object.__setattr__(self, "ub", m)
        if not 1 <= self.lb < self.ip < self.ub <= m:
            raise ValueError(
                f"need 1 <= lb < ip < ub <= m, got lb={self.lb} ip={self.ip} ub={self.ub} m={m}"
            )
        if self.orientation not in (POSITIVE, NEGATIVE):
            raise ValueError(f"orientation must be {POSITIVE!r} or {NEGATIVE!r}")

    @property
    def categories(self) -> np.ndarray:
        return np.arange(1, self.m + 1)

    def with_positive_orientation(self) -> "RatingScale":
        """Scale after reflecting r -> m - r + 1; crisp bounds are reflected too."""
        if self.orientation == POSITIVE:
            return self
        m = self.m
        return RatingScale(m, ip=m - self.ip + 1, lb=m - self.ub + 1, ub=m - self.lb + 1)


@dataclass(frozen=True)
class RatingSample:
    """Complete integer ratings for one item on a scale of length ``m``.

    ``freq[r - 1]`` holds the count of category ``r``.
    """

    ratings: np.ndarray
    m: int
    freq: np.ndarray = field(init=False)

    def __post_init__(self):
        r = _frozen(np.asarray(self.ratings, dtype=np.int64))
        object.__setattr__(self, "ratings", r)
        object.__setattr__(self, "freq", _frozen(np.bincount(r - 1, minlength=self.m)))

    @property
    def n(self) -> int:
        return int(self.ratings.size)

    @classmethod
    def from_freq(cls, freq: Sequence[int]) -> "RatingSample":
        """Sample with the given category counts, ratings sorted ascending."""
        freq = np.asarray(freq, dtype=np.int64)
        if freq.sum() < 1 or np.any(freq < 0):
            raise ValueError("frequencies must be non-negative with a positive total")
        return cls(np.repeat(np.arange(1, freq.size + 1), freq), freq.size)


@dataclass(frozen=True)
class Edf:
    """Cumulative relative frequencies F(1), ..., F(m)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))

    def __call__(self, r: int) -> float:
        """F(r) with the convention F(0) = 0."""
        return 0.0 if r <= 0 else float(self.values[r - 1])

    @property
    def m(self) -> int:
        return self.values.size


def build_sample(ratings: Sequence[int], scale: RatingScale | int) -> RatingSample:
    m = scale if isinstance(scale, (int, np.integer)) else scale.m
    if len(ratings) == 0:
        raise ValueError("empty sample")
    arr = np.asarray(ratings)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("ratings must be integers")
    bad = np.flatnonzero((arr < 1) | (arr > m))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"rating {arr[i]} at index {i} outside 1..{m}")
    return RatingSample(arr, int(m))


def edf(sample: RatingSample) -> Edf:
    # F(m) is pinned to 1 so round-off in the cumulative sum cannot break it
    values = np.cumsum(sample.freq) / sample.n
    values[-1] = 1.0
    return Edf(values)


def reverse_sample(sample: RatingSample, scale: RatingScale | None = None) -> RatingSample:
    """Reflect every rating r to m - r + 1."""
    m = sample.m if scale is None else scale.m
    return RatingSample(m + 1 - sample.ratings, m)


def normalize_orientation(sample: RatingSample, scale: RatingScale) -> tuple[RatingSample, RatingScale]:
    """Return a positively oriented (sample, scale) pair."""
    if scale.orientation == POSITIVE:
        return sample, scale
    return reverse_sample(sample, scale), scale.with_positive_orientation()
