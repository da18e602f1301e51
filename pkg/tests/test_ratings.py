import numpy as np
import pytest

from cubfuzz.ratings import (
    NEGATIVE, RatingSample, RatingScale, build_sample, edf, normalize_orientation, reverse_sample,
)

from conftest import WORKED_F, WORKED_FREQ


def test_scale_defaults():
    s = RatingScale(7)
    assert (s.ip, s.lb, s.ub) == (4, 1, 7)
    assert list(s.categories) == [1, 2, 3, 4, 5, 6, 7]


@pytest.mark.parametrize("kw", [dict(m=4), dict(m=6), dict(m=7, lb=4), dict(m=7, ip=7), dict(m=7, orientation="up")])
def test_scale_rejects(kw):
    with pytest.raises(ValueError):
        RatingScale(**kw)


def test_even_scale_with_ip():
    s = RatingScale(10, ip=5)
    assert s.ub == 10


def test_negative_scale_reflects_bounds():
    s = RatingScale(9, ip=4, lb=2, ub=8, orientation=NEGATIVE).with_positive_orientation()
    assert (s.ip, s.lb, s.ub, s.orientation) == (6, 2, 8, "positive")


def test_worked_edf(worked_sample):
    F = edf(worked_sample)
    assert worked_sample.n == 20
    np.testing.assert_allclose(F.values, WORKED_F, atol=1e-15)
    assert F(0) == 0.0 and F(7) == 1.0


def test_from_freq_roundtrip():
    s = RatingSample.from_freq(WORKED_FREQ)
    assert tuple(s.freq) == WORKED_FREQ


def test_freq_read_only(worked_sample):
    with pytest.raises(ValueError):
        worked_sample.freq[0] = 3


def test_build_sample_errors():
    with pytest.raises(ValueError, match="empty"):
        build_sample([], 7)
    with pytest.raises(ValueError, match="index 2 outside 1..7"):
        build_sample([1, 2, 9], 7)
    with pytest.raises(ValueError, match="integers"):
        build_sample([1.5, 2.0], 7)


def test_reverse_is_involution(worked_sample):
    r = reverse_sample(worked_sample)
    assert tuple(r.freq) == tuple(reversed(WORKED_FREQ))
    np.testing.assert_array_equal(reverse_sample(r).ratings, worked_sample.ratings)


def test_normalize_orientation(worked_sample):
    pos = RatingScale(7)
    assert normalize_orientation(worked_sample, pos) == (worked_sample, pos)
    s, sc = normalize_orientation(worked_sample, RatingScale(7, orientation=NEGATIVE))
    assert sc.orientation == "positive"
    assert tuple(s.freq) == tuple(reversed(WORKED_FREQ))
