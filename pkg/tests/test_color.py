import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tccbench.color import ErrorStats, Illuminant, angular_error, check_image, normalize, summarize
from tccbench.errors import EmptyInputError, InvalidIlluminantError, InvalidImageError

positive = st.floats(min_value=1e-3, max_value=1e3)
triples = st.tuples(positive, positive, positive)


def test_identical_vectors_have_zero_error():
    assert angular_error(Illuminant(1, 1, 1), Illuminant(1, 1, 1)) == 0.0


def test_orthogonal_axes():
    assert abs(angular_error((1, 0, 0), (0, 1, 0)) - 90.0) < 1e-9


def test_gray_vs_yellow():
    # atan2(|a x b|, a . b) with a x b = (-1, 1, 0), a . b = 2
    expected = math.degrees(math.atan2(math.sqrt(2.0), 2.0))
    assert expected == pytest.approx(35.264, abs=1e-3)
    assert angular_error((1, 1, 1), (1, 1, 0)) == pytest.approx(expected, abs=1e-9)


def test_scale_does_not_matter():
    assert angular_error((2, 2, 2), (1, 1, 1)) == pytest.approx(0.0, abs=1e-6)


def test_zero_vector_rejected():
    with pytest.raises(InvalidIlluminantError):
        angular_error((0, 0, 0), (1, 1, 1))
    with pytest.raises(InvalidIlluminantError):
        Illuminant(0, 0, 0)
    with pytest.raises(InvalidIlluminantError):
        Illuminant(-1, 1, 1)


@given(triples, triples)
def test_symmetry(a, b):
    assert angular_error(a, b) == angular_error(b, a)


@given(triples, triples, positive, positive)
def test_scale_invariance(a, b, s, t):
    scaled = angular_error(np.multiply(a, s), np.multiply(b, t))
    assert scaled == pytest.approx(angular_error(a, b), abs=1e-5)


@given(triples)
def test_self_error_is_zero(a):
    assert angular_error(a, a) == 0.0


@given(triples, triples)
def test_error_range(a, b):
    assert 0.0 <= angular_error(a, b) <= 180.0


def test_normalize():
    assert normalize(Illuminant(2, 0, 0)) == Illuminant(1.0, 0.0, 0.0)
    n = normalize(Illuminant(1, 1, 1)).as_array()
    np.testing.assert_allclose(n, [0.5774] * 3, atol=1e-4)
    with pytest.raises(InvalidIlluminantError):
        normalize(np.zeros(3))


def test_chromaticity_round_trip():
    ill = Illuminant(0.2, 0.5, 0.3)
    r, g = ill.chromaticity()
    assert angular_error(Illuminant.from_chromaticity(r, g), ill) < 1e-6


# (list, mean, median, trimean, best25, worst25, worst5); quartiles by linear interpolation
HAND_COMPUTED = [
    ([1, 2, 3, 4, 5], 3.0, 3.0, 3.0, 1.5, 4.5, 5.0),
    ([7], 7.0, 7.0, 7.0, 7.0, 7.0, 7.0),
    ([0, 0, 0, 10], 2.5, 0.0, 0.625, 0.0, 10.0, 10.0),
    ([1, 2], 1.5, 1.5, 1.5, 1.0, 2.0, 2.0),
    ([3, 1, 2], 2.0, 2.0, 2.0, 1.0, 3.0, 3.0),
    ([1, 2, 3, 4], 2.5, 2.5, 2.5, 1.0, 4.0, 4.0),
    ([10, 20, 30, 40, 50, 60, 70, 80, 90, 100], 55.0, 55.0, 55.0, 20.0, 90.0, 100.0),
    ([0.5, 1.5, 2.5, 9.0, 0.1, 3.3], 2.8166666666666664, 2.0, 1.9625, 0.3, 6.15, 9.0),
    ([2, 2, 2, 2, 8], 3.2, 2.0, 2.0, 2.0, 5.0, 8.0),
    ([1, 1, 2, 3, 5, 8, 13, 21], 6.75, 4.0, 4.75, 1.0, 17.0, 21.0),
]


@pytest.mark.parametrize("values,mean,median,trimean,best,worst,worst5", HAND_COMPUTED)
def test_summarize_hand_computed(values, mean, median, trimean, best, worst, worst5):
    s = summarize(values)
    got = (s.mean, s.median, s.trimean, s.best25_mean, s.worst25_mean, s.worst5_mean)
    assert got == pytest.approx((mean, median, trimean, best, worst, worst5), abs=1e-12)
    assert s.count == len(values)


def test_summarize_empty():
    with pytest.raises(EmptyInputError):
        summarize([])


@given(st.floats(min_value=0, max_value=180), st.integers(min_value=1, max_value=50))
def test_constant_list(x, n):
    s = summarize([x] * n)
    assert s.as_tuple() == pytest.approx((x,) * 6, rel=1e-12, abs=1e-12)


@given(st.lists(st.floats(min_value=0, max_value=180), min_size=1, max_size=200))
def test_order_invariant(errors):
    s = summarize(errors)
    slack = 1e-9 * (1.0 + max(errors))
    assert s.best25_mean <= s.mean + slack
    assert s.mean <= s.worst25_mean + slack
    assert s.worst25_mean <= s.worst5_mean + slack
    assert min(errors) - slack <= s.median <= max(errors) + slack
    assert min(errors) - slack <= s.trimean <= max(errors) + slack


def test_order_invariant_on_random_lists(rng):
    for _ in range(1000):
        e = rng.gamma(2.0, 2.0, size=rng.integers(1, 300))
        s = summarize(e)
        assert s.best25_mean <= s.mean <= s.worst25_mean <= s.worst5_mean


@given(st.lists(st.floats(min_value=0, max_value=50), min_size=1, max_size=40), st.floats(0, 100))
def test_trimean_of_symmetric_list_is_median(half, center):
    values = [center + d for d in half] + [center - d for d in half]
    s = summarize(values)
    assert s.trimean == pytest.approx(s.median, abs=1e-9)


def test_error_stats_fields_order():
    assert ErrorStats.FIELDS == ("mean", "median", "trimean", "best25_mean", "worst25_mean", "worst5_mean")


def test_check_image_rejects_bad_frames():
    with pytest.raises(InvalidImageError):
        check_image(np.zeros((4, 4)))
    with pytest.raises(InvalidImageError):
        check_image(np.full((4, 4, 3), 1.5))
    with pytest.raises(InvalidImageError):
        check_image(np.full((4, 4, 3), np.nan))


@given(triples)
def test_doubled_vector_is_exactly_parallel(a):
    assert angular_error(np.multiply(a, 2.0), a) == 0.0


def test_small_angles_keep_precision():
    # arccos of a cosine within one ulp of 1 cannot resolve angles below ~1e-6 deg
    eps = 1e-9
    want = math.degrees(math.atan(eps))
    assert angular_error((1.0, 0.0, 0.0), (1.0, eps, 0.0)) == pytest.approx(want, rel=1e-9)
