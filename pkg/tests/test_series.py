import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from juliats.errors import IncompatibleIndex
from juliats.series import TruncatedSeries, convolve, reciprocal_coeffs

coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def test_product_of_binomials():
    a = TruncatedSeries([1, 1, 0, 0], 0)
    b = TruncatedSeries([1, -1, 0, 0], 0)
    assert np.allclose((a * b).coeffs, [1, 0, -1, 0])


def test_reciprocal_of_laurent_series():
    # 2z/(1-z) = 2z + 2z^2 + ...; its reciprocal is (1-z)/(2z)
    K = 12
    s = TruncatedSeries(2 * np.ones(K), 1)
    r = s.reciprocal()
    assert r.lowest_index == -1
    assert np.allclose(r.coeffs[:2], [0.5, -0.5])
    assert np.allclose(r.coeffs[2:], 0)
    prod = s * r
    assert prod.lowest_index == 0
    assert np.allclose(prod.coeffs, np.eye(1, len(prod.coeffs))[0])


def test_derivative_of_cube():
    d = TruncatedSeries.monomial(3, 6).derivative()
    assert np.allclose(d.taylor(), [0, 0, 3, 0, 0, 0])


def test_coeff_count_matches_order():
    s = TruncatedSeries(np.arange(7), -2)
    assert len(s.coeffs) == s.order - s.lowest_index + 1
    assert s.order == 4
    with pytest.raises(IndexError):
        s.coeff(5)


def test_fft_and_direct_convolution_agree():
    rng = np.random.default_rng(1)
    a = rng.normal(size=300) + 1j * rng.normal(size=300)
    b = rng.normal(size=200) + 1j * rng.normal(size=200)
    assert np.allclose(convolve(a, b, 400, "fft"), convolve(a, b, 400, "direct"), atol=1e-10)
    assert np.allclose(convolve(a, b, 400, "direct"), np.convolve(a, b)[:400])


def test_reciprocal_needs_nonzero_lead():
    with pytest.raises(IncompatibleIndex):
        reciprocal_coeffs([0, 1], 4)


def test_compose_geometric_series():
    # 1/(1-h) with h = z + z^2 gives Fibonacci numbers
    f = TruncatedSeries(np.ones(10), 0)
    h = TruncatedSeries([0, 1, 1] + [0] * 7, 0)
    fib = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]
    assert np.allclose(f.compose(h).coeffs, fib)


def test_compose_needs_vanishing_inner():
    f = TruncatedSeries([1, 1], 0)
    with pytest.raises(IncompatibleIndex):
        f.compose(TruncatedSeries([1, 1], 0))


def test_json_round_trip():
    s = TruncatedSeries([1 + 2j, -0.5, 3j], -1)
    t = TruncatedSeries.from_json(s.to_json(tag="x"))
    assert t.lowest_index == -1
    assert np.array_equal(s.coeffs, t.coeffs)


@settings(max_examples=40, deadline=None)
@given(st.lists(coeff, min_size=2, max_size=24), st.lists(coeff, min_size=2, max_size=24))
def test_product_truncation_matches_full_product(a, b):
    n = min(len(a), len(b))
    sa, sb = TruncatedSeries(a[:n], 0), TruncatedSeries(b[:n], 0)
    full = np.convolve(np.array(a[:n]), np.array(b[:n]))[:n]
    assert np.allclose((sa * sb).coeffs, full, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=30).filter(lambda c: abs(c[0]) > 0.5))
def test_reciprocal_times_series_is_one(c):
    r = reciprocal_coeffs(c, len(c))
    prod = np.convolve(np.array(c, dtype=complex), r)[: len(c)]
    scale = max(1.0, float(np.max(np.abs(r))) * float(np.max(np.abs(c))))
    assert np.allclose(prod, np.eye(1, len(c))[0], atol=1e-9 * scale)


@settings(max_examples=30, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=16), st.complex_numbers(max_magnitude=0.9, allow_nan=False))
def test_evaluation_is_horner(c, z):
    s = TruncatedSeries(c, 0)
    direct = sum(ck * z**k for k, ck in enumerate(c))
    assert abs(s(z) - direct) <= 1e-9 * (1 + sum(abs(x) for x in c))
