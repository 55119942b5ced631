import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA
from rodcasimir.special_functions import bessel_k, bessel_k012_scaled, bessel_k_scaled


@pytest.fixture(scope="module")
def oracle():
    return np.load(DATA / "bessel_k_oracle.npz")


@pytest.mark.parametrize("order", [0, 1, 2])
def test_matches_high_precision_oracle(oracle, order):
    x = oracle["x"]
    ref = oracle[f"k{order}"]
    got = bessel_k(order, x)
    assert np.max(np.abs(got / ref - 1.0)) <= 1e-12


def test_k0_at_one():
    # K0(1) to 30 digits
    assert bessel_k(0, 1.0) == pytest.approx(0.421024438240708333335627379212609, rel=1e-15)


def test_k2_recurrence_at_one():
    lhs = bessel_k(2, 1.0)
    rhs = bessel_k(0, 1.0) + 2.0 * bessel_k(1, 1.0)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_recurrence_over_range():
    x = np.logspace(-6, 2, 4001)
    k0, k1, k2 = (bessel_k(i, x) for i in range(3))
    assert np.max(np.abs(k2 - k0 - 2.0 * k1 / x) / k2) <= 1e-11


def test_large_argument_asymptote():
    x = 50.0
    lead = np.sqrt(np.pi / (2 * x)) * np.exp(-x)
    assert abs(bessel_k(0, x) / lead - 1.0) < 0.01


def test_small_argument_limit():
    x = 1e-6
    assert x * bessel_k(1, x) == pytest.approx(1.0, rel=1e-5)


def test_underflow_is_zero_not_error():
    assert bessel_k(0, 800.0) == 0.0
    assert np.all(bessel_k(2, np.array([750.0, 1e4])) == 0.0)


@pytest.mark.parametrize("x", [0.0, -1.0, np.nan])
def test_domain_error(x):
    with pytest.raises(ValueError):
        bessel_k(0, x)


@pytest.mark.parametrize("order", [-1, 3, 1.5])
def test_unsupported_order(order):
    with pytest.raises(ValueError):
        bessel_k(order, 1.0)


def test_scaled_variants_agree():
    x = np.logspace(-4, 2.5, 200)
    k0e, k1e, k2e = bessel_k012_scaled(x)
    for order, ke in enumerate((k0e, k1e, k2e)):
        np.testing.assert_allclose(bessel_k_scaled(order, x), ke, rtol=0, atol=0)
        np.testing.assert_allclose(ke * np.exp(-x), bessel_k(order, x), rtol=1e-14)


def test_scalar_in_scalar_out():
    assert isinstance(bessel_k(1, 2.0), float)


def test_elementwise_determinism():
    # a value must not depend on which other arguments share the array
    x = np.array([0.3, 1.9, 2.1, 40.0])
    together = bessel_k(1, x)
    alone = np.array([bessel_k(1, v) for v in x])
    assert np.array_equal(together, alone)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-7, 600.0), st.floats(1e-9, 0.5))
def test_monotone_decreasing(x1, frac):
    x2 = x1 * (1.0 + frac)
    for order in (0, 1, 2):
        assert bessel_k(order, x2) < bessel_k(order, x1)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-8, 700.0))
def test_positive(x):
    for order in (0, 1, 2):
        assert bessel_k(order, x) > 0
