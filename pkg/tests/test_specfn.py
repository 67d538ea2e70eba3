import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from rmtwalks.errors import NoClosedFormError, NumericError, ValidationError
from rmtwalks.specfn import (MomentSpec, catalan, inverse_subordinator_moment, limit_moment_closed,
                             mittag_leffler_3p, reference_cdf, reference_pdf, tc_semicircle_mgf,
                             wright)

# high-precision values from an independent arbitrary-precision series (mpmath, 40 digits)
ML_07_MINUS1 = 0.3996119781155993843658938828086701569334
ML_08_MINUS1 = 0.3869485786189768514649211835410096506289
WRIGHT_07_03_2 = 5.977413483263834878068452136231725654545
BESSEL_I0_2 = 2.279585302336067267437204440811533353286


@pytest.mark.parametrize("m, expected", [(1, 1), (2, 2), (3, 5), (10, 16796), (30, 3814986502092304)])
def test_catalan_values(m, expected):
    assert catalan(m) == expected


@pytest.mark.parametrize("m", [0, 31, 2.5])
def test_catalan_range(m):
    with pytest.raises(ValidationError):
        catalan(m)


@pytest.mark.parametrize("m", range(2, 13))
def test_catalan_recursion(m):
    assert catalan(m) == sum((catalan(k - 1) if k > 1 else 1) * (catalan(m - k) if m > k else 1)
                             for k in range(1, m + 1))


def test_limit_moment_examples():
    assert limit_moment_closed("Wigner", 4, 1, 1) == 2
    assert limit_moment_closed("SymmetricCirculant", 3, 5, 1) == 0
    assert limit_moment_closed("Wigner", 2, 1, 0.5) == pytest.approx(1.1283791670955126, rel=1e-14)
    assert limit_moment_closed("ReverseCirculant", 4, 1, 1) == 2
    assert limit_moment_closed("SymmetricCirculant", 4, 2, 1) == 12
    assert limit_moment_closed("Wigner", MomentSpec(6, 1.0, 1.0)) == 5


def test_limit_moment_unsupported():
    with pytest.raises(NoClosedFormError):
        limit_moment_closed("ReverseCirculant", 2, 1, 0.5)
    for kind in ("SymToeplitz", "SymHankel"):
        with pytest.raises(NoClosedFormError):
            limit_moment_closed(kind, 2, 1, 1)


@given(st.sampled_from(["Wigner", "SymmetricCirculant"]), st.integers(0, 6),
       st.floats(0.0, 5.0), st.floats(0.05, 1.0))
def test_limit_odd_moments_vanish(kind, k, t, alpha):
    assert limit_moment_closed(kind, 2 * k + 1, t, alpha) == 0


@given(st.integers(1, 8), st.floats(0.1, 4.0))
def test_alpha_one_specialisation(m, t):
    assert limit_moment_closed("Wigner", 2 * m, t, 1.0) == pytest.approx(catalan(m) * t ** m, rel=1e-12)
    assert limit_moment_closed("SymmetricCirculant", 2 * m, t, 1.0) == pytest.approx(
        math.prod(range(1, 2 * m, 2)) * t ** m, rel=1e-12)


def test_mittag_leffler_examples():
    assert mittag_leffler_3p(1, 1, 1, 1) == pytest.approx(math.e, rel=1e-14)
    assert mittag_leffler_3p(1, 1, 1, 0) == 1
    assert mittag_leffler_3p(0.7, 1, 1, -1) == pytest.approx(ML_07_MINUS1, abs=1e-10)
    assert mittag_leffler_3p(0.8, 1, 1, -1) == pytest.approx(ML_08_MINUS1, abs=1e-10)


@given(st.floats(-3.0, 3.0))
def test_mittag_leffler_exponential(z):
    assert mittag_leffler_3p(1, 1, 1, z) == pytest.approx(math.exp(z), rel=1e-12)


@given(st.floats(0.05, 0.95), st.floats(0.01, 5.0))
def test_ml_zero_probability_in_unit_interval(alpha, t):
    p = mittag_leffler_3p(alpha, 1, 1, -t ** alpha)
    assert 0 < p <= 1


def test_series_cancellation_is_rejected():
    with pytest.raises(NumericError):
        mittag_leffler_3p(1, 1, 1, -60.0)


def test_wright_examples():
    assert wright(0.5, 0.5, 0) == pytest.approx(1 / math.gamma(0.5), rel=1e-14)
    assert wright(1, 1, 1) == pytest.approx(BESSEL_I0_2, rel=1e-13)
    assert wright(0.7, 0.3, 2) == pytest.approx(WRIGHT_07_03_2, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("u", [1e-3, 0.5, 2.0, 3.0])
def test_tc_mgf_matches_wright_form(alpha, u):
    z = u * u
    direct = (wright(alpha, 1 - alpha, z) - 1 / math.gamma(1 - alpha)) / z
    assert tc_semicircle_mgf(u, 1.0, alpha) == pytest.approx(direct, rel=1e-9)


def test_tc_mgf_at_zero_and_alpha_one():
    assert tc_semicircle_mgf(0.0, 1.0, 0.5) == 1.0
    assert tc_semicircle_mgf(1e-9, 1.0, 0.5) == pytest.approx(1.0, abs=1e-12)
    # alpha = 1: sum_m C_m u^{2m} / (2m)! = I_1(2u)/u
    u = 0.8
    series = 1 + sum(catalan(m) * u ** (2 * m) / math.factorial(2 * m) for m in range(1, 30))
    assert tc_semicircle_mgf(u, 1.0, 1.0) == pytest.approx(series, rel=1e-13)


@pytest.mark.parametrize("alpha", [0.3, 0.7])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_tc_mgf_taylor_coefficients(alpha, t):
    # Cauchy integral over complex u on a circle extracts the u^{2m} coefficient
    radius, k = 1.0, 256
    theta = 2 * math.pi * np.arange(k) / k
    vals = np.array([_complex_mgf(radius * cmath.exp(1j * th), t, alpha) for th in theta])
    for m in range(1, 5):
        coef = np.mean(vals * np.exp(-2j * m * theta)).real / radius ** (2 * m)
        expected = limit_moment_closed("Wigner", 2 * m, t, alpha)
        assert abs(math.factorial(2 * m) * coef - expected) < 1e-6


def _complex_mgf(u, t, alpha):
    z = u * u * t ** alpha
    return sum(z ** r / (math.gamma(r + 2) * math.gamma(alpha * r + 1)) for r in range(80))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_tc_mgf_second_derivative(alpha):
    h = 1e-3
    f = lambda u: tc_semicircle_mgf(u, 1.0, alpha)  # noqa: E731
    second = (f(h) - 2 * f(0.0) + f(-h)) / h ** 2
    assert second == pytest.approx(limit_moment_closed("Wigner", 2, 1.0, alpha), rel=1e-5)


def test_reference_cdf_examples():
    assert reference_cdf("semicircle", 1, 2) == 1
    assert reference_cdf("semicircle", 1, 0) == 0.5
    assert reference_cdf("gaussian", 4, 0) == 0.5
    assert reference_cdf("symmetrized_rayleigh", 1, 0) == 0.5


@pytest.mark.parametrize("law", ["semicircle", "gaussian", "symmetrized_rayleigh"])
@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_reference_laws_are_distributions(law, t):
    x = np.linspace(-40, 40, 20001)
    f = reference_cdf(law, t, x)
    assert np.all(np.diff(f) >= 0)
    assert f[0] == pytest.approx(0, abs=1e-12) and f[-1] == pytest.approx(1, abs=1e-12)
    total = integrate.quad(lambda y: reference_pdf(law, t, y), -40, 40, points=[0], limit=200)[0]
    assert total == pytest.approx(1, abs=1e-6)
    # derivative of the CDF is the density
    mid = np.linspace(-1.5, 1.5, 7) * math.sqrt(t)
    h = 1e-6
    deriv = (reference_cdf(law, t, mid + h) - reference_cdf(law, t, mid - h)) / (2 * h)
    assert np.allclose(deriv, reference_pdf(law, t, mid), atol=1e-5)


@pytest.mark.parametrize("law, moments", [
    ("semicircle", lambda m, t: catalan(m) * t ** m),
    ("gaussian", lambda m, t: math.prod(range(1, 2 * m, 2)) * t ** m),
    ("symmetrized_rayleigh", lambda m, t: math.factorial(m) * t ** m),
])
def test_reference_law_moments(law, moments):
    t = 1.7
    for m in (1, 2, 3):
        got = integrate.quad(lambda x: x ** (2 * m) * reference_pdf(law, t, x), -60, 60,
                             points=[0], limit=400)[0]
        assert got == pytest.approx(moments(m, t), rel=1e-8)


def test_inverse_subordinator_moment_examples():
    assert inverse_subordinator_moment(1, 1, 0.5) == pytest.approx(1.1283791670955126, rel=1e-14)
    assert inverse_subordinator_moment(2, 1, 1) == 1
    assert inverse_subordinator_moment(1, 4, 0.5) == pytest.approx(2.256758334191025, rel=1e-14)
    assert inverse_subordinator_moment(3, 0, 0.5) == 0


def test_validation():
    with pytest.raises(ValidationError):
        MomentSpec(0)
    with pytest.raises(ValidationError):
        MomentSpec(2, -1.0)
    with pytest.raises(ValidationError):
        MomentSpec(2, 1.0, 0.0)
    with pytest.raises(ValidationError):
        reference_cdf("cauchy", 1, 0)
