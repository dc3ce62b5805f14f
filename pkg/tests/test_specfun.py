import math

import mpmath
import numpy as np
import pytest

from spinreg.specfun import bernoulli_even, digamma, gamma_fn, hurwitz_zeta, polygamma

from _oracles import polygamma_series


def test_gamma_examples():
    assert gamma_fn(1) == 1
    assert gamma_fn(4) == pytest.approx(6, rel=1e-15)
    assert gamma_fn(4.5) == pytest.approx(11.631728396567448, rel=1e-14)


def test_gamma_domain():
    with pytest.raises(ValueError):
        gamma_fn(0)


def test_bernoulli():
    assert bernoulli_even(1) == pytest.approx(1 / 6)
    assert bernoulli_even(2) == pytest.approx(-1 / 30)
    assert bernoulli_even(6) == pytest.approx(691 / 2730 * -1)


def test_zeta_identities():
    assert hurwitz_zeta(2, 1) == pytest.approx(math.pi**2 / 6, rel=1e-14)
    assert hurwitz_zeta(4, 1) == pytest.approx(math.pi**4 / 90, rel=1e-14)


def test_zeta_against_series():
    z = 1 + 0.6j
    ref = polygamma_series(3, z) / 6.0  # psi'''(z) = 6 zeta(4, z)
    assert abs(hurwitz_zeta(4, z) - ref) <= 1e-12 * abs(ref)


def test_zeta_domain():
    with pytest.raises(ValueError):
        hurwitz_zeta(1.0, 1.0)
    with pytest.raises(ValueError):
        hurwitz_zeta(2.0, -0.5)


def test_polygamma_identities():
    assert polygamma(1, 1) == pytest.approx(math.pi**2 / 6, rel=1e-12)
    assert polygamma(3, 1) == pytest.approx(math.pi**4 / 15, rel=1e-12)
    assert digamma(1) == pytest.approx(-0.5772156649015329, rel=1e-14)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 5])
def test_polygamma_vs_mpmath(m):
    rng = np.random.default_rng(m)
    z = rng.uniform(0.5, 30, 40) + 1j * rng.uniform(-40, 40, 40)
    got = polygamma(m, z)
    ref = np.array([complex(mpmath.polygamma(m, complex(x))) for x in z])
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-300)


def test_thermal_arguments_vs_series():
    # arguments of the form 1 + 1/tau_T - i x/tau_T with tau_T = 3
    for x in (0.0, 1.0, 5.0, 17.5):
        z = 1 + 1 / 3 - 1j * x / 3
        ref = polygamma_series(3, z, n_terms=200_000)
        assert abs(polygamma(3, z) - ref) <= 1e-10 * abs(ref)


def test_recurrence():
    rng = np.random.default_rng(7)
    z = rng.uniform(0.1, 15, 50) + 1j * rng.uniform(-20, 20, 50)
    for m in range(5):
        lhs = polygamma(m, z + 1)
        rhs = polygamma(m, z) + (-1) ** m * math.factorial(m) * z ** (-(m + 1))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-11)


def test_conjugation():
    rng = np.random.default_rng(8)
    z = rng.uniform(0.5, 10, 30) + 1j * rng.uniform(-10, 10, 30)
    for m in range(4):
        np.testing.assert_allclose(polygamma(m, z.conj()), np.conj(polygamma(m, z)), rtol=1e-14)


def test_negative_real_part():
    z = -2.5 + 0.3j
    for m in (0, 1, 3):
        assert polygamma(m, z) == pytest.approx(complex(mpmath.polygamma(m, z)), rel=1e-11)


@pytest.mark.parametrize("z", [0, -1, -3.0])
def test_poles(z):
    with pytest.raises(ValueError):
        polygamma(2, z)


def test_order_checked():
    with pytest.raises(ValueError):
        polygamma(1.5, 1.0)
