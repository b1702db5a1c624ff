import math

import numpy as np
import pytest

from hicache.basis import (
    IDENTITY_SIGMA,
    BasisConfig,
    BasisKind,
    basis_value,
    hermite_eval,
    scaled_hermite_eval,
    sigma_power,
    validate_sigma,
)
from hicache.errors import ConfigurationError

CLOSED_FORMS = {
    0: lambda x: np.ones_like(x),
    1: lambda x: 2 * x,
    2: lambda x: 4 * x**2 - 2,
    3: lambda x: 8 * x**3 - 12 * x,
    4: lambda x: 16 * x**4 - 48 * x**2 + 12,
}


@pytest.mark.parametrize(
    "n, x, expected",
    [(0, 3.7, 1.0), (2, 1.0, 2.0), (4, 2.0, 76.0), (3, -1.0, 4.0)],
)
def test_hermite_eval_examples(n, x, expected):
    assert hermite_eval(n, x) == expected


@pytest.mark.parametrize("n", sorted(CLOSED_FORMS))
def test_hermite_eval_matches_closed_forms(n):
    x = np.linspace(-5.0, 5.0, 1000)
    np.testing.assert_allclose(hermite_eval(n, x), CLOSED_FORMS[n](x), rtol=1e-12, atol=1e-9)


def test_hermite_eval_rejects_negative_degree():
    with pytest.raises(ConfigurationError):
        hermite_eval(-1, 0.5)


def test_hermite_eval_overflows_without_raising():
    assert math.isinf(hermite_eval(3, 1e200))


def test_scaled_hermite_examples():
    assert scaled_hermite_eval(1, 3.0, 0.5) == 1.5
    assert scaled_hermite_eval(2, 0.0, 0.5) == -0.5


@pytest.mark.parametrize("n", range(6))
def test_scaled_hermite_with_unit_sigma_is_plain_hermite(n):
    x = np.linspace(-3.0, 3.0, 101)
    np.testing.assert_array_equal(scaled_hermite_eval(n, x, 1.0), hermite_eval(n, x))


def test_scaled_hermite_identity():
    rng = np.random.default_rng(11)
    x = rng.uniform(-5.0, 5.0, 1000)
    for sigma in (0.3, 0.5, IDENTITY_SIGMA, 0.9):
        for n in range(5):
            expected = sigma**n * hermite_eval(n, sigma * x)
            np.testing.assert_allclose(
                scaled_hermite_eval(n, x, sigma), expected, rtol=1e-12, atol=1e-12
            )


def test_sigma_suppresses_low_orders_monotonically():
    sigmas = np.linspace(0.05, 1.0, 20)
    for n in range(1, 5):
        for low, high in zip(sigmas, sigmas[1:]):
            # below the first turning point of sigma**n * H_n(sigma * x) in sigma
            x = np.linspace(-0.4 / high, 0.4 / high, 201)
            smaller = np.abs(scaled_hermite_eval(n, x, low))
            larger = np.abs(scaled_hermite_eval(n, x, high))
            assert np.all(smaller <= larger + 1e-15)


@pytest.mark.parametrize("sigma", [0.0, -0.5, 1.5, float("nan"), float("inf")])
def test_invalid_sigma_is_rejected(sigma):
    with pytest.raises(ConfigurationError):
        validate_sigma(sigma)
    with pytest.raises(ConfigurationError):
        BasisConfig.hermite(2, sigma)


def test_taylor_config_ignores_sigma():
    config = BasisConfig(kind=BasisKind.TAYLOR, sigma=5.0, max_order=1)
    assert basis_value(config, 1, 3.0) == 3.0


def test_basis_value_examples():
    assert basis_value(BasisConfig.taylor(2), 2, -3.0) == 9.0
    assert basis_value(BasisConfig.hermite(2, 0.5), 1, -2.0) == -1.0


def test_identity_sigma_makes_first_order_the_identity():
    config = BasisConfig.hermite(1, IDENTITY_SIGMA)
    x = np.linspace(-10.0, 10.0, 41)
    np.testing.assert_allclose(basis_value(config, 1, x), x, rtol=1e-12, atol=1e-15)


def test_basis_value_rejects_orders_above_max_order():
    with pytest.raises(ConfigurationError):
        basis_value(BasisConfig.hermite(2, 0.5), 3, 1.0)


def test_basis_config_validation_and_echo():
    with pytest.raises(ConfigurationError):
        BasisConfig(max_order=-1)
    with pytest.raises(ValueError):
        BasisConfig(kind="legendre")
    config = BasisConfig(kind="hermite", sigma=0.5, max_order=3)
    assert config.kind is BasisKind.SCALED_HERMITE
    assert config.as_dict() == {"kind": "hermite", "sigma": 0.5, "max_order": 3}
    assert config.label() == "hermite(o=3,s=0.5)"


def test_sigma_power_uses_repeated_multiplication():
    assert sigma_power(0.5, 0) == 1.0
    assert sigma_power(0.5, 3) == 0.125


@pytest.mark.parametrize("n", range(9))
def test_hermite_parity(n):
    x = np.linspace(-4.0, 4.0, 801)
    np.testing.assert_allclose(hermite_eval(n, -x), (-1) ** n * hermite_eval(n, x), rtol=1e-14)
