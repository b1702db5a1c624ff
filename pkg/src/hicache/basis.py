"""Basis Module.

This module evaluates the basis functions used by the feature predictor:

- the monomial (Taylor) basis ``step ** n``;
- the physicists' Hermite polynomials ``H_n(x)`` through the three-term recurrence
  ``H_{n+1}(x) = 2x H_n(x) - 2n H_{n-1}(x)`` with ``H_0 = 1`` and ``H_1 = 2x``;
- the scaled Hermite polynomials ``H~_n(x) = sigma**n * H_n(sigma * x)``.

``H_n`` is always evaluated at ``sigma * x`` through the recurrence and multiplied by
``sigma**n`` built by repeated multiplication. Coefficients of ``H~_n`` are never expanded.
Every function accepts scalars or numpy arrays and evaluates in float64.

Example:
    >>> from hicache.basis import BasisConfig, BasisKind, basis_value
    >>> config = BasisConfig(kind=BasisKind.SCALED_HERMITE, sigma=0.5, max_order=2)
    >>> basis_value(config, 1, -2.0)
    -1.0
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from hicache.errors import ConfigurationError

ArrayOrFloat = Union[float, np.ndarray]

# sigma that makes the first scaled Hermite polynomial the identity (2 * sigma**2 == 1)
IDENTITY_SIGMA: float = 1.0 / math.sqrt(2.0)


class BasisKind(str, Enum):
    """The two predictor bases."""

    TAYLOR = "taylor"
    SCALED_HERMITE = "hermite"


@dataclass(frozen=True)
class BasisConfig:
    """Predictor basis selection.

    Attributes:
        kind (BasisKind): Taylor monomials or scaled Hermite polynomials.
        sigma (float): Contraction factor in (0, 1]; ignored for the Taylor basis.
            ``1.0`` means no contraction.
        max_order (int): Highest expansion order N_order (practically <= 4).
    """

    kind: BasisKind = BasisKind.SCALED_HERMITE
    sigma: float = 0.5
    max_order: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", BasisKind(self.kind))
        if isinstance(self.max_order, bool) or int(self.max_order) != self.max_order:
            raise ConfigurationError(f"max_order must be an integer, got {self.max_order!r}")
        if self.max_order < 0:
            raise ConfigurationError(f"max_order must be non-negative, got {self.max_order}")
        if self.kind is BasisKind.SCALED_HERMITE:
            validate_sigma(self.sigma)

    @classmethod
    def taylor(cls, max_order: int) -> "BasisConfig":
        """Shortcut for a Taylor basis of the given order."""
        return cls(kind=BasisKind.TAYLOR, sigma=1.0, max_order=max_order)

    @classmethod
    def hermite(cls, max_order: int, sigma: float) -> "BasisConfig":
        """Shortcut for a scaled Hermite basis of the given order and contraction factor."""
        return cls(kind=BasisKind.SCALED_HERMITE, sigma=sigma, max_order=max_order)

    def label(self) -> str:
        """Short human-readable name, e.g. ``hermite(o=2,s=0.5)``."""
        if self.kind is BasisKind.TAYLOR:
            return f"taylor(o={self.max_order})"
        return f"hermite(o={self.max_order},s={self.sigma!r})"

    def as_dict(self) -> dict:
        """Serializable echo of the configuration."""
        return {"kind": self.kind.value, "sigma": self.sigma, "max_order": self.max_order}


def validate_sigma(sigma: float) -> float:
    """Checks that the contraction factor lies in (0, 1].

    Args:
        sigma (float): The contraction factor.

    Returns:
        float: ``sigma`` as a float.

    Raises:
        ConfigurationError: If ``sigma`` is not a finite number in (0, 1].
    """
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0.0 or sigma > 1.0:
        raise ConfigurationError(f"sigma must lie in (0, 1], got {sigma!r}")
    return sigma


def _check_degree(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ConfigurationError(f"Polynomial degree must be a non-negative integer, got {n!r}")
    return int(n)


def _unwrap(value: np.ndarray) -> ArrayOrFloat:
    return float(value) if value.ndim == 0 else value


def hermite_eval(n: int, x: ArrayOrFloat) -> ArrayOrFloat:
    """Evaluates the physicists' Hermite polynomial ``H_n(x)``.

    Overflow to infinity is allowed for extreme inputs and does not raise.

    Args:
        n (int): Non-negative degree.
        x (float | np.ndarray): Evaluation point(s).

    Returns:
        float | np.ndarray: ``H_n(x)`` with the shape of ``x``.
    """
    n = _check_degree(n)
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.ones_like(x)
    if n == 0:
        return _unwrap(h_prev)

    with np.errstate(over="ignore", invalid="ignore"):
        h_curr = 2.0 * x
        for k in range(1, n):
            h_prev, h_curr = h_curr, 2.0 * x * h_curr - 2.0 * k * h_prev
    return _unwrap(h_curr)


def sigma_power(sigma: float, n: int) -> float:
    """``sigma ** n`` by repeated multiplication."""
    scale = 1.0
    for _ in range(n):
        scale *= sigma
    return scale


def scaled_hermite_eval(n: int, x: ArrayOrFloat, sigma: float) -> ArrayOrFloat:
    """Evaluates the scaled Hermite polynomial ``sigma**n * H_n(sigma * x)``.

    Args:
        n (int): Non-negative degree.
        x (float | np.ndarray): Evaluation point(s).
        sigma (float): Contraction factor in (0, 1].

    Returns:
        float | np.ndarray: ``H~_n(x)`` with the shape of ``x``.

    Raises:
        ConfigurationError: If ``sigma`` is outside (0, 1].
    """
    sigma = validate_sigma(sigma)
    n = _check_degree(n)
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        value = sigma_power(sigma, n) * np.asarray(hermite_eval(n, sigma * x))
    return _unwrap(value)


def basis_value(config: BasisConfig, n: int, step: ArrayOrFloat) -> ArrayOrFloat:
    """Evaluates the ``n``-th basis function of ``config`` at ``step``.

    The predictor passes ``step = -k`` for a horizon of ``k`` steps. ``n = 0`` yields 1 for both
    bases; the predictor never requests it since the zeroth term is the cached feature itself.

    Args:
        config (BasisConfig): The basis selection.
        n (int): Order, ``0 <= n <= config.max_order``.
        step (float | np.ndarray): Signed step.

    Returns:
        float | np.ndarray: ``step ** n`` (Taylor) or ``H~_n(step)`` (scaled Hermite).

    Raises:
        ConfigurationError: If ``n`` is out of range.
    """
    n = _check_degree(n)
    if n > config.max_order:
        raise ConfigurationError(f"Order {n} exceeds the configured max_order {config.max_order}")

    step = np.asarray(step, dtype=np.float64)
    if config.kind is BasisKind.TAYLOR:
        with np.errstate(over="ignore"):
            return _unwrap(step**n)
    return scaled_hermite_eval(n, step, config.sigma)
