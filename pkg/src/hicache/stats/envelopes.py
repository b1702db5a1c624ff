"""Error envelopes.

Constant-free forms of the analytic error bounds, used as diagnostics next to the measured
errors of the non-cumulative evaluation. None of them includes the unknown constants of the
bounds; compare them up to a fitted scale with ``fit_envelope_constant``.
"""

import math
from dataclasses import dataclass

from hicache.basis import validate_sigma
from hicache.errors import ConfigurationError


def _check_order(order: int) -> int:
    if isinstance(order, bool) or int(order) != order or order < 0:
        raise ConfigurationError(f"order must be a non-negative integer, got {order!r}")
    return int(order)


def taylor_error_envelope(order: int, k: float, sup_deriv: float) -> float:
    """Taylor remainder envelope ``k**(order+1) / (order+1)! * sup_deriv``.

    Args:
        order (int): Expansion order m.
        k (float): Prediction horizon (its magnitude is used).
        sup_deriv (float): Bound on the (m+1)-th derivative along the horizon.

    Returns:
        float: The envelope value.
    """
    order = _check_order(order)
    return abs(k) ** (order + 1) / math.factorial(order + 1) * sup_deriv


def hermite_truncation_envelope(order: int, sigma: float, ds: float) -> float:
    """Scaled-Hermite truncation envelope.

    ``(sigma * sqrt(2) * |ds|)**(order+1) / sqrt((order+1)!) * exp((sigma * ds)**2 / 2)``

    Args:
        order (int): Expansion order m.
        sigma (float): Contraction factor in (0, 1].
        ds (float): Prediction step.

    Returns:
        float: The envelope value.
    """
    order = _check_order(order)
    sigma = validate_sigma(sigma)
    base = sigma * math.sqrt(2.0) * abs(ds)
    return (
        base ** (order + 1)
        / math.sqrt(math.factorial(order + 1))
        * math.exp((sigma * ds) ** 2 / 2.0)
    )


def envelope_ratio(order: int, sigma: float, ds: float) -> float:
    """Hermite truncation envelope over the Taylor envelope (``sup_deriv = 1``, ``k = ds``).

    From order m to m+1 the ratio changes by ``sigma * sqrt(2) * sqrt(m + 2)``, so it
    decreases with the order while that factor stays below 1.
    """
    taylor = taylor_error_envelope(order, ds, 1.0)
    if taylor == 0.0:
        raise ConfigurationError("Envelope ratio is undefined for ds = 0")
    return hermite_truncation_envelope(order, sigma, ds) / taylor


def approximation_error_envelope(order: int, dt_hist: float) -> float:
    """Finite-difference approximation envelope ``|dt_hist| * sum_{k=1..order} k**-1.5``.

    The sum stays below ``sqrt(order)`` times the same scale, the usual coarse form.
    """
    order = _check_order(order)
    return abs(dt_hist) * sum(k**-1.5 for k in range(1, order + 1))


@dataclass(frozen=True)
class EnvelopeFit:
    """Result of scaling envelopes onto observed errors.

    Attributes:
        constant (float): Scale C fitted at the first order.
        within (tuple[bool, ...]): Per order, whether ``observed <= C * envelope``.
        ratios (tuple[float, ...]): Per order, ``observed / (C * envelope)``.
    """

    constant: float
    within: tuple
    ratios: tuple


def fit_envelope_constant(observed, envelopes, rel_tol: float = 1e-12) -> EnvelopeFit:
    """Fits a single constant on the first entry and checks the remaining ones against it.

    Args:
        observed (Sequence[float]): Measured errors, one per order.
        envelopes (Sequence[float]): Constant-free envelopes for the same orders.
        rel_tol (float): Relative slack for the comparison.

    Returns:
        EnvelopeFit: The constant and the per-order verdicts.
    """
    observed = [float(value) for value in observed]
    envelopes = [float(value) for value in envelopes]
    if len(observed) != len(envelopes) or not observed:
        raise ConfigurationError("observed and envelopes must be non-empty and equally long")
    if envelopes[0] <= 0.0:
        raise ConfigurationError("The first envelope must be positive to fit a constant")

    constant = observed[0] / envelopes[0]
    ratios = []
    within = []
    for value, envelope in zip(observed, envelopes):
        bound = constant * envelope
        if bound > 0:
            ratios.append(value / bound)
        else:
            ratios.append(math.inf if value > 0 else 1.0)
        within.append(value <= bound * (1.0 + rel_tol))
    return EnvelopeFit(constant=constant, within=tuple(within), ratios=tuple(ratios))
