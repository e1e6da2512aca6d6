"""Closed-form dimension constants and bound evaluators.

Every evaluator runs in double precision by default.  Passing
``precise=True`` switches to mpmath at ``PRECISE_DPS`` significant digits and
returns an ``mpmath.mpf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .metric_core import InstanceError

__all__ = [
    "PRECISE_DPS",
    "LOG_BASE_IN_CN_PRIME",
    "BoundError",
    "DimensionConstants",
    "sphere_volume",
    "unit_ball_volume",
    "berger_constant",
    "croke_beta",
    "main_constants",
    "dimension_constants",
    "volume_ratio",
    "log5",
    "k_upper_bound",
    "t_upper_bound",
    "main_lower_bound",
    "durumeric_bound",
    "cover_number_bound",
]

PRECISE_DPS = 50
# base of the logarithm inside C'_n = (n + 1) sqrt(log 5)
LOG_BASE_IN_CN_PRIME = "e"


class BoundError(InstanceError):
    """A bound formula was evaluated outside its domain."""


def _check_dim(n: int, lowest: int = 1) -> None:
    if isinstance(n, bool) or not isinstance(n, int) or n < lowest:
        raise BoundError(f"dimension must be an integer >= {lowest}, got {n!r}")


def sphere_volume(n: int, precise: bool = False):
    """Volume of the unit n-sphere in R^(n+1): 2 pi^((n+1)/2) / Gamma((n+1)/2)."""
    _check_dim(n, 0)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            h = mpmath.mpf(n + 1) / 2
            return +(2 * mpmath.pi**h / mpmath.gamma(h))
    # (n + 1) * omega_(n+1), via the recursion; same value as the Gamma form
    return (n + 1) * unit_ball_volume(n + 1)


def unit_ball_volume(n: int, precise: bool = False):
    """Volume of the unit n-ball: pi^(n/2) / Gamma(n/2 + 1)."""
    _check_dim(n, 0)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            h = mpmath.mpf(n) / 2
            return +(mpmath.pi**h / mpmath.gamma(h + 1))
    # omega_n = (2 pi / n) omega_(n-2) keeps small n exact in floating point
    vol = 1.0 if n % 2 == 0 else 2.0
    for d in range(2 + n % 2, n + 1, 2):
        vol *= 2 * math.pi / d
    return vol


def berger_constant(n: int, precise: bool = False):
    """sigma_n / pi^n, the embolic volume of the round n-sphere."""
    _check_dim(n)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            return +(sphere_volume(n, True) / mpmath.pi**n)
    return sphere_volume(n) / math.pi**n


def croke_beta(n: int, precise: bool = False):
    """Croke's local volume constant 2^(n-1) sigma_(n-1)^n / (n^n sigma_n^(n-1))."""
    _check_dim(n)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            lo, hi = sphere_volume(n - 1, True), sphere_volume(n, True)
            return +(mpmath.mpf(2) ** (n - 1) * lo**n / (mpmath.mpf(n) ** n * hi ** (n - 1)))
    lo, hi = sphere_volume(n - 1), sphere_volume(n)
    return 2 ** (n - 1) * lo**n / (n**n * hi ** (n - 1))


def main_constants(n: int, precise: bool = False):
    """(C_n, C'_n) with C'_n using the natural logarithm of 5."""
    _check_dim(n)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            lo, hi = sphere_volume(n - 1, True), sphere_volume(n, True)
            c = 5 * lo**n / (2 * mpmath.mpf(n) ** n * hi ** (n - 1))
            return +c, +((n + 1) * mpmath.sqrt(mpmath.log(5)))
    lo, hi = sphere_volume(n - 1), sphere_volume(n)
    return 5 * lo**n / (2 * n**n * hi ** (n - 1)), (n + 1) * math.sqrt(math.log(5))


@dataclass(frozen=True)
class DimensionConstants:
    n: int
    sigma_n: float
    sigma_n_minus_1: float
    omega_n: float
    alpha_berger: float
    beta_croke: float
    C_n: float
    C_n_prime: float


def dimension_constants(n: int) -> DimensionConstants:
    c, c_prime = main_constants(n)
    return DimensionConstants(
        n=n,
        sigma_n=sphere_volume(n),
        sigma_n_minus_1=sphere_volume(n - 1),
        omega_n=unit_ball_volume(n),
        alpha_berger=berger_constant(n),
        beta_croke=croke_beta(n),
        C_n=c,
        C_n_prime=c_prime,
    )


def log5(x: float) -> float:
    return math.log(x) / math.log(5)


def volume_ratio(V: float, beta: float, R0: float, n: int) -> float:
    """V / (beta R0^n), rounded once from the exact rational value."""
    if not (V > 0 and beta > 0 and R0 > 0):
        raise BoundError(f"V, beta, R0 must be positive, got {V!r}, {beta!r}, {R0!r}")
    _check_dim(n)
    return float(Fraction(V) / (Fraction(beta) * Fraction(R0) ** n))


def _ratio_at_least_one(V, beta, R0, n) -> float:
    ratio = volume_ratio(V, beta, R0, n)
    if ratio < 1:
        raise BoundError(f"ratio below 1: V/(beta R0^n) = {ratio!r}")
    return ratio


def k_upper_bound(V: float, beta: float, R0: float, n: int, alpha: float) -> float:
    """log5(V / (beta R0^n)) / (log5(alpha) - n); admissible k stay strictly below it."""
    ratio = _ratio_at_least_one(V, beta, R0, n)
    denom = log5(alpha) - n
    if not denom > 0:
        raise BoundError(f"denominator nonpositive: log5(alpha) - n = {denom!r}")
    return log5(ratio) / denom


def t_upper_bound(V: float, beta: float, R0: float, n: int) -> float:
    """(V / (beta R0^n)) * 5^(n + (n+1) theta) with theta = sqrt(log5 of the same ratio)."""
    ratio = _ratio_at_least_one(V, beta, R0, n)
    theta = math.sqrt(log5(ratio))
    return ratio * 5 ** (n + (n + 1) * theta)


def main_lower_bound(b1: int, n: int, variant: str = "sqrt_b1", precise: bool = False):
    """C_n b1 / exp(C'_n sqrt(b1)) or, for ``sqrt_log_b1``, with sqrt(log b1) in the exponent."""
    if isinstance(b1, bool) or not isinstance(b1, int) or b1 < 0:
        raise BoundError(f"b1 must be a nonnegative integer, got {b1!r}")
    if variant not in ("sqrt_b1", "sqrt_log_b1"):
        raise BoundError(f"unknown variant {variant!r}")
    if variant == "sqrt_log_b1" and b1 < 1:
        raise BoundError("sqrt_log_b1 variant needs b1 >= 1")
    c, c_prime = main_constants(n, precise)
    if precise:
        with mpmath.workdps(PRECISE_DPS):
            arg = mpmath.sqrt(b1) if variant == "sqrt_b1" else mpmath.sqrt(mpmath.log(b1))
            return +(c * b1 / mpmath.exp(c_prime * arg))
    arg = math.sqrt(b1) if variant == "sqrt_b1" else math.sqrt(math.log(b1))
    return c * b1 / math.exp(c_prime * arg)


def durumeric_bound(b1: int) -> float:
    if b1 < 0:
        raise BoundError(f"b1 must be nonnegative, got {b1!r}")
    return math.sqrt(b1)


def cover_number_bound(emb_value: float, n: int, d_n: float = 1.0) -> float:
    """d_n * emb * 5^((n+1) sqrt(log5 emb)); the dimension constant d_n is the caller's."""
    _check_dim(n)
    if not emb_value >= 1:
        raise BoundError(f"embolic value must be >= 1, got {emb_value!r}")
    return d_n * emb_value * 5 ** ((n + 1) * math.sqrt(log5(emb_value)))
