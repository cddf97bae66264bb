"""Gaussian tail probability and the exponential integral for negative arguments.

Ei(x) for x < 0 is evaluated as -E1(-x). E1 uses its power series on (0, 1]
and the Lentz continued fraction above 1, the latter returning the
exponentially scaled value e^z E1(z) directly so large arguments never
underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erfc

from .errors import ConvergenceError, DomainError

EULER_GAMMA = 0.57721566490153286061
_SQRT2 = math.sqrt(2.0)
_TINY = 1e-300


@dataclass(frozen=True)
class Accuracy:
    """Stopping rule for the series and continued-fraction evaluations."""

    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1e-6:
            raise DomainError(f"rel_tol must lie in (0, 1e-6), got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 50:
            raise DomainError(f"max_terms must be an integer >= 50, got {self.max_terms}")


DEFAULT_ACCURACY = Accuracy()


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Accepts scalars or arrays; scalars come back as ``float``.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("q_function requires finite arguments")
    out = 0.5 * erfc(arr / _SQRT2)
    return float(out) if out.ndim == 0 else out


def _e1_series(z: float, acc: Accuracy) -> float:
    # E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
    total = -EULER_GAMMA - math.log(z)
    term = 1.0
    for k in range(1, acc.max_terms + 1):
        term *= -z / k
        contrib = term / k
        total -= contrib
        if abs(contrib) <= acc.rel_tol * 1e-4 * abs(total):
            return total
    raise ConvergenceError(f"E1 series did not converge for z={z} within {acc.max_terms} terms")


def _scaled_e1_cf(z: float, acc: Accuracy) -> float:
    # modified Lentz evaluation of e^z E1(z), valid for z > 1
    b = z + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, acc.max_terms + 1):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= acc.rel_tol * 1e-3:
            return h
    raise ConvergenceError(f"E1 continued fraction did not converge for z={z} within {acc.max_terms} terms")


def scaled_e1(z: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Return e^z * E1(z) for z > 0."""
    if not (z > 0.0 and math.isfinite(z)):
        raise DomainError(f"scaled_e1 requires finite z > 0, got {z}")
    if z <= 1.0:
        return math.exp(z) * _e1_series(z, acc)
    return _scaled_e1_cf(z, acc)


def exp_integral_ei(x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Exponential integral Ei(x) for x < 0."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("exp_integral_ei requires a finite argument")
    if x >= 0.0:
        raise DomainError(f"exp_integral_ei is implemented for x < 0 only, got {x}")
    z = -x
    if z <= 1.0:
        return -_e1_series(z, acc)
    scaled = _scaled_e1_cf(z, acc)
    if z > 745.0:
        return -math.exp(-z + math.log(scaled))
    return -math.exp(-z) * scaled


@lru_cache(maxsize=None)
def _legendre_rule(n: int = 16):
    return np.polynomial.legendre.leggauss(n)


def ei_diff_shifted(a: float, du: float, dv: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Return e^a [Ei(-(a+du)) - Ei(-(a+dv))] with a >= 0 and a+du, a+dv > 0.

    The shifted form keeps full precision when ``a`` is huge compared with
    ``du`` and ``dv``. Equals -int_{du}^{dv} e^{-s} / (a + s) ds.
    """
    if du == dv:
        return 0.0
    if du > dv:
        return -ei_diff_shifted(a, dv, du, acc)
    u, v = a + du, a + dv
    if not (u > 0.0 and v > 0.0):
        raise DomainError(f"arguments must satisfy a+du > 0 and a+dv > 0, got {u}, {v}")
    h = dv - du
    if h <= 1.0 and h <= 0.5 * u:
        # integrand is analytic well beyond [du, dv]; fixed Gauss-Legendre is exact to rounding
        nodes, weights = _legendre_rule()
        s = du + 0.5 * h * (nodes + 1.0)
        return float(-0.5 * h * np.sum(weights * np.exp(-s) / (a + s)))
    return _exp_neg(dv) * scaled_e1(v, acc) - _exp_neg(du) * scaled_e1(u, acc)


def _exp_neg(t: float) -> float:
    return math.exp(-t) if t > -709.0 else math.inf


def exp_scaled_ei_diff(a: float, u: float, v: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Return e^a * (Ei(-u) - Ei(-v)) for u, v > 0 without overflow."""
    if not (u > 0.0 and v > 0.0):
        raise DomainError(f"exp_scaled_ei_diff requires u, v > 0, got u={u}, v={v}")
    if u == v:
        return 0.0
    if u > v:
        return -exp_scaled_ei_diff(a, v, u, acc)
    if a >= 0.0 and u >= 0.5 * a:
        # u - a and v - a are exact here, so the shift costs nothing
        return ei_diff_shifted(a, u - a, v - a, acc)
    scale = math.exp(a) if a < 709.0 else math.inf
    return scale * ei_diff_shifted(0.0, u, v, acc)
