"""Normal-approximation coding quantities and the linearised error curve."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShortBlocklengthWarning
from .special import q_function

LOG2E = math.log2(math.e)
MIN_RELIABLE_BLOCKLENGTH = 100


def _as_snr(gamma, name="gamma"):
    arr = np.asarray(gamma, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be a non-negative SNR")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class CodingSpec:
    """Payload of ``payload_bits`` sent over ``blocklength`` channel uses."""

    payload_bits: int
    blocklength: float

    def __post_init__(self):
        if self.payload_bits <= 0:
            raise DomainError(f"payload_bits must be positive, got {self.payload_bits}")
        if not self.blocklength > 0:
            raise DomainError(f"blocklength must be positive, got {self.blocklength}")
        if self.blocklength < MIN_RELIABLE_BLOCKLENGTH:
            warnings.warn(
                f"blocklength {self.blocklength} < {MIN_RELIABLE_BLOCKLENGTH}: the normal "
                "approximation is only tight when the blocklength is sufficiently large",
                ShortBlocklengthWarning,
                stacklevel=3,
            )

    @property
    def rate(self) -> float:
        return self.payload_bits / self.blocklength

    @classmethod
    def full_duplex(cls, payload_bits: int, blocklength: float) -> "CodingSpec":
        """Each hop uses the whole block: m_F = m."""
        return cls(payload_bits, blocklength)

    @classmethod
    def half_duplex(cls, payload_bits: int, blocklength: float) -> "CodingSpec":
        """Each hop gets half the block: m_H = m / 2, so the rate doubles."""
        return cls(payload_bits, blocklength / 2.0)


@dataclass(frozen=True)
class LinearApproxParams:
    """Breakpoints of the linearised block-error curve for one coding spec.

    ``slope`` is theta_coef * sqrt(m); the curve falls from 1 at ``zeta`` to 0
    at ``xi`` through 1/2 at ``threshold``.
    """

    theta_coef: float
    threshold: float
    zeta: float
    xi: float
    blocklength: float

    @property
    def slope(self) -> float:
        return self.theta_coef * math.sqrt(self.blocklength)

    @property
    def lower(self) -> float:
        """Lower integration limit clamped to the non-negative SNR support."""
        return max(self.zeta, 0.0)


def capacity(gamma):
    """Shannon capacity log2(1 + gamma) in bits per channel use."""
    g = _as_snr(gamma)
    return _out(np.log1p(g) * LOG2E)


def dispersion(gamma):
    """AWGN channel dispersion (1 - (1 + gamma)^-2) (log2 e)^2."""
    g = _as_snr(gamma)
    return _out(-np.expm1(-2.0 * np.log1p(g)) * LOG2E**2)


def block_error_exact(gamma, spec: CodingSpec):
    """Normal-approximation block error probability at a fixed SNR.

    Zero SNR gives 1 by convention (the rate is always positive).
    """
    g = _as_snr(gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.log1p(g) * LOG2E
        v = -np.expm1(-2.0 * np.log1p(g)) * LOG2E**2
        arg = (c - spec.rate) * np.sqrt(spec.blocklength / v)
    arg = np.where(g > 0, arg, -np.inf)
    # Q saturates long before the clip points
    out = q_function(np.clip(arg, -40.0, 40.0))
    return _out(np.asarray(out))


def linear_approx_params(spec: CodingSpec) -> LinearApproxParams:
    r = spec.rate
    if not r > 0:
        raise DomainError("rate must be positive")
    theta_coef = 1.0 / (2.0 * math.pi * math.sqrt(math.expm1(2.0 * r * math.log(2.0))))
    threshold = math.expm1(r * math.log(2.0))
    half_width = 1.0 / (2.0 * theta_coef * math.sqrt(spec.blocklength))
    return LinearApproxParams(
        theta_coef=theta_coef,
        threshold=threshold,
        zeta=threshold - half_width,
        xi=threshold + half_width,
        blocklength=spec.blocklength,
    )


def xi_approx(gamma, p: LinearApproxParams):
    """Piecewise-linear surrogate of ``block_error_exact``: 1 below zeta, 0 above xi."""
    g = _as_snr(gamma)
    return _out(np.clip(0.5 - p.slope * (g - p.threshold), 0.0, 1.0))
