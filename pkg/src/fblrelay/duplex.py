"""Power allocation and full- versus half-duplex delay comparison.

Everything here works on the high-SNR BLER expressions, which are linear
in the inverse SNRs. Under per-node peak power P_C these give

    eps_F = A (2^{sigma/m} - 1),    eps_H = B (2^{2 sigma/m} - 1),

so the minimum blocklengths meeting a target eps have closed forms, and the
two modes need the same blocklength exactly at eps* = (A/B)(A - 2B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import Mode, SystemParams
from .errors import DomainError, UnboundedDelayError

TIE = "tie"
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class PowerBudget:
    peak: float

    def __post_init__(self):
        if not self.peak > 0:
            raise DomainError(f"peak power must be positive, got {self.peak}")


@dataclass(frozen=True)
class DuplexComparison:
    coeff_a: float
    coeff_b: float
    delta_f: float
    delta_h: float
    delta_gap: float
    eps_star: float | None
    mode: str


def optimal_powers_fdr(sys: SystemParams, budget: PowerBudget) -> tuple[float, float]:
    """(P_S*, P_R*) minimising the full-duplex asymptote under peak power P_C.

    The relay power balances loop interference against the relay-destination
    SNR; it does not depend on payload or blocklength.
    """
    pc = budget.peak
    if sys.omega_rr == 0:
        return pc, pc
    interior = math.sqrt(pc * sys.omega_sr * sys.noise_d / (sys.omega_rr * sys.omega_rd))
    return pc, min(pc, interior)


def optimal_powers_hdr(budget: PowerBudget) -> tuple[float, float]:
    return budget.peak, budget.peak


def coeff_a(sys: SystemParams, budget: PowerBudget) -> float:
    """Full-duplex inverse-SNR sum at the optimal powers."""
    ps, pr = optimal_powers_fdr(sys, budget)
    return pr * sys.omega_rr / (ps * sys.omega_sr) + sys.noise_d / (pr * sys.omega_rd)


def coeff_b(sys: SystemParams, budget: PowerBudget) -> float:
    """Half-duplex inverse-SNR sum with both nodes at full power."""
    return (sys.noise_r / sys.omega_sr + sys.noise_d / sys.omega_rd) / budget.peak


def min_blocklength(eps: float, payload_bits: float, coeff: float, mode: Mode) -> float:
    """Smallest (real-valued) total blocklength whose asymptotic BLER equals ``eps``."""
    if not payload_bits > 0 or not coeff > 0:
        raise DomainError("payload and coefficient must be positive")
    if eps == 0:
        raise UnboundedDelayError("zero target BLER needs an infinite blocklength")
    if not 0 < eps < 1:
        raise DomainError(f"target BLER must lie in (0, 1), got {eps}")
    bits_per_use = math.log1p(eps / coeff) / math.log(2.0)
    if Mode(mode) is Mode.FDR:
        return payload_bits / bits_per_use
    return 2.0 * payload_bits / bits_per_use


def delay_gap(eps: float, payload_bits: float, a: float, b: float) -> float:
    """delta_F - delta_H; negative means full duplex needs fewer channel uses."""
    return min_blocklength(eps, payload_bits, a, Mode.FDR) - min_blocklength(eps, payload_bits, b, Mode.HDR)


def delay_gap_closed(eps: float, payload_bits: float, a: float, b: float) -> float:
    """Single-expression form of ``delay_gap``.

    sigma log2[(1 + eps/B) / (1 + eps/A)^2] / (log2(1 + eps/A) log2(1 + eps/B)).
    The log of the ratio is accumulated from log1p terms so the sign stays
    reliable near the crossing.
    """
    if not 0 < eps < 1:
        raise DomainError(f"target BLER must lie in (0, 1), got {eps}")
    la = math.log1p(eps / a)
    lb = math.log1p(eps / b)
    # (1 + e/B) / (1 + e/A)^2 - 1 = (e/A)(A/B - e/A - 2) / (1 + e/A)^2
    x = eps / a
    ratio_minus_one = x * (a / b - x - 2.0) / (1.0 + x) ** 2
    # far from the crossing the plain difference of logs is better conditioned
    log_ratio = math.log1p(ratio_minus_one) if abs(ratio_minus_one) < 0.5 else lb - 2.0 * la
    return payload_bits * math.log(2.0) * log_ratio / (la * lb)


def critical_bler(a: float, b: float) -> float | None:
    """Target BLER at which both modes need the same blocklength, or None."""
    if not (a > 0 and b > 0):
        raise DomainError("coefficients must be positive")
    if a < 2.0 * b:
        return None
    return (a / b) * (a - 2.0 * b)


def select_mode(eps_target: float, a: float, b: float) -> str:
    """Duplex mode with the shorter minimum delay: 'FDR', 'HDR' or 'tie'."""
    if not 0 < eps_target < 1:
        raise DomainError(f"target BLER must lie in (0, 1), got {eps_target}")
    star = critical_bler(a, b)
    if star is None:
        return Mode.FDR.value
    if abs(eps_target - star) <= TIE_RTOL * star:
        return TIE
    return Mode.FDR.value if eps_target > star else Mode.HDR.value


def compare(sys: SystemParams, budget: PowerBudget, eps_target: float, payload_bits: float) -> DuplexComparison:
    a = coeff_a(sys, budget)
    b = coeff_b(sys, budget)
    df = min_blocklength(eps_target, payload_bits, a, Mode.FDR)
    dh = min_blocklength(eps_target, payload_bits, b, Mode.HDR)
    return DuplexComparison(a, b, df, dh, df - dh, critical_bler(a, b), select_mode(eps_target, a, b))
