"""Block error rate of decode-and-forward relaying: closed forms, asymptotes,
quadrature and Monte Carlo.

All per-hop closed forms share one structure. With the linearised error
curve, the hop BLER equals slope * int_{zeta}^{xi} F(x) dx for the hop's SNR
CDF F. Negative ``zeta`` is harmless: F vanishes below zero, so the
integral starts at max(zeta, 0).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import AvgSnrs, Mode, SystemParams, chunk_bounds, sample_chunk
from .errors import DomainError
from .fbl import CodingSpec, LinearApproxParams, block_error_exact, linear_approx_params
from .quadrature import integrate
from .special import DEFAULT_ACCURACY, Accuracy, ei_diff_shifted

CLOSED_FORM = "closed_form"
ASYMPTOTIC = "asymptotic"
QUADRATURE = "quadrature"
MONTE_CARLO = "monte_carlo"

DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 20180723
MIN_SAMPLES = 10_000
THREADS_ENV = "FBLRELAY_THREADS"


@dataclass(frozen=True)
class BlerEstimate:
    value: float
    method: str
    ci_halfwidth: float = 0.0
    clamped: bool = False


def _finish(raw: float, method: str, ci: float = 0.0, clamped: bool = False) -> BlerEstimate:
    if math.isnan(raw):
        raise DomainError(f"{method} evaluation produced NaN")
    inside = 0.0 <= raw <= 1.0
    return BlerEstimate(min(max(raw, 0.0), 1.0), method, ci, clamped or not inside)


def combine_df(eps1: float, eps2: float) -> float:
    """End-to-end error of two decode-and-forward hops: eps1 + (1 - eps1) eps2."""
    for e in (eps1, eps2):
        if not 0.0 <= e <= 1.0:
            raise DomainError(f"hop error probabilities must lie in [0, 1], got {e}")
    return eps1 + (1.0 - eps1) * eps2


def _combine(first: BlerEstimate, second: BlerEstimate, method: str) -> BlerEstimate:
    return BlerEstimate(
        combine_df(first.value, second.value), method, 0.0, first.clamped or second.clamped
    )


def hop_bler_quadrature(cdf, p: LinearApproxParams, tol: float = 1e-9) -> BlerEstimate:
    """Hop BLER for an arbitrary SNR CDF by adaptive quadrature.

    ``cdf`` must accept a numpy array of SNRs.
    """
    if not p.xi > 0:
        raise DomainError("upper breakpoint must be positive")
    value, _ = integrate(cdf, p.lower, p.xi, rel_tol=tol)
    return _finish(p.slope * value, QUADRATURE)


def _h_plus_expm1(h: float) -> float:
    # h + e^{-h} - 1, accurate for small h
    if h < 0.05:
        term, total = h * h / 2.0, 0.0
        for k in range(3, 20):
            total += term
            term *= -h / k
        return total
    return h + math.expm1(-h)


def hop_bler_rayleigh_closed(mean: float, p: LinearApproxParams) -> BlerEstimate:
    """Hop BLER over a Rayleigh link with average SNR ``mean``.

    Algebraically 1 - slope * mean * (e^{-zeta/mean} - e^{-xi/mean}) when
    zeta >= 0, rearranged into a sum of non-negative terms.
    """
    if not mean > 0:
        raise DomainError("average SNR must be positive")
    y0 = p.lower / mean
    h = (p.xi - p.lower) / mean
    integral = mean * (h * -math.expm1(-y0) + math.exp(-y0) * _h_plus_expm1(h))
    return _finish(p.slope * integral, CLOSED_FORM)


def hop_bler_fdr_sr_closed(s: AvgSnrs, p: LinearApproxParams,
                           acc: Accuracy = DEFAULT_ACCURACY) -> BlerEstimate:
    """Source-relay hop BLER of full-duplex relaying, through the Ei closed form.

    1 - slope (sr/rr) e^{1/rr} [Ei(-xi/sr - 1/rr) - Ei(-zeta/sr - 1/rr)], with
    the exponential scaling folded into the Ei difference.
    """
    if s.rr == 0:
        return hop_bler_rayleigh_closed(s.sr, p)
    a = 1.0 / s.rr
    # int (1 - F) over [lower, xi] = (sr/rr) * int_{u}^{v} e^{a-t}/t dt
    tail = -ei_diff_shifted(a, p.lower / s.sr, p.xi / s.sr, acc)
    raw = p.slope * (p.xi - p.lower) - p.slope * (s.sr / s.rr) * tail
    return _finish(raw, CLOSED_FORM)


def bler_fdr_closed(s: AvgSnrs, spec_f: CodingSpec, acc: Accuracy = DEFAULT_ACCURACY) -> BlerEstimate:
    """End-to-end full-duplex BLER; ``spec_f`` is the per-hop spec (m_F = m)."""
    p = linear_approx_params(spec_f)
    return _combine(hop_bler_fdr_sr_closed(s, p, acc), hop_bler_rayleigh_closed(s.rd, p), CLOSED_FORM)


def bler_hdr_closed(s: AvgSnrs, spec_h: CodingSpec) -> BlerEstimate:
    """End-to-end half-duplex BLER; ``spec_h`` is the per-hop spec (m_H = m/2)."""
    p = linear_approx_params(spec_h)
    return _combine(hop_bler_rayleigh_closed(s.sr, p), hop_bler_rayleigh_closed(s.rd, p), CLOSED_FORM)


def bler_closed(s: AvgSnrs, mode: Mode, payload_bits: int, blocklength: float) -> BlerEstimate:
    """Closed-form BLER for either mode given the total blocklength ``m``."""
    if Mode(mode) is Mode.FDR:
        return bler_fdr_closed(s, CodingSpec.full_duplex(payload_bits, blocklength))
    return bler_hdr_closed(s, CodingSpec.half_duplex(payload_bits, blocklength))


def bler_fdr_asymptotic(s: AvgSnrs, payload_bits: float, blocklength: float) -> BlerEstimate:
    """High-SNR full-duplex BLER (rr/sr + 1/rd)(2^{sigma/m} - 1)."""
    if not (payload_bits > 0 and blocklength > 0):
        raise DomainError("payload and blocklength must be positive")
    raw = (s.rr / s.sr + 1.0 / s.rd) * math.expm1(payload_bits / blocklength * math.log(2.0))
    return _finish(raw, ASYMPTOTIC)


def bler_hdr_asymptotic(sys: SystemParams, payload_bits: float, blocklength: float) -> BlerEstimate:
    """High-SNR half-duplex BLER (N_R/(P_S W_SR) + N_D/(P_R W_RD))(2^{2 sigma/m} - 1)."""
    if not (payload_bits > 0 and blocklength > 0):
        raise DomainError("payload and blocklength must be positive")
    if not (sys.power_s > 0 and sys.power_r > 0):
        raise DomainError("half-duplex asymptote needs positive transmit powers")
    inv_snr = sys.noise_r / (sys.power_s * sys.omega_sr) + sys.noise_d / (sys.power_r * sys.omega_rd)
    raw = inv_snr * math.expm1(2.0 * payload_bits / blocklength * math.log(2.0))
    return _finish(raw, ASYMPTOTIC)


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _chunk_moments(s, mode, spec, hop, seed, index, size):
    relay, dest = sample_chunk(s, mode, size, seed, index)
    if hop == "sr":
        err = block_error_exact(relay, spec)
    elif hop == "rd":
        err = block_error_exact(dest, spec)
    else:
        e1 = block_error_exact(relay, spec)
        e2 = block_error_exact(dest, spec)
        err = e1 + (1.0 - e1) * e2
    mean = float(np.mean(err))
    return size, mean, float(np.sum((err - mean) ** 2))


def bler_monte_carlo(s: AvgSnrs, mode: Mode, spec: CodingSpec, n: int = DEFAULT_SAMPLES,
                     seed: int = DEFAULT_SEED, hop: str | None = None,
                     workers: int | None = None) -> BlerEstimate:
    """Monte Carlo BLER: average of the per-block normal-approximation error.

    ``spec`` is the per-hop coding spec of ``mode``. Each draw combines the
    two hop errors as eps1 + (1 - eps1) eps2; ``hop='sr'`` or ``'rd'`` keeps a
    single hop. ``ci_halfwidth`` is the 95% normal half-width. Results depend
    only on (inputs, n, seed), never on ``workers``.
    """
    if n < MIN_SAMPLES:
        raise DomainError(f"Monte Carlo needs at least {MIN_SAMPLES} samples, got {n}")
    if hop not in (None, "sr", "rd"):
        raise DomainError(f"hop must be None, 'sr' or 'rd', got {hop!r}")
    mode = Mode(mode)
    jobs = [(k, stop - start) for k, (start, stop) in enumerate(chunk_bounds(n))]
    workers = default_workers() if workers is None else max(1, int(workers))

    def run(job):
        return _chunk_moments(s, mode, spec, hop, seed, *job)

    if workers == 1 or len(jobs) == 1:
        parts = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            parts = list(pool.map(run, jobs))

    # pairwise merge of (count, mean, M2) in chunk order
    count, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        total = count + nb
        delta = mb - mean
        mean += delta * nb / total
        m2 += m2b + delta * delta * count * nb / total
        count = total
    std = math.sqrt(m2 / (count - 1))
    return _finish(mean, MONTE_CARLO, ci=1.96 * std / math.sqrt(count))
