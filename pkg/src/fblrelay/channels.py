"""Rayleigh block-fading link model for the source-relay-destination chain.

Everything here is in linear units. Average SNRs follow from transmit
power, channel power gain and receiver noise; the full-duplex relay sees
its own transmission as a Rayleigh-faded loop interferer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

CHUNK_SIZE = 1 << 16


class Mode(str, enum.Enum):
    FDR = "FDR"
    HDR = "HDR"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SystemParams:
    """Gains, noise powers (W) and transmit powers (W) of the three links.

    Powers default to zero so the same record can describe a deployment
    before the transmit powers are chosen.
    """

    omega_sr: float
    omega_rd: float
    omega_rr: float
    noise_r: float
    noise_d: float
    power_s: float = 0.0
    power_r: float = 0.0

    def __post_init__(self):
        for name in ("omega_sr", "omega_rd", "noise_r", "noise_d"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        for name in ("omega_rr", "power_s", "power_r"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be non-negative")

    def with_powers(self, power_s: float, power_r: float) -> "SystemParams":
        return SystemParams(
            self.omega_sr, self.omega_rd, self.omega_rr, self.noise_r, self.noise_d, power_s, power_r
        )


@dataclass(frozen=True)
class AvgSnrs:
    sr: float
    rd: float
    rr: float = 0.0

    def __post_init__(self):
        if not (self.sr > 0 and self.rd > 0):
            raise DomainError("average S-R and R-D SNRs must be positive")
        if not self.rr >= 0:
            raise DomainError("average loop-interference SNR must be non-negative")


def avg_snrs(sys: SystemParams) -> AvgSnrs:
    return AvgSnrs(
        sr=sys.power_s * sys.omega_sr / sys.noise_r,
        rd=sys.power_r * sys.omega_rd / sys.noise_d,
        rr=sys.power_r * sys.omega_rr / sys.noise_r,
    )


def _as_nonneg(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("CDF argument must be non-negative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def cdf_exponential(x, mean: float):
    """CDF of a Rayleigh-faded link SNR with average ``mean``."""
    if not mean > 0:
        raise DomainError("mean SNR must be positive")
    arr = _as_nonneg(x)
    return _out(-np.expm1(-arr / mean))


def cdf_fdr_relay_sinr(x, s: AvgSnrs):
    """CDF of sr*X / (rr*Y + 1) with X, Y independent unit exponentials.

    P(SINR > x) = e^{-x/sr} sr / (sr + rr x); the complement is written as
    (p + q) / (1 + q) with p = 1 - e^{-x/sr} and q = rr x / sr so that small
    probabilities keep full relative precision.
    """
    arr = _as_nonneg(x)
    p = -np.expm1(-arr / s.sr)
    q = s.rr * arr / s.sr
    with np.errstate(invalid="ignore"):
        out = (p + q) / (1.0 + q)
    out = np.where(np.isinf(q), 1.0, out)
    return _out(out)


def cdf_fdr_relay_sinr_highsnr(x, s: AvgSnrs):
    """High-SNR linearisation (rr / sr) x of the relay SINR CDF, clipped to 1."""
    arr = _as_nonneg(x)
    return _out(np.clip(s.rr / s.sr * arr, 0.0, 1.0))


def chunk_generator(seed: int, chunk_index: int) -> np.random.Generator:
    """Counter-based stream for one chunk; depends only on (seed, chunk_index)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chunk_index),))
    return np.random.Generator(np.random.Philox(ss))


def chunk_bounds(n: int, chunk_size: int = CHUNK_SIZE):
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def sample_chunk(s: AvgSnrs, mode: Mode, size: int, seed: int, chunk_index: int):
    """Draw ``size`` (relay SNR, destination SNR) pairs for one chunk."""
    rng = chunk_generator(seed, chunk_index)
    mode = Mode(mode)
    n_var = 3 if mode is Mode.FDR else 2
    # inverse transform keeps one uniform per exponential, in a fixed order
    expo = -np.log1p(-rng.random((n_var, size)))
    if mode is Mode.FDR:
        relay = s.sr * expo[0] / (s.rr * expo[1] + 1.0)
        dest = s.rd * expo[2]
    else:
        relay = s.sr * expo[0]
        dest = s.rd * expo[1]
    return relay, dest


def sample_link_snrs(s: AvgSnrs, mode: Mode, n: int, seed: int):
    """Return arrays (relay SNR, destination SNR) of ``n`` independent blocks.

    The draws are generated in fixed-size chunks, each from its own stream
    keyed on (seed, chunk index), so any parallel split reproduces them.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    parts = [sample_chunk(s, mode, stop - start, seed, k) for k, (start, stop) in enumerate(chunk_bounds(n))]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
