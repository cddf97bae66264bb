"""Cross-method consistency checks run by ``fblrelay validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bler import (
    bler_fdr_asymptotic,
    bler_fdr_closed,
    bler_hdr_asymptotic,
    bler_hdr_closed,
    bler_monte_carlo,
    hop_bler_fdr_sr_closed,
    hop_bler_quadrature,
    hop_bler_rayleigh_closed,
)
from .channels import Mode, avg_snrs, cdf_exponential, cdf_fdr_relay_sinr
from .config import ScenarioConfig, dbm_to_watts
from .duplex import PowerBudget, coeff_a, coeff_b, critical_bler, delay_gap, optimal_powers_fdr
from .errors import FblRelayError
from .fbl import CodingSpec, linear_approx_params

PASS, FAIL, ERROR, SKIP = "pass", "fail", "error", "skip"

QUAD_RTOL = 1e-6
MC_FLOOR = 0.005
ASYMPTOTE_TOL = 0.10
ROOT_RTOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    check: str
    measured: float
    tolerance: float
    status: str
    detail: str = ""


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _fdr_powers(cfg: ScenarioConfig, peak_dbm: float | None = None):
    """(P_S, P_R) in watts for full duplex at the configured or optimal relay power."""
    ps_dbm = cfg.power_s_dbm if peak_dbm is None else peak_dbm
    ps = dbm_to_watts(ps_dbm)
    if cfg.power_r_dbm is None or peak_dbm is not None:
        return optimal_powers_fdr(cfg.system(), PowerBudget(ps))
    return ps, dbm_to_watts(cfg.power_r_dbm)


def _hdr_powers(cfg: ScenarioConfig):
    ps = dbm_to_watts(cfg.power_s_dbm)
    return ps, ps if cfg.power_r_dbm is None else dbm_to_watts(cfg.power_r_dbm)


def _quadrature_checks(cfg):
    sys = cfg.system()
    s_f = avg_snrs(sys.with_powers(*_fdr_powers(cfg)))
    s_h = avg_snrs(sys.with_powers(*_hdr_powers(cfg)))
    p_f = linear_approx_params(CodingSpec.full_duplex(cfg.payload_bits, cfg.blocklength))
    p_h = linear_approx_params(CodingSpec.half_duplex(cfg.payload_bits, cfg.blocklength))
    cases = [
        ("quadrature_fdr_sr", hop_bler_fdr_sr_closed(s_f, p_f), lambda x: cdf_fdr_relay_sinr(x, s_f), p_f),
        ("quadrature_fdr_rd", hop_bler_rayleigh_closed(s_f.rd, p_f), lambda x: cdf_exponential(x, s_f.rd), p_f),
        ("quadrature_hdr_sr", hop_bler_rayleigh_closed(s_h.sr, p_h), lambda x: cdf_exponential(x, s_h.sr), p_h),
        ("quadrature_hdr_rd", hop_bler_rayleigh_closed(s_h.rd, p_h), lambda x: cdf_exponential(x, s_h.rd), p_h),
    ]
    if s_f.rr == 0:
        cases.append(
            ("rayleigh_reduction_fdr_sr", hop_bler_fdr_sr_closed(s_f, p_f),
             lambda x: cdf_exponential(x, s_f.sr), p_f)
        )
    for name, closed, cdf, p in cases:
        quad = hop_bler_quadrature(cdf, p, tol=cfg.quad_tol)
        err = _rel(closed.value, quad.value)
        yield CheckResult(name, err, QUAD_RTOL, PASS if err <= QUAD_RTOL else FAIL,
                          f"closed={closed.value:.12g} quadrature={quad.value:.12g}")


def _monte_carlo_checks(cfg):
    if cfg.monte_carlo.samples == 0:
        for name in ("monte_carlo_fdr", "monte_carlo_hdr"):
            yield CheckResult(name, math.nan, math.nan, SKIP, "Monte Carlo disabled (samples = 0)")
        return
    sys = cfg.system()
    mc = cfg.monte_carlo
    s_f = avg_snrs(sys.with_powers(*_fdr_powers(cfg)))
    s_h = avg_snrs(sys.with_powers(*_hdr_powers(cfg)))
    spec_f = CodingSpec.full_duplex(cfg.payload_bits, cfg.blocklength)
    spec_h = CodingSpec.half_duplex(cfg.payload_bits, cfg.blocklength)
    pairs = [
        ("monte_carlo_fdr", bler_fdr_closed(s_f, spec_f), bler_monte_carlo(s_f, Mode.FDR, spec_f, mc.samples, mc.seed)),
        ("monte_carlo_hdr", bler_hdr_closed(s_h, spec_h), bler_monte_carlo(s_h, Mode.HDR, spec_h, mc.samples, mc.seed)),
    ]
    for name, closed, est in pairs:
        band = max(3.0 * est.ci_halfwidth, MC_FLOOR)
        gap = abs(closed.value - est.value)
        yield CheckResult(name, gap, band, PASS if gap <= band else FAIL,
                          f"closed={closed.value:.6g} mc={est.value:.6g}+-{est.ci_halfwidth:.2g}")


def asymptote_deviations(cfg: ScenarioConfig, peaks_dbm):
    """|asymptote / closed form - 1| per mode with both nodes at their optimum."""
    sys = cfg.system()
    spec_f = CodingSpec.full_duplex(cfg.payload_bits, cfg.blocklength)
    spec_h = CodingSpec.half_duplex(cfg.payload_bits, cfg.blocklength)
    fdr, hdr = [], []
    for peak in peaks_dbm:
        ps, pr = _fdr_powers(cfg, peak)
        s_f = avg_snrs(sys.with_powers(ps, pr))
        fdr.append(abs(bler_fdr_asymptotic(s_f, cfg.payload_bits, cfg.blocklength).value
                       / bler_fdr_closed(s_f, spec_f).value - 1.0))
        sys_h = sys.with_powers(ps, ps)
        hdr.append(abs(bler_hdr_asymptotic(sys_h, cfg.payload_bits, cfg.blocklength).value
                       / bler_hdr_closed(avg_snrs(sys_h), spec_h).value - 1.0))
    return fdr, hdr


def _asymptote_checks(cfg):
    peaks = [cfg.power_s_dbm + step for step in (0.0, 5.0, 10.0)]
    fdr, hdr = asymptote_deviations(cfg, peaks)
    for name, dev in (("asymptote_fdr", fdr), ("asymptote_hdr", hdr)):
        if name == "asymptote_fdr" and cfg.omega_rr_db is None:
            # without loop interference the full-duplex asymptote drops the S-R term entirely
            yield CheckResult(name, math.nan, ASYMPTOTE_TOL, SKIP, "no loop interference")
            continue
        monotone = all(b <= a for a, b in zip(dev, dev[1:]))
        ok = monotone and dev[-1] <= ASYMPTOTE_TOL
        yield CheckResult(name, dev[-1], ASYMPTOTE_TOL, PASS if ok else FAIL,
                          "deviations " + " ".join(f"{d:.4g}" for d in dev) + ("" if monotone else " (not monotone)"))


def _optimal_power_check(cfg):
    sys = cfg.system()
    budget = PowerBudget(dbm_to_watts(cfg.power_c_dbm))
    _, pr_star = optimal_powers_fdr(sys, budget)
    grid = np.linspace(budget.peak / 10_000, budget.peak, 10_000)
    step = grid[1] - grid[0]
    objective = grid * sys.omega_rr / (budget.peak * sys.omega_sr) + sys.noise_d / (grid * sys.omega_rd)
    best = grid[int(np.argmin(objective))]
    gap = abs(best - pr_star)
    yield CheckResult("optimal_relay_power", gap, step, PASS if gap <= step * (1 + 1e-9) else FAIL,
                      f"closed={pr_star:.6g} W grid={best:.6g} W")


def bisect_crossing(payload_bits, a, b, lo=1e-300, hi=1.0 - 1e-12, iterations=200):
    """Root of delay_gap in log(eps) by plain bisection; None if no sign change."""
    f_lo = delay_gap(lo, payload_bits, a, b)
    f_hi = delay_gap(hi, payload_bits, a, b)
    if f_lo * f_hi > 0:
        return None
    x_lo, x_hi = math.log(lo), math.log(hi)
    for _ in range(iterations):
        mid = 0.5 * (x_lo + x_hi)
        if (delay_gap(math.exp(mid), payload_bits, a, b) > 0) == (f_lo > 0):
            x_lo = mid
        else:
            x_hi = mid
    return math.exp(0.5 * (x_lo + x_hi))


def _critical_check(cfg):
    sys = cfg.system()
    budget = PowerBudget(dbm_to_watts(cfg.power_c_dbm))
    a, b = coeff_a(sys, budget), coeff_b(sys, budget)
    star = critical_bler(a, b)
    root = bisect_crossing(cfg.payload_bits, a, b)
    if star is None:
        gaps = [delay_gap(e, cfg.payload_bits, a, b) for e in np.logspace(-12, -0.01, 50)]
        ok = root is None and all(g < 0 for g in gaps)
        yield CheckResult("critical_bler", max(gaps), 0.0, PASS if ok else FAIL,
                          "no crossing: full duplex shorter for every target")
        return
    if star >= 1.0:
        yield CheckResult("critical_bler", star, 1.0, SKIP, f"eps*={star:.6g} lies outside (0, 1)")
        return
    err = _rel(root, star) if root is not None else math.inf
    yield CheckResult("critical_bler", err, ROOT_RTOL, PASS if err <= ROOT_RTOL else FAIL,
                      f"closed={star:.12g} bisection={root}")


def run_checks(cfg: ScenarioConfig) -> list[CheckResult]:
    """Run every check; numerical failures become ``error`` rows instead of raising."""
    groups = [
        ("quadrature", _quadrature_checks),
        ("monte_carlo", _monte_carlo_checks),
        ("asymptote", _asymptote_checks),
        ("optimal_relay_power", _optimal_power_check),
        ("critical_bler", _critical_check),
    ]
    results = []
    for name, group in groups:
        try:
            results.extend(group(cfg))
        except FblRelayError as exc:
            results.append(CheckResult(name, math.nan, math.nan, ERROR, f"{type(exc).__name__}: {exc}"))
    return results
