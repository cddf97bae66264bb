import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fblrelay.bler import bler_fdr_asymptotic, bler_hdr_asymptotic
from fblrelay.channels import Mode, SystemParams, avg_snrs
from fblrelay.duplex import (
    TIE,
    PowerBudget,
    coeff_a,
    coeff_b,
    compare,
    critical_bler,
    delay_gap,
    delay_gap_closed,
    min_blocklength,
    optimal_powers_fdr,
    optimal_powers_hdr,
    select_mode,
)
from fblrelay.errors import DomainError, UnboundedDelayError

# -80 / -85 / -110 dB gains, -90 dBm noise
SYS = SystemParams(omega_sr=1e-8, omega_rd=10**-8.5, omega_rr=1e-11, noise_r=1e-12, noise_d=1e-12)
ONE_WATT = PowerBudget(1.0)


def fdr_asym_at(sys, ps, pr, sigma=256, m=512):
    return bler_fdr_asymptotic(avg_snrs(sys.with_powers(ps, pr)), sigma, m).value


def grid_argmin_relay_power(sys, pc, points=10_000):
    grid = pc * np.arange(1, points + 1) / points
    s = [avg_snrs(sys.with_powers(pc, pr)) for pr in grid]
    values = [x.rr / x.sr + 1 / x.rd for x in s]
    return grid[int(np.argmin(values))], pc / points


def test_optimal_relay_power_reference_point():
    ps, pr = optimal_powers_fdr(SYS, ONE_WATT)
    assert ps == 1.0
    assert pr == pytest.approx(math.sqrt(10**-0.5), rel=1e-14)
    assert pr == pytest.approx(0.5623, abs=1e-4)
    assert 10 * math.log10(pr * 1e3) == pytest.approx(27.5, abs=1e-9)


def test_optimal_relay_power_matches_grid_search():
    _, pr = optimal_powers_fdr(SYS, ONE_WATT)
    best, step = grid_argmin_relay_power(SYS, 1.0)
    assert abs(best - pr) <= step


def test_optimal_relay_power_interference_free_and_capped():
    clean = SystemParams(1e-8, 10**-8.5, 0.0, 1e-12, 1e-12)
    assert optimal_powers_fdr(clean, ONE_WATT) == (1.0, 1.0)
    weak = SystemParams(1e-8, 10**-8.5, 1e-16, 1e-12, 1e-12)
    assert optimal_powers_fdr(weak, ONE_WATT) == (1.0, 1.0)


def test_optimal_relay_power_ignores_code_parameters():
    # the asymptote over P_R is minimised at the same place for any (sigma, m)
    _, pr = optimal_powers_fdr(SYS, ONE_WATT)
    for sigma, m in ((64, 128), (256, 512), (800, 3000)):
        grid = np.linspace(0.05, 1.0, 2000)
        vals = [fdr_asym_at(SYS, 1.0, p, sigma, m) for p in grid]
        assert abs(grid[int(np.argmin(vals))] - pr) <= grid[1] - grid[0]


def test_optimal_powers_hdr_corner():
    assert optimal_powers_hdr(ONE_WATT) == (1.0, 1.0)
    grid = np.arange(1, 101) / 100
    vals = np.array([[bler_hdr_asymptotic(SYS.with_powers(ps, pr), 256, 512).value for pr in grid] for ps in grid])
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    assert (grid[i], grid[j]) == (1.0, 1.0)
    assert np.all(np.diff(vals, axis=0) < 0) and np.all(np.diff(vals, axis=1) < 0)


def test_coeff_a_reference_and_asymptote_identity():
    a = coeff_a(SYS, ONE_WATT)
    assert a == pytest.approx(1.125e-3, rel=1e-3)
    ps, pr = optimal_powers_fdr(SYS, ONE_WATT)
    assert a == pytest.approx(fdr_asym_at(SYS, ps, pr) / (2 ** (256 / 512) - 1), rel=1e-13)
    # first-order condition: the two summands balance at an interior optimum
    s = avg_snrs(SYS.with_powers(ps, pr))
    assert s.rr / s.sr == pytest.approx(1 / s.rd, rel=1e-13)


def test_coeff_a_interference_free_limit():
    clean = SystemParams(1e-8, 10**-8.5, 1e-30, 1e-12, 1e-12)
    assert coeff_a(clean, ONE_WATT) == pytest.approx(1e-12 / 10**-8.5, rel=1e-12)


def test_coeff_b_reference_and_identities():
    b = coeff_b(SYS, ONE_WATT)
    assert b == pytest.approx(4.162e-4, rel=1e-3)
    assert coeff_b(SYS, PowerBudget(2.0)) == pytest.approx(b / 2, rel=1e-15)
    hdr = bler_hdr_asymptotic(SYS.with_powers(1.0, 1.0), 256, 512).value
    assert b == pytest.approx(hdr / (2 ** (2 * 256 / 512) - 1), rel=1e-13)


def test_min_blocklength_examples():
    assert min_blocklength(1e-3, 256, 1e-3, Mode.FDR) == pytest.approx(256, rel=1e-14)
    assert min_blocklength(3e-4, 256, 1e-4, Mode.HDR) == pytest.approx(256, rel=1e-14)
    with pytest.raises(UnboundedDelayError):
        min_blocklength(0.0, 256, 1e-3, Mode.FDR)
    for bad in (-1e-3, 1.0, 1.5):
        with pytest.raises(DomainError):
            min_blocklength(bad, 256, 1e-3, Mode.FDR)


def _bisect_blocklength(f, eps, lo=1.0, hi=1e9):
    # f decreasing in m; find f(m) = eps
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if f(mid) > eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_min_blocklength_matches_asymptote_bisection():
    ps, pr = optimal_powers_fdr(SYS, ONE_WATT)
    s_f = avg_snrs(SYS.with_powers(ps, pr))
    sys_h = SYS.with_powers(1.0, 1.0)
    a, b = coeff_a(SYS, ONE_WATT), coeff_b(SYS, ONE_WATT)
    eps = 1e-3
    m_f = _bisect_blocklength(lambda m: bler_fdr_asymptotic(s_f, 800, m).value, eps)
    m_h = _bisect_blocklength(lambda m: bler_hdr_asymptotic(sys_h, 800, m).value, eps)
    assert abs(min_blocklength(eps, 800, a, Mode.FDR) - m_f) <= 0.5
    assert abs(min_blocklength(eps, 800, b, Mode.HDR) - m_h) <= 0.5


def test_critical_bler_cases():
    assert critical_bler(2e-4, 1e-4) == 0.0
    assert critical_bler(1.9e-4, 1e-4) is None
    a, b = coeff_a(SYS, ONE_WATT), coeff_b(SYS, ONE_WATT)
    star = critical_bler(a, b)
    assert star == pytest.approx(7.9e-4, rel=0.01)
    with pytest.raises(DomainError):
        critical_bler(0.0, 1e-4)


def _bisect_gap_root(sigma, a, b, lo, hi):
    for _ in range(300):
        mid = math.sqrt(lo * hi)
        if delay_gap(mid, sigma, a, b) > 0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def test_delay_gap_signs_around_reference_root():
    a, b = coeff_a(SYS, ONE_WATT), coeff_b(SYS, ONE_WATT)
    star = critical_bler(a, b)
    assert abs(delay_gap(star, 800, a, b)) <= 1e-9 * 800
    assert delay_gap(10 * star, 800, a, b) < 0
    assert delay_gap(star / 10, 800, a, b) > 0
    root = _bisect_gap_root(800, a, b, 1e-12, 0.5)
    assert root == pytest.approx(star, rel=1e-9)


def test_select_mode_examples():
    a, b = coeff_a(SYS, ONE_WATT), coeff_b(SYS, ONE_WATT)
    star = critical_bler(a, b)
    assert select_mode(2 * star, a, b) == "FDR"
    assert select_mode(star / 2, a, b) == "HDR"
    assert select_mode(star, a, b) == TIE
    assert select_mode(0.5, 1e-4, 1e-4) == "FDR"
    assert select_mode(1e-9, 1e-4, 1e-4) == "FDR"
    with pytest.raises(DomainError):
        select_mode(0.0, a, b)


def test_compare_bundles_consistent_values():
    out = compare(SYS, ONE_WATT, 1e-3, 800)
    assert out.coeff_a == coeff_a(SYS, ONE_WATT)
    assert out.delta_gap == pytest.approx(out.delta_f - out.delta_h, abs=1e-12)
    assert out.mode == "FDR" and out.delta_gap < 0


def test_select_mode_agrees_with_gap_sign_on_random_triples():
    rng = np.random.default_rng(123)
    for _ in range(1000):
        a, b = 10 ** rng.uniform(-6, -1, 2)
        eps = 10 ** rng.uniform(-8, -0.01)
        gap = delay_gap(eps, 256, a, b)
        mode = select_mode(eps, a, b)
        if mode == "FDR":
            assert gap < 0
        elif mode == "HDR":
            assert gap > 0
        else:
            assert abs(gap) <= 1e-6 * 256


def test_gap_sign_changes_once_with_decreasing_sign_factor():
    # the sign of the gap is the sign of (A/B - eps/A - 2), strictly decreasing in eps
    rng = np.random.default_rng(9)
    eps = np.logspace(-9, -0.001, 400)
    for _ in range(50):
        a, b = 10 ** rng.uniform(-6, -1, 2)
        signs = np.sign([delay_gap(e, 256, a, b) for e in eps])
        factor = a / b - eps / a - 2
        assert np.all(np.diff(factor) < 0)
        nonzero = signs[signs != 0]
        assert np.count_nonzero(np.diff(nonzero)) <= 1
        if critical_bler(a, b) is None:
            assert np.all(nonzero < 0)


def test_gap_not_globally_monotone():
    # the gap turns back towards zero once both delays shrink to a few payloads
    a, b = coeff_a(SYS, ONE_WATT), coeff_b(SYS, ONE_WATT)
    assert delay_gap(1e-1, 800, a, b) > delay_gap(1e-2, 800, a, b)


@settings(max_examples=300)
@given(st.floats(-6, -1), st.floats(-6, -1), st.floats(-8, -0.01), st.integers(1, 4000))
def test_closed_gap_matches_difference(log_a, log_b, log_eps, sigma):
    a, b, eps = 10**log_a, 10**log_b, 10**log_eps
    direct = delay_gap(eps, sigma, a, b)
    closed = delay_gap_closed(eps, sigma, a, b)
    scale = min_blocklength(eps, sigma, a, Mode.FDR)
    assert closed == pytest.approx(direct, rel=1e-9, abs=1e-12 * scale)


def test_critical_root_unique_on_random_draws():
    rng = np.random.default_rng(31)
    for _ in range(100):
        b = 10 ** rng.uniform(-6, -2)
        a = b * rng.uniform(2.0, 2.0 + 0.9 / b) if b < 0.45 else 2.5 * b
        star = critical_bler(a, b)
        if not 0 < star < 1:
            continue
        root = _bisect_gap_root(256, a, b, star * 1e-6, min(0.999999, star * 1e6))
        assert root == pytest.approx(star, rel=1e-9)
