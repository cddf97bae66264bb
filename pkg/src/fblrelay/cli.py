"""Command-line front end: ``fblrelay {bler-sweep,delay-sweep,select,validate}``.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

from .bler import (
    bler_fdr_asymptotic,
    bler_fdr_closed,
    bler_hdr_asymptotic,
    bler_hdr_closed,
    bler_monte_carlo,
)
from .channels import Mode, avg_snrs
from .config import (
    BLER_AXES,
    DELAY_AXES,
    FORMATS,
    ScenarioConfig,
    at_point,
    dbm_to_watts,
    log_bler_grid,
    parse_config,
)
from .duplex import (
    PowerBudget,
    coeff_a,
    coeff_b,
    critical_bler,
    min_blocklength,
    optimal_powers_fdr,
    optimal_powers_hdr,
    select_mode,
)
from .errors import ConfigError, FblRelayError, ShortBlocklengthWarning
from .fbl import CodingSpec
from .validation import ERROR, FAIL, run_checks

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

BLER_HEADER = ["axis", "eps_f_cf", "eps_h_cf", "eps_f_asym", "eps_h_asym",
               "eps_f_mc", "eps_f_ci", "eps_h_mc", "eps_h_ci", "clamped"]
DELAY_HEADER = ["eps", "delta_f", "delta_h", "delta_gap", "winner"]
SELECT_HEADER = ["eps_target", "coeff_a", "coeff_b", "eps_star", "mode", "delta_f", "delta_h",
                 "delta_gap", "p_s_fdr", "p_r_fdr", "p_s_hdr", "p_r_hdr"]
VERIFY_HEADER = ["eps_f_cf_at_delta_f", "eps_h_cf_at_delta_h"]
VALIDATE_HEADER = ["check", "measured", "tolerance", "status", "detail"]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        # 17 significant digits, emitted as a JSON number
        return json.loads(f"{value:.17g}") if math.isfinite(value) else str(value)
    if isinstance(value, bool):
        return int(value)
    return value


def render(header, rows, fmt) -> str:
    """Serialise rows (sequences aligned with ``header``) as CSV or JSON lines."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()
    lines = [json.dumps({k: _json_value(v) for k, v in zip(header, row)}) for row in rows]
    return "".join(line + "\n" for line in lines)


def _powers(cfg: ScenarioConfig):
    """Transmit powers in watts for (FDR, HDR) at one configuration."""
    ps = dbm_to_watts(cfg.power_s_dbm)
    if cfg.power_r_dbm is None:
        fdr = optimal_powers_fdr(cfg.system(), PowerBudget(ps))
        return fdr, (ps, ps)
    pr = dbm_to_watts(cfg.power_r_dbm)
    return (ps, pr), (ps, pr)


def bler_row(cfg: ScenarioConfig, axis_value):
    sys_base = cfg.system()
    (ps_f, pr_f), (ps_h, pr_h) = _powers(cfg)
    sys_f, sys_h = sys_base.with_powers(ps_f, pr_f), sys_base.with_powers(ps_h, pr_h)
    s_f, s_h = avg_snrs(sys_f), avg_snrs(sys_h)
    spec_f = CodingSpec.full_duplex(cfg.payload_bits, cfg.blocklength)
    spec_h = CodingSpec.half_duplex(cfg.payload_bits, cfg.blocklength)
    estimates = [
        bler_fdr_closed(s_f, spec_f),
        bler_hdr_closed(s_h, spec_h),
        bler_fdr_asymptotic(s_f, cfg.payload_bits, cfg.blocklength),
        bler_hdr_asymptotic(sys_h, cfg.payload_bits, cfg.blocklength),
    ]
    mc = cfg.monte_carlo
    if mc.samples > 0:
        mc_f = bler_monte_carlo(s_f, Mode.FDR, spec_f, mc.samples, mc.seed)
        mc_h = bler_monte_carlo(s_h, Mode.HDR, spec_h, mc.samples, mc.seed)
        mc_cells = [mc_f.value, mc_f.ci_halfwidth, mc_h.value, mc_h.ci_halfwidth]
        estimates += [mc_f, mc_h]
    else:
        mc_cells = [math.nan] * 4
    clamped = any(e.clamped for e in estimates)
    return [axis_value] + [e.value for e in estimates[:4]] + mc_cells + [clamped]


def run_bler_sweep(cfg: ScenarioConfig):
    """Rows of BLER per sweep point, in axis order."""
    sweep = cfg.sweep
    if sweep is None or sweep.variable not in BLER_AXES:
        raise ConfigError(f"bler-sweep needs a sweep over one of {BLER_AXES}", "sweep.variable")
    rows = []
    for value in sweep.points():
        point = at_point(cfg, sweep.variable, value)
        axis = point.blocklength if sweep.variable == "blocklength" else (
            point.payload_bits if sweep.variable == "payload_bits" else value)
        rows.append(bler_row(point, axis))
    return BLER_HEADER, rows


def _coefficients(cfg: ScenarioConfig):
    sys = cfg.system()
    budget = PowerBudget(dbm_to_watts(cfg.power_c_dbm))
    return sys, budget, coeff_a(sys, budget), coeff_b(sys, budget)


def run_delay_sweep(cfg: ScenarioConfig):
    """Minimum delay of both modes over a log-spaced BLER target axis."""
    sweep = cfg.sweep
    if sweep is None or sweep.variable not in DELAY_AXES:
        raise ConfigError(f"delay-sweep needs a sweep over one of {DELAY_AXES}", "sweep.variable")
    _, _, a, b = _coefficients(cfg)
    rows = []
    for eps in log_bler_grid(sweep):
        eps = float(eps)
        df = min_blocklength(eps, cfg.payload_bits, a, Mode.FDR)
        dh = min_blocklength(eps, cfg.payload_bits, b, Mode.HDR)
        rows.append([eps, df, dh, df - dh, select_mode(eps, a, b)])
    return DELAY_HEADER, rows


def run_select(cfg: ScenarioConfig, eps_target: float | None = None, verify: bool = False):
    """One-row decision report for a target BLER."""
    eps = cfg.target_bler if eps_target is None else eps_target
    sys, budget, a, b = _coefficients(cfg)
    df = min_blocklength(eps, cfg.payload_bits, a, Mode.FDR)
    dh = min_blocklength(eps, cfg.payload_bits, b, Mode.HDR)
    p_fdr = optimal_powers_fdr(sys, budget)
    p_hdr = optimal_powers_hdr(budget)
    row = [eps, a, b, critical_bler(a, b), select_mode(eps, a, b), df, dh, df - dh, *p_fdr, *p_hdr]
    header = list(SELECT_HEADER)
    if verify:
        s_f = avg_snrs(sys.with_powers(*p_fdr))
        s_h = avg_snrs(sys.with_powers(*p_hdr))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ShortBlocklengthWarning)
            row += [
                bler_fdr_closed(s_f, CodingSpec.full_duplex(cfg.payload_bits, df)).value,
                bler_hdr_closed(s_h, CodingSpec.half_duplex(cfg.payload_bits, dh)).value,
            ]
        header += VERIFY_HEADER
    return header, [row]


def run_validate(cfg: ScenarioConfig):
    results = run_checks(cfg)
    rows = [[r.check, r.measured, r.tolerance, r.status, r.detail] for r in results]
    if any(r.status == ERROR for r in results):
        code = EXIT_NUMERIC
    elif any(r.status == FAIL for r in results):
        code = EXIT_VALIDATION
    else:
        code = EXIT_OK
    return VALIDATE_HEADER, rows, code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file (defaults: the reference deployment)")
    common.add_argument("--format", choices=FORMATS, help="output format (default csv)")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
    common.add_argument("--samples", type=int, help="Monte Carlo draws per point (0 disables)")
    common.add_argument("--out", help="output path (default standard output)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field; dotted keys, JSON values (repeatable)")

    parser = argparse.ArgumentParser(
        prog="fblrelay",
        description="Finite-blocklength BLER and delay of full- versus half-duplex DF relaying.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bler-sweep", parents=[common], help="closed-form, asymptotic and Monte Carlo BLER over one axis")
    sub.add_parser("delay-sweep", parents=[common], help="minimum delay of both modes over a BLER-target axis")
    sel = sub.add_parser("select", parents=[common], help="duplex-mode decision for one BLER target")
    sel.add_argument("--target", type=float, help="target BLER (overrides target_bler)")
    sel.add_argument("--verify", action="store_true",
                     help="also evaluate the closed forms at the implied blocklengths")
    sub.add_parser("validate", parents=[common], help="cross-check the closed forms against quadrature and Monte Carlo")
    return parser


def _write(text: str, out):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = EXIT_OK
    try:
        cfg = parse_config(args.config, args.overrides, seed=args.seed, samples=args.samples, format=args.format)
        if args.command == "bler-sweep":
            header, rows = run_bler_sweep(cfg)
        elif args.command == "delay-sweep":
            header, rows = run_delay_sweep(cfg)
        elif args.command == "select":
            if args.target is not None and not 0 < args.target < 1:
                raise ConfigError("must lie in (0, 1)", "--target")
            header, rows = run_select(cfg, args.target, args.verify)
        else:
            header, rows, code = run_validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FblRelayError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(render(header, rows, cfg.format), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
