"""Block error rate and minimum delay of full- and half-duplex decode-and-forward
relaying with short packets."""

from .bler import (
    BlerEstimate,
    bler_closed,
    bler_fdr_asymptotic,
    bler_fdr_closed,
    bler_hdr_asymptotic,
    bler_hdr_closed,
    bler_monte_carlo,
    combine_df,
    hop_bler_fdr_sr_closed,
    hop_bler_quadrature,
    hop_bler_rayleigh_closed,
)
from .channels import (
    AvgSnrs,
    Mode,
    SystemParams,
    avg_snrs,
    cdf_exponential,
    cdf_fdr_relay_sinr,
    cdf_fdr_relay_sinr_highsnr,
    sample_link_snrs,
)
from .duplex import (
    DuplexComparison,
    PowerBudget,
    coeff_a,
    coeff_b,
    compare,
    critical_bler,
    delay_gap,
    min_blocklength,
    optimal_powers_fdr,
    optimal_powers_hdr,
    select_mode,
)
from .errors import ConfigError, ConvergenceError, DomainError, FblRelayError, UnboundedDelayError
from .fbl import CodingSpec, LinearApproxParams, block_error_exact, capacity, dispersion, linear_approx_params, xi_approx
from .special import Accuracy, exp_integral_ei, exp_scaled_ei_diff, q_function

__version__ = "0.1.0"
