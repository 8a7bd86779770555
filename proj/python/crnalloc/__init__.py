"""Subcarrier and power allocation for OFDMA cognitive radio networks."""

from ._core import (
    Config,
    ConfigError,
    ConvergenceError,
    DomainError,
    Error,
    InfeasibleError,
    SinrDistribution,
    ber_bound,
    ber_exact,
    central_tail_approx,
    config_keys,
    discretize_rate,
    run,
    sample_sinr,
    selftest,
    sinr_distribution,
    surrogate_budget,
    sweep,
    waterfill_power,
    zeta_for_target,
)

__version__ = "0.1.0"

__all__ = [
    "Config",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "Error",
    "InfeasibleError",
    "SinrDistribution",
    "ber_bound",
    "ber_exact",
    "central_tail_approx",
    "config_keys",
    "discretize_rate",
    "run",
    "sample_sinr",
    "selftest",
    "sinr_distribution",
    "surrogate_budget",
    "sweep",
    "waterfill_power",
    "zeta_for_target",
]
