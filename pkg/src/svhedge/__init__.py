"""Monte-Carlo laboratory for Leland-type hedging with transaction costs under stochastic volatility."""

__version__ = "0.1.0"

from .analytics import OptionSpec, bs_price, delta, delta_time_derivative, gamma, greeks, phi_tilde, q_factor, v_value
from .errors import ConfigError, ConfigurationError, DomainError, NumericalError, RhoRuleError, SVHedgeError
from .hedging import CostModel, HedgeOutcome, apply_costs, corrected_error, hedge_path, hedge_paths
from .limits import QuadratureConfig, eta, eta_zero, expected_abs_linear, g_func, j_limit, j_star, j_zero, lambda_func
from .models import MarketModel, PathBundle, make_model, simulate_paths
from .schedule import RevisionSchedule, VolatilityProfile, grid_diagnostics, lambda_of_t, revision_times

__all__ = [
    "__version__",
    "OptionSpec", "bs_price", "delta", "delta_time_derivative", "gamma", "greeks", "phi_tilde",
    "q_factor", "v_value",
    "ConfigError", "ConfigurationError", "DomainError", "NumericalError", "RhoRuleError", "SVHedgeError",
    "CostModel", "HedgeOutcome", "apply_costs", "corrected_error", "hedge_path", "hedge_paths",
    "QuadratureConfig", "eta", "eta_zero", "expected_abs_linear", "g_func", "j_limit", "j_star",
    "j_zero", "lambda_func",
    "MarketModel", "PathBundle", "make_model", "simulate_paths",
    "RevisionSchedule", "VolatilityProfile", "grid_diagnostics", "lambda_of_t", "revision_times",
]
