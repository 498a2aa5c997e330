"""Exception hierarchy."""


class SVHedgeError(Exception):
    """Base class for all package errors."""


class DomainError(SVHedgeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(SVHedgeError, ValueError):
    """Incompatible combination of strategy, cost model and correction."""


class NumericalError(SVHedgeError, RuntimeError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(SVHedgeError):
    """Config file violates the schema (CLI exit code 2)."""

    exit_code = 2

    def __init__(self, message: str, key_path: str = ""):
        super().__init__(f"{key_path}: {message}" if key_path else message)
        self.key_path = key_path


class RhoRuleError(ConfigError):
    """The rho(n) rule does not satisfy the growth condition (exit code 3)."""

    exit_code = 3
