"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its contract."""


class EnergyViolation(ValueError):
    """A model fails the per-gyrostat energy constraint p + q + r = 0."""


class ConfigError(ValueError):
    """A model configuration document is malformed or inconsistent."""


class IntegrationError(RuntimeError):
    """Numerical integration produced a non-finite state."""


class ConsistencyError(RuntimeError):
    """Symbolic and numeric layers disagree beyond tolerance."""
