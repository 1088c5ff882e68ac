"""Exception types raised by the simulation and optimization modules."""


class SimulationError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SimulationError):
    """Invalid run configuration; carries an aggregated list of messages."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class GridMismatchError(SimulationError):
    """Operands live on different spatial grids."""


class ConvergenceError(SimulationError):
    """An iterative solver stopped without reaching its residual target."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class NormDriftError(SimulationError):
    """Propagation violated the norm-conservation bound."""


class DelocalizationError(SimulationError):
    """No sign assignment yields sufficiently localized well states."""


class AmbiguousStateError(SimulationError):
    """Two eigenstate candidates overlap the reference almost equally."""
