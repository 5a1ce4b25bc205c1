"""Exception classes shared across the package."""


class ConfigurationError(ValueError):
    """Inconsistent or invalid configuration (mismatched truncations, bad steps, ...)."""


class SequencingError(RuntimeError):
    """An operation was asked for data outside the simulated/recorded range."""


class InternalConsistencyError(RuntimeError):
    """A structural invariant (e.g. Hermitian symmetry) was violated at runtime."""


class DivergenceError(RuntimeError):
    """A trajectory blew up.  Records the first offending mode and time."""

    def __init__(self, mode, time, value):
        self.mode = int(mode)
        self.time = float(time)
        self.value = value
        super().__init__(
            f"trajectory diverged at mode k={self.mode}, t={self.time:g} "
            f"(|value|={abs(value):.3e})"
        )
