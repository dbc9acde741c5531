"""Exception types shared across the package."""


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class CapacityError(RuntimeError):
    """An exact enumeration would exceed the configured cap.

    Callers should fall back to Monte Carlo estimation or shrink the
    instance.
    """


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown policy, bad flag value)."""
