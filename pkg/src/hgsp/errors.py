"""Exception types raised across the package."""


class FormatError(ValueError):
    """Input file is malformed (ragged rows, non-numeric cells, bad length)."""


class SizeError(ValueError):
    """A dense allocation would exceed the configured cap."""


class DimensionError(ValueError):
    """Array shapes do not agree."""


class ConvergenceError(RuntimeError):
    """The eigensolver failed to converge."""


class ConfigError(ValueError):
    """A configuration value is invalid for the data it is applied to."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class BatchError(RuntimeError):
    """Every sample in a batch failed."""

    def __init__(self, errors):
        self.errors = dict(errors)
        summary = "; ".join(f"[{i}] {e}" for i, e in sorted(self.errors.items()))
        super().__init__(f"all {len(self.errors)} samples failed: {summary}")
