"""Exception types shared across the package."""


class InvalidFrequencyError(ValueError):
    """A frequency lies outside the open interval (0, pi) rad/sample."""


class DegenerateBasisError(ValueError):
    """A basis column has (numerically) zero norm and cannot be normalised."""


class IllConditionedError(RuntimeError):
    """The normal equations are too ill-conditioned for a direct solve."""

    def __init__(self, condition_estimate: float):
        self.condition_estimate = condition_estimate
        super().__init__(
            f"normal matrix condition estimate {condition_estimate:.3e} exceeds limit"
        )


class SolverDivergedError(RuntimeError):
    """An iterative solve increased the residual past the divergence guard."""


class UndefinedMetricError(ValueError):
    """A metric has no value (e.g. no matched estimate/truth pairs)."""


class WavParseError(ValueError):
    """A WAV file's container structure is malformed."""


class UnsupportedWavError(ValueError):
    """A WAV file is well-formed but uses an unsupported codec or layout."""


class TrackParseError(ValueError):
    """A sinusoid-track CSV row cannot be parsed; carries the line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
