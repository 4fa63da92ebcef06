"""Exception types shared across the package."""


class SmoothieError(Exception):
    """Base class for all package-specific errors."""


# --- data loading / splitting -------------------------------------------

class MissingLabelColumn(SmoothieError):
    pass


class NonNumericCell(SmoothieError):
    def __init__(self, row: int, col: int, value: str):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"non-numeric cell at data row {row}, column {col}: {value!r}")


class EmptyFile(SmoothieError):
    pass


class DegenerateSplit(SmoothieError):
    pass


# --- preprocessing -------------------------------------------------------

class TooFewMinority(SmoothieError):
    pass


class NoMinority(SmoothieError):
    pass


# --- learners ------------------------------------------------------------

class NumericOverflow(SmoothieError):
    """Loss became non-finite during training; the trial is failed, not fatal."""


class SingularCovariance(SmoothieError):
    pass


class InsufficientClassData(SmoothieError):
    pass


# --- smoothness ----------------------------------------------------------

class ZeroWeightNorm(SmoothieError):
    """Probe produced a zero output-layer weight norm; trial is degenerate."""


class NonFinite(SmoothieError):
    pass


# --- search --------------------------------------------------------------

class SpaceTooSmall(SmoothieError):
    pass


class AllProbesFailed(SmoothieError):
    pass


class InvalidGeometry(SmoothieError):
    pass


class ExactCoverageImpossible(SmoothieError):
    pass


# --- configuration -------------------------------------------------------

class ConfigError(SmoothieError):
    """Experiment config failed validation; message names the offending key."""
