"""Exception hierarchy shared by every stage of the pipeline."""


class EpispecError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EpispecError, ValueError):
    def __init__(self, path, line, text):
        self.path = str(path)
        self.line = line
        self.text = text
        super().__init__(f"{self.path}:{line}: cannot parse sample {text!r}")


class EmptyFileError(EpispecError, ValueError):
    pass


class MixedSamplingRateError(EpispecError, ValueError):
    pass


class InvalidParametersError(EpispecError, ValueError):
    pass


class ConvergenceFailure(EpispecError, RuntimeError):
    pass


class LengthMismatchError(EpispecError, ValueError):
    pass


class InvalidHopError(EpispecError, ValueError):
    pass


class EmptyBandError(EpispecError, ValueError):
    pass


class FeatureError(EpispecError, ValueError):
    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"feature {name!r} is not finite ({value!r})")


class SingularCovarianceError(EpispecError, ArithmeticError):
    pass


class DimensionMismatchError(EpispecError, ValueError):
    pass


class TooFewClassesError(EpispecError, ValueError):
    pass


class InvalidKError(EpispecError, ValueError):
    pass


class UnknownLabelError(EpispecError, ValueError):
    pass


class UndefinedMetricError(EpispecError, ArithmeticError):
    pass


class SampleSizeError(EpispecError, ValueError):
    pass


class TooFewGroupsError(EpispecError, ValueError):
    pass


class ConfigError(EpispecError, ValueError):
    pass
