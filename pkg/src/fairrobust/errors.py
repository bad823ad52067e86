"""Exception types shared across the package."""


class FairRobustError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(FairRobustError):
    """A column-role schema does not match the file it describes."""


class DataFormatError(FairRobustError):
    """A cell or row in an input file cannot be parsed."""


class EmptyDatasetError(FairRobustError):
    """An input file or split produced no usable rows."""


class DimensionError(FairRobustError):
    """Vector or matrix dimensions do not line up."""


class DegenerateMassError(FairRobustError):
    """A group (or group/label cell) carries no weight, so a rate is undefined."""


class ConfigurationError(FairRobustError):
    """Parameters are inconsistent or describe an empty search space."""


class NumericError(FairRobustError):
    """A numeric routine produced non-finite values."""
