"""Exception types shared across the package."""


class ShapeError(ValueError):
    """An array argument has the wrong number of dimensions or incompatible sizes."""


class NumericalError(RuntimeError):
    """A matrix factorization failed or an input is numerically singular."""


class RankDeficiencyError(ValueError):
    """A requested rank exceeds what the data can support."""


class DegenerateLabelsError(ValueError):
    """A label vector does not contain every required class."""


class DataFormatError(ValueError):
    """A file on disk does not match the expected format."""
