"""Exception hierarchy shared by all modules."""


class CMCNNError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CMCNNError, ValueError):
    pass


class DomainError(CMCNNError, ValueError):
    """A numeric argument lies outside the documented domain."""


class GenomeArityError(CMCNNError, ValueError):
    """Genome length does not match the architecture or is zero."""


class MutationPointError(CMCNNError, IndexError):
    pass


class CrossoverError(CMCNNError, ValueError):
    pass


class ShapeError(CMCNNError, ValueError):
    pass


class LabelError(CMCNNError, ValueError):
    pass


class DataError(CMCNNError, ValueError):
    pass


class FormatError(DataError):
    """A file on disk does not follow the expected binary or text layout."""


class PartitionError(DataError):
    pass


class MetricInputError(CMCNNError, ValueError):
    pass


class SearchSpaceTooLarge(CMCNNError, ValueError):
    """Raised instead of enumerating a genome space above the cap."""

    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"search space of {size} genomes exceeds cap {cap}")


class ReportingError(CMCNNError, ValueError):
    pass
