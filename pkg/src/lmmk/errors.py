"""Exception and warning types shared across the toolkit."""


class LmmkError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(LmmkError):
    """Invalid configuration or hyperparameter value."""


class DataError(LmmkError):
    """Problem with user-supplied data files or label sets."""


class ParseError(DataError):
    """Malformed input file; the message names the file and row."""


class ShapeMismatch(DataError):
    """Array dimensions disagree with what the operation requires."""


class UnknownLabel(DataError):
    """A label was seen that is not part of the training vocabulary."""


class LengthMismatch(DataError):
    """Two sequences that must align have different lengths."""


class KernelError(LmmkError):
    """Problem constructing or validating kernel matrices."""


class AllZeroDistances(KernelError):
    """Every off-diagonal distance is zero; no bandwidth can be derived."""


class NonPositiveBandwidth(KernelError):
    """Gaussian bandwidth must be strictly positive."""


class NonPositiveDiagonal(KernelError):
    """Kernel normalization requires strictly positive diagonal entries."""


class DimensionMismatch(KernelError):
    """Weight vector length differs from the number of kernels."""


class NeighborhoodError(LmmkError):
    """Neighbor selection cannot proceed on this label set."""


class SingletonClass(NeighborhoodError):
    """Some class has exactly one member, so it has no same-label neighbor."""


class SingleClassDataset(NeighborhoodError):
    """All points share one label, so no impostor exists."""


class EmptyTripleSet(DataError):
    """No (anchor, target, impostor) triples; nothing to optimize."""


class SolverError(LmmkError):
    """Linear-program solver failure."""


class LPNotOptimal(SolverError):
    """The solver did not certify an optimal vertex."""


class LmmkWarning(UserWarning):
    """Base class for toolkit warnings."""


class KernelPSDWarning(LmmkWarning):
    """A supplied kernel matrix is noticeably indefinite."""


class AllZeroWeightsWarning(LmmkWarning):
    """Learned weights are all zero; prediction fell back to uniform weights."""


class UndersizedClassWarning(LmmkWarning):
    """A class has fewer than k+1 members; fewer targets were selected."""


class DegenerateKernelWarning(LmmkWarning):
    """A kernel was dropped or flagged during construction."""
