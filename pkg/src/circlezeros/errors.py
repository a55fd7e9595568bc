"""Exception and warning types raised across the package."""


class CircleZerosError(Exception):
    """Base class for all package errors."""


class SymmetryViolation(CircleZerosError, ValueError):
    def __init__(self, index, deviation):
        self.index = index
        self.deviation = deviation
        super().__init__(
            f"a_(N-{index}) != a_N * conj(a_{index}) (off by {deviation:.3g})"
        )


class UnitModulusViolation(CircleZerosError, ValueError):
    def __init__(self, modulus):
        self.modulus = modulus
        super().__init__(f"|a_N| = {modulus!r}, expected 1")


class ConvergenceFailure(CircleZerosError, RuntimeError):
    """Root finding did not produce a usable result.

    ``report`` carries whatever partial state was reached.
    """

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class UnpairedRoot(CircleZerosError, ValueError):
    def __init__(self, root, distance):
        self.root = root
        self.distance = distance
        super().__init__(
            f"off-circle root {root!r} has no reflected partner "
            f"(nearest at distance {distance:.3g})"
        )


class ArityMismatch(CircleZerosError, ValueError):
    pass


class DegenerateInput(CircleZerosError, ValueError):
    pass


class AttemptBudgetExhausted(CircleZerosError, RuntimeError):
    """Rejection sampling ran out of attempts; ``batch`` holds what was accepted."""

    def __init__(self, batch):
        self.batch = batch
        super().__init__(
            f"accepted {batch.accepted} samples in {batch.attempted} attempts "
            "before the attempt budget ran out"
        )


class EigensolveFailure(CircleZerosError, RuntimeError):
    pass


class InsufficientData(CircleZerosError, ValueError):
    pass


class NotPositiveDefinite(CircleZerosError, ValueError):
    pass


class DomainError(CircleZerosError, ValueError):
    pass


class PoleProximity(CircleZerosError, ValueError):
    pass


class ConfigInvalid(CircleZerosError, ValueError):
    pass


class FormatError(CircleZerosError, ValueError):
    pass


class EmptyBins(UserWarning):
    """Some histogram bins received no counts."""


class StepTooCoarse(UserWarning):
    """Sign changes were found close together; zeros may have been missed."""
