"""Exception types shared across the solver stack."""


class AdmissibilityError(ValueError):
    """Parameters or data classes outside the admissible range of the solver."""


class TailError(ValueError):
    """An improper integral has a non-integrable power-law tail."""


class BoundaryError(RuntimeError):
    """A reconstructed field failed its boundary-condition identity."""


class ContractionError(RuntimeError):
    """Fixed-point iteration left the contraction regime."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class IterationError(RuntimeError):
    """Fixed-point iteration hit the step limit before converging."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
