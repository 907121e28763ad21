"""Exceptions raised when numerical residuals exceed their certified bounds."""


class DiagonalizationError(RuntimeError):
    """Bogoliubov coefficient blocks failed their orthogonality residual check."""


class GammaResidualError(RuntimeError):
    """A correlation matrix violated its reality/antisymmetry structure."""


class DegenerateGroundStateError(RuntimeError):
    """The even-parity ground state is degenerate within tolerance."""
