"""Exception types raised by the solvers."""


class MuskatError(Exception):
    """Base class for solver errors."""


class SpecMismatch(MuskatError, ValueError):
    """Two fields live on different domains."""


class DiffeoViolation(MuskatError):
    """The straightening map is not a diffeomorphism on the grid."""

    def __init__(self, min_dz_rho, margin):
        self.min_dz_rho = float(min_dz_rho)
        self.margin = float(margin)
        super().__init__(
            f"min dz_rho = {self.min_dz_rho:.6g} <= margin {self.margin:.6g}"
        )


class NoConvergence(MuskatError):
    """An iteration hit its budget before meeting the tolerance."""

    def __init__(self, what, max_iter, last_residual):
        self.max_iter = int(max_iter)
        self.last_residual = float(last_residual)
        super().__init__(
            f"{what}: no convergence in {max_iter} iterations "
            f"(last step {last_residual:.3e})"
        )


class ContractionFailure(MuskatError):
    """Successive step norms grew for too many iterations in a row."""


class NonzeroMean(MuskatError, ValueError):
    """A zero-mode condition on the torus is violated."""


class CompatibilityViolation(MuskatError, ValueError):
    """Linear data fail the zero-mode compatibility condition."""


class ResidualTooLarge(MuskatError):
    """A post-solve residual check exceeded its tolerance."""


class BlowupDetected(MuskatError):
    """A perturbation norm grew past the stability-regime threshold."""


class VersionMismatch(MuskatError, ValueError):
    """A serialized field carries an unsupported format version."""
