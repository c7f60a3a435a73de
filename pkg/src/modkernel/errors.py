"""Exception types shared across the package.

Every failure mode carries enough payload (index, magnitude, gap) for the
caller to act on it; nothing is ever silently clamped or NaN-propagated.
"""


class DomainError(ValueError):
    """Function argument outside its mathematical domain."""


class DimensionError(ValueError):
    """Matrix/vector dimensions do not conform."""


class NotPositiveDefinite(ArithmeticError):
    """Cholesky hit a non-positive pivot."""

    def __init__(self, index, pivot):
        self.index = index
        self.pivot = pivot
        super().__init__(f"matrix not positive definite: pivot {index} is {pivot}")


class SingularMatrix(ArithmeticError):
    """Inversion hit a pivot below the working-precision floor."""

    def __init__(self, index, magnitude):
        self.index = index
        self.magnitude = magnitude
        super().__init__(f"singular at pivot {index} (|pivot| = {magnitude})")


class NoConvergence(RuntimeError):
    """An iteration exhausted its sweep budget."""


class RegionNotOnGrid(ValueError):
    """A finite region boundary does not coincide with a grid node."""


class QuadratureNotConverged(RuntimeError):
    """Panel refinement exhausted without meeting the precision target."""

    def __init__(self, estimate, target):
        self.estimate = estimate
        self.target = target
        super().__init__(
            f"quadrature error estimate {estimate} exceeds target {target}"
        )


class ForbiddenSpectrum(RuntimeError):
    """An eigenvalue of B landed inside (or too close to) the band [-1, 1].

    The remedy is more precision (digits) or more resolution (cells),
    never clamping.
    """

    def __init__(self, index, eigenvalue, gap, hint=None):
        self.index = index
        self.eigenvalue = eigenvalue
        self.gap = gap
        super().__init__(
            f"eigenvalue {index} of B at {eigenvalue} has |lambda|-1 = {gap}; "
            + (hint or "raise digits and/or cells")
        )


class ProbeOutsideGrid(ValueError):
    """Gaussian probe mass extends outside the computational box."""


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 3)."""
