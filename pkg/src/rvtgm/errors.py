"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation problems exit 2,
numerical failures exit 3, and I/O errors (plain ``OSError``) exit 4.
"""


class RvtError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RvtError):
    """Invalid input data, configuration, or violated interface invariant."""


class NumericalError(RvtError):
    """Numerical failure: degenerate spectra, non-convergent quadrature,
    indefinite correlation matrices, and similar."""
