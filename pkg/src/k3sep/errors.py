"""Exception types shared across the package."""


class K3SepError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(K3SepError, ValueError):
    pass


class DegreeUnderflow(K3SepError, ValueError):
    pass


class DegreeTooLow(K3SepError, ValueError):
    pass


class DegreeMismatch(K3SepError, ValueError):
    pass


class SingularSurface(K3SepError):
    """The Jacobian ideal of the quartic does not contain every degree-12 form."""

    def __init__(self, message, monomial=None):
        super().__init__(message)
        self.monomial = monomial


class PrecisionTooLow(K3SepError):
    """A certified quantity could not be separated from zero at this precision."""

    def __init__(self, message, precision=None):
        super().__init__(message)
        self.precision = precision


# lattice validation
class LatticeError(K3SepError, ValueError):
    pass


class NotSymmetric(LatticeError):
    pass


class NotEven(LatticeError):
    pass


class NotUnimodular(LatticeError):
    pass


class WrongSignature(LatticeError):
    pass


class WrongHSquare(LatticeError):
    pass


class ShapeMismatch(K3SepError, ValueError):
    pass


class InvalidIndex(K3SepError, ValueError):
    pass


class LedgerInconsistency(K3SepError):
    pass


class DivisibilityViolation(K3SepError):
    pass


class ChainViolation(K3SepError, ValueError):
    pass


class OmegaConstraintViolated(K3SepError):
    """One of the period-domain conditions failed on ingested period data.

    ``which`` is one of ``"h-pairing"``, ``"isotropy"``, ``"positivity"``.
    """

    def __init__(self, which, message=None):
        super().__init__(message or f"period vector violates the {which} constraint")
        self.which = which


class ParseError(K3SepError, ValueError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
