"""
Exception hierarchy shared by the sieve modules.

Every failure raised on purpose by the library derives from SieveError so the
CLI can map it onto an exit code.
"""

from typing import Optional


class SieveError(Exception):
    """Base class for all library errors"""
    pass


class LawParseError(SieveError, ValueError):
    """Raised when a W-law specification string cannot be parsed"""
    pass


class LatticeLawError(SieveError, ValueError):
    """Raised when a lattice law (e.g. a Dirac mass) is requested without override"""
    pass


class QuadratureError(SieveError):
    """Raised when adaptive quadrature fails to reach its tolerance"""

    def __init__(self, message: str, achieved: Optional[float] = None):
        super().__init__(message if achieved is None else f"{message} (achieved error {achieved:.3g})")
        self.achieved = achieved


class CapabilityError(SieveError):
    """Raised when an operation does not apply to the given law or regime"""
    pass


class PrecisionError(SieveError):
    """Raised when a formula is evaluated outside its precision regime"""
    pass


class InternalConsistencyError(SieveError):
    """Raised when a computed table fails its own validation"""
    pass


class GofError(SieveError):
    """Raised when a goodness-of-fit test is misused"""
    pass


class ScenarioError(SieveError, ValueError):
    """Raised when a scenario file is malformed"""
    pass
