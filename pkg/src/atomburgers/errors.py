"""Exception types raised across the package."""


class AtomBurgersError(Exception):
    """Base class for all package errors."""


class EmptyWindow(AtomBurgersError, ValueError):
    """A time window with zero or negative length."""


class DegenerateField(AtomBurgersError, ValueError):
    """Forcing data that violates positivity or distinct-time assumptions."""


class NoRegeneration(AtomBurgersError):
    """No small-noise zone exists early enough in the forcing window."""


class JunctionMismatch(AtomBurgersError, ValueError):
    """Two paths do not meet on the circle at the junction time."""


class TooLarge(AtomBurgersError, ValueError):
    """Input exceeds what exhaustive enumeration can handle."""


class WindingAnomaly(AtomBurgersError):
    """Winding gap between extreme minimizers is not 0 or 1."""


class CountViolation(AtomBurgersError):
    """Number of global shocks at a time is not 1 or 2."""


class LostShock(AtomBurgersError):
    """A tracked shock has no profile breakpoint inside the continuity window."""


class RangeTooWide(AtomBurgersError, ValueError):
    """A parameter sweep would exceed its evaluation budget."""


class ZeroJump(AtomBurgersError, ZeroDivisionError):
    """Class-jump difference vanished where a positive value was expected."""
