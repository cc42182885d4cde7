"""Exception hierarchy shared by all anosov_lab modules."""


class AnosovLabError(Exception):
    """Base class for all errors raised by this package."""


# --- linear algebra layer ---

class SingularInput(AnosovLabError):
    """Matrix is numerically singular (smallest singular value underflows)."""


class DimensionMismatch(AnosovLabError):
    """Operands live in different ambient dimensions."""


class IndexOutOfRange(AnosovLabError):
    """Singular-value / Grassmannian index outside [1, d-1]."""


class NoGap(AnosovLabError):
    """sigma_p ~ sigma_{p+1}: the requested Cartan attractor is not well defined."""


class RankOverflow(AnosovLabError):
    """Total rank of summands exceeds the ambient dimension."""


# --- word / automaton layer ---

class UnknownLetter(AnosovLabError):
    """Letter index outside the symmetric alphabet."""


class ParseError(AnosovLabError):
    """Malformed input text; carries a line number when available."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(AnosovLabError):
    """Structurally valid input that violates a semantic constraint."""


# --- representation / estimator layer ---

class BallTooLarge(AnosovLabError):
    """Requested word ball exceeds the configured enumeration budget."""


class NotCertified(AnosovLabError):
    """Operation requires a (passing) gap certificate that was not supplied."""


class NoGapAlongRay(AnosovLabError):
    """A prefix of the ray has no singular-value gap at the requested index."""


class DegenerateTriple(AnosovLabError):
    """Boundary rays are not sufficiently separated."""


class DegenerateAxes(AnosovLabError):
    """Fixed-point sets of the two ping-pong generators coincide."""


class NotTransverse(AnosovLabError):
    """Line meets the projection center; stereographic image undefined."""


class EmptyShadow(AnosovLabError):
    """No measure atoms fall inside the shadow set at this truncation."""


class EmptyIntersection(AnosovLabError):
    """Subspace intersection has unexpected rank."""

    def __init__(self, message, ranks=None):
        self.ranks = ranks
        if ranks is not None:
            message = f"{message} (ranks: {ranks})"
        super().__init__(message)


class WindowTooShort(AnosovLabError):
    """Too few usable bins or radii for a regression window."""


class ScaleRangeEmpty(AnosovLabError):
    """Point position errors are too large for the requested net scales."""


class NotAnSl2Module(AnosovLabError):
    """Weight multiset cannot be peeled into irreducible weight strings."""
