"""Exception hierarchy shared by every GKM module.

Two families matter to callers:
- InputError: the input could not be read or is structurally broken (CLI exit 2)
- DomainError: the input was read but violates a mathematical requirement (CLI exit 1)
"""

from typing import Any, Optional


class GkmError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GkmError):
    """Unreadable, unparsable or structurally malformed input."""


class DomainError(GkmError):
    """Input violates an axiom, precondition or invariant."""


class Unreachable(GkmError):
    """Internal invariant broken; indicates a bug rather than bad input."""


# ===== INPUT ERRORS =====

class GraphParseError(InputError):
    """Interchange file is not valid JSON or does not match the schema."""


class MalformedGraph(InputError):
    """Dangling endpoints, rank mismatches, self-loops, proportional parallel edges."""


# ===== DOMAIN ERRORS =====

class ZeroForm(DomainError):
    """A linear form used as a divisor or axial value is zero."""


class NonGenericDirection(DomainError):
    """Some axial value vanishes on the chosen direction."""

    def __init__(self, message: str, edge: Optional[Any] = None):
        super().__init__(message)
        self.edge = edge


class InvalidGraph(DomainError):
    """Graph failed validation; carries the report."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class InvalidFiber(DomainError):
    """Fiber Poincare data is unusable (b_0 = 0 or negative entries)."""


class InsufficientDepth(DomainError):
    """A convolution asked for degrees beyond the solved range."""


class InvalidParams(DomainError):
    """Builder parameters out of range."""


class NotThreeIndependent(DomainError):
    """Connection requested on a star that is not even pairwise independent."""

    def __init__(self, message: str, vertex: Optional[str] = None):
        super().__init__(message)
        self.vertex = vertex


class AmbiguousMatch(DomainError):
    """More than one edge of star(q) is congruent to e' modulo alpha_e."""

    def __init__(self, message: str, edge: Optional[Any] = None, partner: Optional[Any] = None):
        super().__init__(message)
        self.edge = edge
        self.partner = partner


class NoMatch(DomainError):
    """No edge of star(q) is congruent to e' modulo alpha_e, or the map is not bijective."""

    def __init__(self, message: str, edge: Optional[Any] = None, partner: Optional[Any] = None):
        super().__init__(message)
        self.edge = edge
        self.partner = partner


class MissingChernData(DomainError):
    """Lengths or chern labels absent on some edge."""


class InvalidGeometry(DomainError):
    """Edge geometry breaks a_e > 0, c_(reversed e) = -c_e or dimension agreement."""


class BrokenPath(DomainError):
    """Consecutive edges of a path do not chain, or a cycle is not closed."""
