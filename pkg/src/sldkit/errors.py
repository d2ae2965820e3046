"""Exception hierarchy. Every error carries a stable ``code`` (its class name)
so the service and CLI can surface it without string matching."""

from __future__ import annotations


class SldError(Exception):
    """Base class for all workbench errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- diagram graph ---------------------------------------------------------

class ModeUnavailable(SldError):
    """Component kind not allowed in the project's operation mode."""


class InvalidSpec(SldError):
    """Component parameters violate their invariants."""


class DanglingEndpoint(SldError):
    """A line endpoint does not resolve to a live connection port."""


class LineToLineConnection(SldError):
    """Lines may not terminate on other lines; join them through a bus."""


class NotConnectable(SldError):
    """Endpoint component owns no connection ports (meter, base marker)."""


class PortOccupied(SldError):
    """Indexed connection port already has a line attached."""


class UnknownComponent(SldError):
    pass


class BusBarConnected(SldError):
    """Bus-bars cannot be rotated while lines are attached."""


class OutOfBounds(SldError):
    """Target position outside the canvas."""


class LineNotCopyable(SldError):
    """Lines need two live endpoints and cannot be copied."""


class LineGeometryDerived(SldError):
    """Lines cannot be moved or rotated directly; they follow their endpoints."""


class NoCandidates(SldError):
    """No attachable component exists for a minimum-distance query."""


class InvalidRoute(SldError):
    """Degenerate or non-orthogonal route."""


# --- property strings ------------------------------------------------------

class MalformedMagnitude(SldError):
    pass


class UnknownUnit(SldError):
    pass


class UnknownQualifier(SldError):
    pass


class ArityMismatch(SldError):
    """Token count does not fit the property schema."""


# --- per-unit --------------------------------------------------------------

class MissingPUBase(SldError):
    pass


class MultiplePUBase(SldError):
    pass


class InconsistentBase(SldError):
    """A transformer loop implies two different voltage bases for one region."""


class UnreachedRegion(SldError):
    """Electrically disconnected region has no propagated base."""


class NonPositiveBase(SldError):
    pass


# --- power flow ------------------------------------------------------------

class NoSlackDesignated(SldError):
    pass


class IslandWithoutSlack(SldError):
    pass


class IndexOutOfRange(SldError):
    pass


class DimensionMismatch(SldError):
    pass


class SingularDiagonal(SldError):
    """Zero diagonal admittance blocks the Gauss-Seidel update."""


class SingularJacobian(SldError):
    pass


class Diverged(SldError):
    """Iteration error norm grew for three consecutive iterations."""

    def __init__(self, *args, trace=None):
        super().__init__(*args)
        self.trace = trace


# --- state estimation ------------------------------------------------------

class UnobservableSystem(SldError):
    """Gain matrix singular or measurement count below the state dimension."""


class OrderingViolation(SldError):
    """Result requested before the producing solve ran."""


# --- trace -----------------------------------------------------------------

class TraceClosed(SldError):
    pass


# --- persistence -----------------------------------------------------------

class IoFailure(SldError):
    pass


class ParseError(SldError):
    pass


class UnsupportedVersion(SldError):
    pass


class InvariantViolation(SldError):
    """File content would construct a network breaking model invariants."""
