"""Exception hierarchy.

Every error raised by the library derives from :class:`ContourForgeError`.
The CLI maps the four families below onto its exit codes:

* :class:`InputError`        -> 2 (parse and malformed-input errors)
* :class:`EvaluationError`   -> 3 (evaluation and lowering errors)
* :class:`ConditioningLimit` -> 5
"""


class ContourForgeError(Exception):
    pass


class InputError(ContourForgeError):
    """Malformed user input (expressions, contour specs, ladders)."""


class ExprSyntaxError(InputError):
    """Expression text does not match the grammar.

    ``position`` is the 1-based column of the offending character (one past
    the end of the text for premature end of input); ``expected`` is the set
    of token descriptions that would have been accepted there.
    """

    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = frozenset(expected)
        detail = f"{message} at offset {position}"
        if self.expected:
            detail += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class UnknownIdentifier(InputError):
    def __init__(self, name, position):
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier {name!r} at offset {position}")


class ArityError(InputError):
    def __init__(self, name, position, message=None):
        self.name = name
        self.position = position
        super().__init__(message or f"{name!r} takes exactly one argument (offset {position})")


class ContourSpecError(InputError):
    pass


class InvalidFamilyParams(InputError):
    pass


class ParameterOutOfRange(InputError):
    pass


class DomainMismatch(InputError):
    pass


class EndpointMismatch(InputError):
    pass


class EvaluationError(ContourForgeError):
    """Numeric evaluation failed.

    ``location`` is filled in by the quadrature layer with the segment index
    and path parameter where the failure happened.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{message} [{location}]"
        super().__init__(message)


class UnboundVariable(EvaluationError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name!r} is not bound")


class DivisionNearZero(EvaluationError):
    pass


class LoweringError(EvaluationError):
    pass


class RemovablePointOnPath(LoweringError):
    pass


class ConditioningLimit(ContourForgeError):
    """The requested check sits below what double precision can resolve."""

    def __init__(self, floor, limit, what=""):
        self.floor = floor
        self.limit = limit
        prefix = f"{what}: " if what else ""
        super().__init__(
            f"{prefix}conditioning floor {floor:.3e} exceeds the admissible limit {limit:.3e}"
        )
