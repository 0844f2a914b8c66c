"""Exception hierarchy shared by all modules."""


class EgoSignError(Exception):
    """Base class for library errors."""


class ValidationError(EgoSignError):
    """Malformed input data."""


class InvalidScene(ValidationError):
    pass


class DegenerateLine(ValidationError):
    """A boundary line whose points all share one y value."""


class CannotLocalize(EgoSignError):
    """All boundary lines lean the same way, so no ego lane can be found."""


class InvalidDescription(ValidationError):
    def __init__(self, violations):
        self.violations = list(violations)
        codes = ", ".join(v.code for v in self.violations)
        super().__init__(f"invalid description: {codes}")


class ParseError(ValidationError):
    """Text that does not follow the description grammar.

    ``offset`` is a byte offset into the UTF-8 encoded input.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += " (expected one of: " + ", ".join(repr(e) for e in self.expected) + ")"
        super().__init__(detail)


class BudgetExceeded(EgoSignError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"{count} arrangements exceed the budget of {cap}")


class EmptyInput(ValidationError):
    pass


class SlotConflict(EgoSignError):
    pass


class InconsistentLimits(EgoSignError):
    pass


class LengthMismatch(ValidationError):
    pass
