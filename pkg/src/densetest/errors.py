"""Exception types shared by every module."""


class DensetestError(Exception):
    pass


class NotPrime(DensetestError, ValueError):
    pass


class NotIrreducible(DensetestError, ValueError):
    pass


class DivisionByZero(DensetestError, ZeroDivisionError):
    pass


class LevelMismatch(DensetestError, ValueError):
    pass


class IndexOutOfRange(DensetestError, IndexError):
    pass


class Exhausted(DensetestError, RuntimeError):
    pass


class InvalidEpsilon(DensetestError, ValueError):
    pass


class InvalidEpsVector(DensetestError, ValueError):
    pass


class ClassMismatch(DensetestError, ValueError):
    pass


class MalformedInput(DensetestError, ValueError):
    def __init__(self, message: str, offset: int | None = None, path: str | None = None):
        self.offset = offset
        self.path = path
        where = []
        if offset is not None:
            where.append(f"offset {offset}")
        if path:
            where.append(f"at {path}")
        super().__init__(message + (f" ({', '.join(where)})" if where else ""))


class Unconstructible(DensetestError, ValueError):
    """A requested tester cannot exist or cannot be built by the chosen route."""

    def __init__(self, reason: str, detail: str = "", citation: str = ""):
        self.reason = reason
        self.detail = detail
        self.citation = citation
        msg = reason if not detail else f"{reason}: {detail}"
        super().__init__(msg)


class SearchExhausted(DensetestError, RuntimeError):
    pass


class BudgetExceeded(DensetestError, RuntimeError):
    pass


class HypothesisViolated(DensetestError, ValueError):
    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(f"hypothesis violated: {condition}")


class OutOfRange(DensetestError, ValueError):
    pass
