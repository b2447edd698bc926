"""
Exception types shared across the toolkit.

Every error raised by a public operation derives from CathoristicError, which is a
ValueError so callers that only guard against bad input keep working.
"""

from dataclasses import dataclass


class CathoristicError(ValueError):
    """Base class for all domain errors."""

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class FormulaSyntaxError(CathoristicError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")

    def to_dict(self):
        data = super().to_dict()
        data.update({"line": self.line, "column": self.column})
        return data


class DialectError(CathoristicError):
    def __init__(self, construct, dialect):
        self.construct = construct
        self.dialect = dialect
        super().__init__(f"'{construct}' is not allowed in the {dialect} dialect")


# Individual model violations, collected by validate_model.

@dataclass(frozen=True)
class Nondeterministic:
    state: str
    action: str

    def __str__(self):
        return f"Nondeterministic({self.state}, {self.action})"


@dataclass(frozen=True)
class Inadmissible:
    state: str
    action: str

    def __str__(self):
        return f"Inadmissible({self.state}, {self.action})"


@dataclass(frozen=True)
class MissingLabel:
    state: str

    def __str__(self):
        return f"MissingLabel({self.state})"


@dataclass(frozen=True)
class UnknownStart:
    state: str

    def __str__(self):
        return f"UnknownStart({self.state})"


@dataclass(frozen=True)
class UnknownState:
    state: str

    def __str__(self):
        return f"UnknownState({self.state})"


class ModelValidationError(CathoristicError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid model: " + ", ".join(str(v) for v in self.violations))

    def to_dict(self):
        data = super().to_dict()
        data["violations"] = [str(v) for v in self.violations]
        return data


class NondeterministicInputError(CathoristicError):
    pass


class NotATreeError(CathoristicError):
    pass


class OpenAlphabetError(CathoristicError):
    def __init__(self, operation):
        super().__init__(f"{operation} needs a closed alphabet (set CL_ALPHABET)")


class BottomUnsupportedError(CathoristicError):
    def __init__(self):
        super().__init__("the first-order translations have no falsity; remove F first")


class GuardsViolatedError(CathoristicError):
    pass


class SortMismatchError(CathoristicError):
    pass


class BlockedIsSatisfiedError(CathoristicError):
    pass


class InseparableError(CathoristicError):
    pass


class UnsatisfiableError(CathoristicError):
    pass


class PathNotFoundError(CathoristicError):
    def __init__(self, path):
        self.path = list(path)
        super().__init__(f"no state at path {'/'.join(self.path) or '<root>'}")


class DerivationError(CathoristicError):
    pass


class ProofCheckError(CathoristicError):
    """Raised by check_derivation(strict=True); carries the first failing node."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))
