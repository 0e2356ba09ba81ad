"""Exception hierarchy.

Two roots matter for the command line: ``InputError`` (bad files, bad
syntax; exit code 2) and ``AnalysisError`` (the geometry does not satisfy a
precondition; exit code 3).
"""


class FrontalError(Exception):
    pass


class InputError(FrontalError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class AnalysisError(FrontalError):
    pass


# jet kernel
class JetMismatch(AnalysisError):
    pass


class OrderExceeded(AnalysisError):
    pass


class DivisionByNonUnit(AnalysisError):
    pass


class NotDivisible(AnalysisError):
    pass


class DomainError(AnalysisError):
    pass


# singular points
class NormalRequired(AnalysisError):
    pass


class DegenerateSingularSet(AnalysisError):
    pass


class SeedNotSingular(AnalysisError):
    pass


class TotallyDegenerate(AnalysisError):
    pass


class NotSingular(AnalysisError):
    pass


class InternalInconsistency(AnalysisError):
    pass


# normal forms and invariants
class NotSecondKind(AnalysisError):
    pass


class NotKthKind(AnalysisError):
    pass


class WrongInputForm(AnalysisError):
    pass


class NotNormalized(AnalysisError):
    pass


class WrongKind(AnalysisError):
    pass


# binary differential equations
class NotFoldedType(AnalysisError):
    pass


class LimitingNormalCurvatureZero(AnalysisError):
    pass
