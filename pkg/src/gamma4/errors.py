"""Exception hierarchy.

Every error carries an ``exit_code`` used by the CLI: 2 for invalid input,
3 when a configured computational ceiling is hit, 1 for internal contract
violations.
"""


class Gamma4Error(Exception):
    exit_code = 1
    kind = "internal"


class ValidationError(Gamma4Error, ValueError):
    exit_code = 2
    kind = "validation"


class CeilingError(Gamma4Error):
    exit_code = 3
    kind = "ceiling"


class InternalError(Gamma4Error):
    """A mathematical contract that must hold was violated."""


# arith
class NoInverse(ValidationError):
    pass


class NoDirichletClass(ValidationError):
    pass


class SearchExhausted(CeilingError):
    pass


class FactorizationTooHard(CeilingError):
    pass


# torusknot
class NotAKnot(ValidationError):
    pass


# floer
class NotStaircase(ValidationError):
    pass


class NotAComplex(ValidationError):
    pass


class StructureViolation(Gamma4Error):
    pass


class ConstantTermPlusOne(ValidationError):
    pass


class NotCovered(ValidationError):
    pass


class ComplexFormatError(ValidationError):
    pass


# linkform
class NeedsEvenP(ValidationError):
    pass


class MatrixTooLarge(CeilingError):
    pass


# topobstruct
class Inapplicable(ValidationError):
    pass
