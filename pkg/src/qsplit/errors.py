"""Exception hierarchy shared by all modules."""


class QSplitError(Exception):
    """Base class. ``code`` names the failure kind."""

    code = "QSplitError"

    def __init__(self, msg="", **detail):
        super().__init__(msg or self.code)
        self.detail = detail


def _kind(name):
    return type(name, (QSplitError,), {"code": name})


NotHermitian = _kind("NotHermitian")
NonSquare = _kind("NonSquare")
NotPositive = _kind("NotPositive")
ShapeMismatch = _kind("ShapeMismatch")
ObjectMismatch = _kind("ObjectMismatch")
CategoryMismatch = _kind("CategoryMismatch")
NotFaithful = _kind("NotFaithful")
NotNatural = _kind("NotNatural")
NotIsomorphic = _kind("NotIsomorphic")
NotUnitary = _kind("NotUnitary")
LevelOutOfRange = _kind("LevelOutOfRange")
NoSolution = _kind("NoSolution")
ExchangeViolation = _kind("ExchangeViolation")
NeverStable = _kind("NeverStable")
NotSeparable = _kind("NotSeparable")
DimensionMismatch = _kind("DimensionMismatch")
NotAlgebra = _kind("NotAlgebra")
AlgebraMismatch = _kind("AlgebraMismatch")
NotUnital = _kind("NotUnital")
BadBasis = _kind("BadBasis")
NonCommutingSquare = _kind("NonCommutingSquare")
MissingSimple = _kind("MissingSimple")
SquareSolveFailure = _kind("SquareSolveFailure")
ParseError = _kind("ParseError")
ValidationError = _kind("ValidationError")
ParameterOutOfRange = _kind("ParameterOutOfRange")
FunctorMismatch = _kind("FunctorMismatch")
StructuralMismatch = _kind("StructuralMismatch")
AxiomFailure = _kind("AxiomFailure")
