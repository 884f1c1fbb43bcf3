"""Exception and warning types shared across the package."""


class HyltlError(Exception):
    """Base class for all errors raised by this package."""

    code = "E_GENERIC"


class ParseError(HyltlError):
    """Syntax error in a formula or model text, with source position."""

    code = "E_PARSE"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}" if line else message)


class ModelError(HyltlError):
    """Ill-formed automaton or model file (undeclared names, partial maps)."""

    code = "E_MODEL"


class ComplementError(HyltlError):
    """A negated flow atom has no usable complement constraint."""

    code = "E_COMPLEMENT"


class UnsupportedDynamicsError(HyltlError):
    """Location dynamics outside the affine/rectangular fragment."""

    code = "E_DYNAMICS"


class ExportError(HyltlError):
    """Model cannot be exported (e.g. nonlinear constraints)."""

    code = "E_EXPORT"


class TraceError(HyltlError):
    """Ill-formed trace input or failed trace generation."""

    code = "E_TRACE"


class ComplementStrengtheningWarning(UserWarning):
    """NNF rewrote a negated flow atom to its pointwise complement.

    Trajectory-level negation ("some sample violates c") is weaker than the
    complement atom ("every sample satisfies the complement"); verdicts on
    trajectories straddling the constraint boundary may differ.
    """


class VariableRenamedWarning(UserWarning):
    """An auxiliary variable collided with a model variable and was renamed."""
