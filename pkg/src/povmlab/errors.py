"""Exception hierarchy.

Validation failures raised while constructing domain objects derive from
:class:`InvariantViolation`; failures of a numerical self-check derive from
:class:`VerificationError`. Both derive from :class:`PovmLabError`.
"""


class PovmLabError(Exception):
    """Base class for every error raised by povmlab."""


class InvariantViolation(PovmLabError, ValueError):
    """A domain object failed one of its construction invariants."""

    #: short invariant name reported by the CLI (defaults to the class name)
    invariant = None

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    @property
    def name(self):
        return self.invariant or type(self).__name__


class SchemaError(PovmLabError, ValueError):
    """A JSON document does not match the wire schema."""

    def __init__(self, message, path=()):
        self.path = tuple(path)
        where = "/".join(str(p) for p in self.path) or "<root>"
        super().__init__(f"{where}: {message}")


# matrix-level
class NotPsd(InvariantViolation):
    pass


class NotHermitian(NotPsd):
    pass


class SpectrumOutsideDomain(InvariantViolation):
    def __init__(self, message, eigenvalue=None, **details):
        super().__init__(message, eigenvalue=eigenvalue, **details)
        self.eigenvalue = eigenvalue


class DimensionMismatch(InvariantViolation):
    pass


class NotUnitary(InvariantViolation):
    pass


# measurement model
class EffectInvalid(InvariantViolation):
    pass


class SumNotIdentity(InvariantViolation):
    def __init__(self, message, deviation=None, **details):
        super().__init__(message, deviation=deviation, **details)
        self.deviation = deviation


class DuplicatePoint(InvariantViolation):
    pass


class ZeroEffect(InvariantViolation):
    pass


class StateInvalid(InvariantViolation):
    pass


class WeightsInvalid(InvariantViolation):
    pass


class MissingValue(InvariantViolation, KeyError):
    def __str__(self):
        return Exception.__str__(self)


# measure calculus
class NotAbsolutelyContinuous(InvariantViolation):
    pass


class GridTooCoarse(InvariantViolation):
    pass


class NormalizationSingular(InvariantViolation):
    pass


# convex geometry / channels
class CoefficientsInvalid(InvariantViolation):
    pass


class NotUnital(InvariantViolation):
    pass


class VerificationError(PovmLabError, ArithmeticError):
    """A computed result failed its own post-condition check."""


class ReconstructionFailed(VerificationError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DepthExceeded(VerificationError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateWitness(VerificationError):
    pass
