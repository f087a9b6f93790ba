"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-specific errors."""


class ShapeMismatch(ToolkitError):
    """Operands live in different algebras/modules or have wrong shapes."""


class NonUnimodular(ToolkitError):
    """A twist parameter is not on the unit circle within tolerance."""


class NotIsometry(ToolkitError):
    """A matrix expected to satisfy V*V = I fails the check."""


class NotAState(ToolkitError):
    """A functional fails the state invariants (Hermitian/PSD/unit trace)."""


class NotPSD(ToolkitError):
    """A Gram matrix has an eigenvalue below the negative tolerance."""


class NullSpaceNotInvariant(ToolkitError):
    """An operator leaks the GNS null space into the quotient."""

    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class NotInvariantState(ToolkitError):
    """The sesquilinear form is not contracted by the operator, which is
    inconsistent with an invariant state."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class FixedSpaceMismatch(ToolkitError):
    """fix(T) and fix(T*) disagree; T is numerically not a contraction."""


class NotRepresentation(ToolkitError):
    """A semigroup representation fails multiplicativity on sampled pairs."""


class PayloadInvalid(ToolkitError):
    """A variant payload does not match the variant's schema."""


class SequenceSpecError(PayloadInvalid):
    """A sequence mini-language string could not be parsed."""


class PreconditionFailed(ToolkitError):
    """A verify/pipeline precondition failed; carries the checker witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
