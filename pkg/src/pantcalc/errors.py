"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: HypothesisViolation -> 2, validation
errors -> 3, anything else -> 4.
"""


class PantcalcError(Exception):
    """Base class for all library errors."""


class ValidationError(PantcalcError):
    """Malformed or inconsistent input data (scene files, ids, domains)."""


class DomainError(ValidationError):
    """Numeric argument outside the mathematical domain of an operation."""


class InvalidFrameError(ValidationError):
    """Frame vectors are not unit, not orthogonal, or the point is not interior."""


class DegenerateSegmentError(ValidationError):
    """Segment endpoints coincide."""


class JointMismatchError(ValidationError):
    """Consecutive chain segments do not share a joint point."""


class DegenerateReductionError(ValidationError):
    """Reduced concatenation would join coincident endpoints."""


class AmbiguousFramingError(ValidationError):
    """Closest-normal projection is too small to define a framing."""


class NonLoxodromicError(PantcalcError):
    """Cycle holonomy is elliptic, parabolic or the identity."""


class HypothesisViolationError(PantcalcError):
    """A stated hypothesis of an estimate or construction fails.

    `clause` names the failing condition.
    """

    def __init__(self, clause: str, message: str = ""):
        self.clause = clause
        super().__init__(f"hypothesis violated [{clause}]" + (f": {message}" if message else ""))


class MixedSupportError(ValidationError):
    """Measure supported on more than one visual torus."""


class UnknownPantsError(ValidationError):
    """Pants id missing from the scene."""


class UnknownCurveError(ValidationError):
    """Curve id missing from the scene."""


class IncompleteSceneError(ValidationError):
    """Scene lacks data required by the operation."""


class NoMatchingError(PantcalcError):
    """No perfect unit-shearing matching; carries a Hall-violating witness."""

    def __init__(self, curve, witness, message: str = ""):
        self.curve = curve
        self.witness = witness
        super().__init__(message or f"no perfect matching over {curve}; Hall witness of size {len(witness)}")


class MalformedGluingError(ValidationError):
    """Gluing references cuff instances inconsistently."""


class IrreducibilityContradictionError(PantcalcError):
    """Component graph disconnected although the measure was flagged irreducible."""


class NotConnectedSceneError(PantcalcError):
    """No connecting panted surface exists in the scene."""


class NotACycleError(ValidationError):
    """Pants vector is not in the kernel of the attaching boundary map."""


class NotNullHomologousError(PantcalcError):
    """Sigma requested for a multicurve whose projected class is nonzero."""


class DegenerateTriangleError(ValidationError):
    """Triangle vertices are collinear or coincident."""


class InternalInconsistencyError(PantcalcError):
    """A condition that should be mathematically impossible was hit."""
