"""
Exceptions raised by the screw_glide package.

Validation problems derive from ValueError so callers that only know the
standard library still catch them; solver halts derive from RuntimeError.
"""


class GlideFlowError(Exception):
    """Root of every error raised by screw_glide"""


class ValidationError(GlideFlowError, ValueError):
    """Invalid input: geometry, configurations or run configuration"""


class SpanDeficient(ValidationError):
    pass


class DuplicateDirection(ValidationError):
    pass


class ZeroForce(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class CombinatorialBlowup(ValidationError):
    pass


class NotOnAmbiguitySet(ValidationError):
    pass


class ConfigError(ValidationError):
    """Run configuration error, reported with the dotted field path"""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SolverHalt(GlideFlowError, RuntimeError):
    """A solver stopped before reaching the end time"""

    def __init__(self, message, step=None, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial


class SingularProximity(SolverHalt):
    pass


class StepTooLarge(SolverHalt):
    pass
