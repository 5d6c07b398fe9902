import logging

log = logging.getLogger("elulab")
log.trace("errors.py")

class ElulabError(Exception):
    """Base class of every error raised by the core logic"""

class ShapeError(ElulabError, ValueError):
    def __init__(self, message, *shapes):
        self.shapes = shapes
        if shapes:
            message = "%s (shapes: %s)" % (message, ", ".join(str(tuple(s)) for s in shapes))
        super(ShapeError, self).__init__(message)

class SingularMatrixError(ElulabError, ArithmeticError):
    def __init__(self, pivot, magnitude=0.0):
        self.pivot = pivot
        self.magnitude = magnitude
        super(SingularMatrixError, self).__init__(
            "matrix is singular at pivot %d (|pivot| = %.3g)" % (pivot, magnitude)
        )

class NotPositiveDefiniteError(ElulabError, ArithmeticError):
    pass

class DomainError(ElulabError, ValueError):
    pass

class ConfigError(ElulabError, ValueError):
    pass

class DivergenceError(ElulabError, ArithmeticError):
    """Non-finite gradient, weight or net input during training

    epoch and batch are filled in by the training loop when it re-raises,
    batch stays None when the post-epoch evaluation diverges
    """

    def __init__(self, layer, epoch=None, batch=None, what="gradient"):
        self.layer = layer
        self.what = what
        self.epoch = epoch
        self.batch = batch
        super(DivergenceError, self).__init__(self._message())

    def _message(self):
        msg = "non-finite %s in layer %d" % (self.what, self.layer)
        if self.epoch is not None and self.batch is not None:
            msg += " (epoch %d, batch %d)" % (self.epoch, self.batch)
        elif self.epoch is not None:
            msg += " (epoch %d, evaluation)" % self.epoch
        return msg

    def at(self, epoch, batch):
        self.epoch = epoch
        self.batch = batch
        self.args = (self._message(),)
        return self

    def __reduce__(self):
        return (DivergenceError, (self.layer, self.epoch, self.batch, self.what))

class DegenerateFisherError(ElulabError, ArithmeticError):
    pass

class MomentConsistencyError(ElulabError, ValueError):
    pass

class IdentityError(ElulabError, ArithmeticError):
    """Two algebraically equal expressions disagree beyond tolerance"""

    def __init__(self, name, deviation, tolerance):
        self.name = name
        self.deviation = deviation
        self.tolerance = tolerance
        super(IdentityError, self).__init__(
            "%s: deviation %.3g exceeds %.1g" % (name, deviation, tolerance)
        )

class FormatError(ElulabError, ValueError):
    def __init__(self, message, observed=None):
        self.observed = observed
        super(FormatError, self).__init__(message)

class LengthError(ElulabError, ValueError):
    pass
