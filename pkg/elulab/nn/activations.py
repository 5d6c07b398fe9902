import logging

import numpy as np

from elulab.nn import errors as e

log = logging.getLogger("elulab")
log.trace("activations.py")

DEFAULT_ALPHAS = {
    "elu": 1.0,
    "lrelu": 0.1,
}

# The four kinds under comparison, plus the identity used by linear output layers
KINDS = ["elu", "relu", "lrelu", "srelu"]
OUTPUT_KINDS = ["linear"]

class activation_kind:
    """One activation function and its alpha (ELU, LReLU only)

    Named on the command line and in network files as "elu", "relu",
    "lrelu", "srelu" (or "linear") with an optional ":alpha" suffix,
    e.g. "elu:1.0" or "lrelu:0.1"
    """

    def __init__(self, name, alpha=None):
        if name not in KINDS and name not in OUTPUT_KINDS:
            raise e.ConfigError(f"unknown activation '{name}'")
        if name in DEFAULT_ALPHAS:
            if alpha is None:
                alpha = DEFAULT_ALPHAS[name]
            alpha = float(alpha)
            if not np.isfinite(alpha):
                raise e.ConfigError(f"{name} alpha must be finite, got {alpha}")
            if name == "elu" and not alpha > 0:
                raise e.ConfigError(f"ELU alpha must be > 0, got {alpha}")
            if name == "lrelu" and not 0 < alpha < 1:
                raise e.ConfigError(f"LReLU alpha must be in (0, 1), got {alpha}")
        elif alpha is not None:
            raise e.ConfigError(f"activation '{name}' takes no alpha")
        self.name = name
        self.alpha = alpha

    @staticmethod
    def parse(text, alpha=None):
        """Build from "name[:alpha]"; an explicit alpha argument wins over the suffix"""
        name, sep, suffix = text.strip().lower().partition(":")
        if sep:
            try:
                suffix_alpha = float(suffix)
            except ValueError:
                raise e.ConfigError(f"invalid alpha in activation '{text}'")
            if alpha is None:
                alpha = suffix_alpha
        return activation_kind(name, alpha)

    @property
    def tag(self):
        if self.alpha is None:
            return self.name
        return f"{self.name}:{self.alpha!r}"

    def __eq__(self, other):
        return isinstance(other, activation_kind) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"activation_kind({self.tag})"

    def __str__(self):
        return self.tag

def _check_finite(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise e.DomainError("activation argument is not finite")
    return x

def _result(x, out):
    # Scalars in, Python floats out
    if np.ndim(x) == 0:
        return float(out)
    return out

def forward(kind, x):
    """Apply the activation elementwise

    ELU: x if x > 0 else alpha (exp(x) - 1); ReLU: max(0, x);
    LReLU: max(alpha x, x); SReLU: max(-1, x)
    """
    x = _check_finite(x)
    if kind.name == "elu":
        # expm1 only sees the non-positive part, no overflow for large x
        out = np.where(x > 0, x, kind.alpha * np.expm1(np.minimum(x, 0.0)))
    elif kind.name == "relu":
        out = np.maximum(0.0, x)
    elif kind.name == "lrelu":
        out = np.maximum(kind.alpha * x, x)
    elif kind.name == "srelu":
        out = np.maximum(-1.0, x)
    else:
        out = x.copy()
    return _result(x, out)

def derivative(kind, x):
    """Derivative of forward(), elementwise

    At a kink (0, or -1 for SReLU) the left-branch value is returned.
    For ELU the negative branch is computed as f(x) + alpha so that the
    identity f'(x) = f(x) + alpha holds exactly.
    """
    x = _check_finite(x)
    if kind.name == "elu":
        f = kind.alpha * np.expm1(np.minimum(x, 0.0))
        out = np.where(x > 0, 1.0, f + kind.alpha)
    elif kind.name == "relu":
        out = np.where(x > 0, 1.0, 0.0)
    elif kind.name == "lrelu":
        out = np.where(x > 0, 1.0, kind.alpha)
    elif kind.name == "srelu":
        out = np.where(x > -1.0, 1.0, 0.0)
    else:
        out = np.ones_like(x)
    return _result(x, out)

def saturation_limit(kind):
    """Value the activation tends to for large negative inputs, None if unbounded"""
    if kind.name == "elu":
        return -kind.alpha
    if kind.name == "srelu":
        return -1.0
    if kind.name == "relu":
        return 0.0
    return None
