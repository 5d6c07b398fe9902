"""Minimal dense linear algebra on float64 numpy arrays

A Matrix is a 2-D C-ordered (row-major) float64 ndarray and a Vector is a
1-D float64 ndarray. They are the only numeric containers used by the rest
of the package. Inverses and solves go through our own partial-pivot
Gaussian elimination so the singular case fails deterministically with the
offending pivot index.
"""

import logging

import numpy as np

from elulab.nn import errors as e

log = logging.getLogger("elulab")
log.trace("linalg.py")

# Pivots smaller than this (in magnitude) are treated as zero
SINGULAR_PIVOT = 1e-12

def as_matrix(x, name="matrix"):
    """Validate and convert to a finite row-major float64 matrix

    :param x: anything np.asarray() accepts
    :param name: used in error messages
    :return: a C-contiguous float64 2-D array (a copy if a conversion was needed)
    """
    m = np.ascontiguousarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise e.ShapeError("%s must be 2-dimensional" % name, m.shape)
    if not np.all(np.isfinite(m)):
        raise e.DomainError("%s has non-finite entries" % name)
    return m

def as_vector(x, name="vector"):
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise e.ShapeError("%s must be 1-dimensional" % name, v.shape)
    if not np.all(np.isfinite(v)):
        raise e.DomainError("%s has non-finite entries" % name)
    return v

def identity(n):
    return np.eye(n, dtype=np.float64)

def outer(x, y):
    return np.outer(as_vector(x), as_vector(y))

def matmul(a, b):
    """Standard matrix product with shape checking

    :return: matrix of shape (a.rows, b.cols)
    """
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise e.ShapeError("matmul dimension mismatch", a.shape, b.shape)
    return a @ b

def _check_square(m, name="matrix"):
    if m.shape[0] != m.shape[1]:
        raise e.ShapeError("%s must be square" % name, m.shape)

def _eliminate(m, rhs):
    """Solve m x = rhs for every column of rhs by Gaussian elimination
    with partial pivoting followed by back substitution

    Both arguments are modified in place, rhs holds the solution at the end.
    """
    n = m.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        pivot = m[p, k]
        if abs(pivot) < SINGULAR_PIVOT:
            raise e.SingularMatrixError(k, abs(pivot))
        if p != k:
            m[[k, p]] = m[[p, k]]
            rhs[[k, p]] = rhs[[p, k]]
        if k + 1 < n:
            factors = m[k + 1:, k] / pivot
            m[k + 1:, k:] -= np.outer(factors, m[k, k:])
            rhs[k + 1:] -= np.outer(factors, rhs[k])

    for k in range(n - 1, -1, -1):
        rhs[k] -= m[k, k + 1:] @ rhs[k + 1:]
        rhs[k] /= m[k, k]
    return rhs

def solve(m, y):
    """Solve m x = y

    :param m: square matrix
    :param y: vector (n,) or matrix (n, k) of right-hand sides
    :return: x with the same shape as y
    """
    m = as_matrix(m)
    _check_square(m)
    y = np.array(y, dtype=np.float64)
    if y.shape[0] != m.shape[0]:
        raise e.ShapeError("solve dimension mismatch", m.shape, y.shape)
    rhs = y.reshape(m.shape[0], -1).copy()
    x = _eliminate(m.copy(), rhs)
    return x.reshape(y.shape)

def dense_inverse(m):
    """Inverse of a square matrix by partial-pivot Gaussian elimination

    :raises SingularMatrixError: a pivot smaller than SINGULAR_PIVOT was met
    """
    m = as_matrix(m)
    _check_square(m)
    log.debug("linalg.dense_inverse(%dx%d)" % m.shape)
    return _eliminate(m.copy(), identity(m.shape[0]))

def quadratic_form(x, m, y):
    """x^T m^-1 y, computed with a linear solve rather than an explicit inverse"""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    m = as_matrix(m)
    _check_square(m)
    if x.shape[0] != m.shape[0] or y.shape[0] != m.shape[0]:
        raise e.ShapeError("quadratic form dimension mismatch", x.shape, m.shape, y.shape)
    return float(x @ solve(m, y))

def ridge_epsilon(m):
    """Ridge added to rescue a singular solve: 1e-8 times the mean diagonal entry"""
    d = m.shape[0]
    eps = 1e-8 * float(np.trace(m)) / d
    if eps <= 0.0:
        # all-zero diagonal, the trace gives no scale
        eps = 1e-8
    return eps

def solve_with_ridge(m, y):
    """Solve m x = y, retrying once with m + eps I if m is singular

    :return: (x, ridge) where ridge is the eps that was added (0.0 if none)
    """
    try:
        return solve(m, y), 0.0
    except e.SingularMatrixError as err:
        eps = ridge_epsilon(m)
        log.warning(f"singular solve at pivot {err.pivot}, retrying with ridge {eps:.3g}")
        return solve(m + eps * identity(m.shape[0]), y), eps

def max_abs_deviation(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))

def seeded_rng(*seed):
    """numpy Generator from one or more non-negative integer seed parts,
    e.g. seeded_rng(shuffle_seed, epoch)

    :raises ConfigError: a part is negative or not an integer
    """
    for part in seed:
        if isinstance(part, bool) or not isinstance(part, (int, np.integer)) or part < 0:
            raise e.ConfigError(f"seed must be a non-negative integer, got {part!r}")
    return np.random.default_rng([int(part) for part in seed] if len(seed) > 1 else int(seed[0]))
