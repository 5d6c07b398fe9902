"""Unit Fisher information matrix and the bias shift correction of the unit
natural gradient

For one unit with incoming activation vector a (the bias unit a0 = 1 is kept
apart) and delta = d ln p / d net, the unit Fisher matrix is

    F = [[A, b], [b^T, c]]    A = E_p(delta^2 a a^T), b = E_p(delta^2 a), c = E_p(delta^2)

Reweighting the inputs by delta^2 gives the distribution q, so that
A = E_p(delta^2) E_q(a a^T) and b = E_p(delta^2) E_q(a). Expectations are
empirical means over the samples handed in.

Solves against A are done in the q frame (against E_q(a a^T)) and rescaled by
E_p(delta^2): the pivot threshold of the elimination is absolute and small
delta^2 would otherwise look singular.
"""

import logging

import numpy as np

from elulab.frontend import printutils as pu
from elulab.nn import errors as e
from elulab.nn import linalg as la
from elulab.nn import network as nw

log = logging.getLogger("elulab")
log.trace("fisher.py")

OBSERVED_LABEL = "observed-label"
MODEL_SAMPLED = "model-sampled"
DELTA_MODES = [OBSERVED_LABEL, MODEL_SAMPLED]

# Identities are checked with |x - y| <= TOLERANCE * max(1, |x|, |y|)
TOLERANCE = 1e-9

# s denominator (c - b^T A^-1 b) at or below this, relative to c, is not positive definite
PD_THRESHOLD = 1e-12

def close(x, y, tolerance=TOLERANCE):
    return deviation(x, y) <= tolerance

def deviation(x, y):
    """Largest scaled absolute difference between two arrays or scalars"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    return float(np.max(np.abs(x - y) / scale))

class unit_fisher_estimate:
    """Moments of one unit's Fisher matrix

    :param A: (d, d) E_p(delta^2 a a^T)
    :param b: (d,) E_p(delta^2 a)
    :param c: E_p(delta^2), the bias-bias entry
    :param e_p_delta2: E_p(delta^2) (same value as c)
    :param e_q_a: E_q(a)
    :param e_q_aaT: E_q(a a^T)
    :param e_p_a: E_p(a)
    :param n_samples: number of (example, delta) pairs averaged over
    :param cov_delta2_a: Cov_p(delta^2, a) when estimated from samples, else None
    """

    def __init__(self, A, b, c, e_p_delta2, e_q_a, e_q_aaT, e_p_a, n_samples,
                 cov_delta2_a=None, unit=None):
        self.A = la.as_matrix(A, "A")
        self.b = la.as_vector(b, "b")
        self.c = float(c)
        self.e_p_delta2 = float(e_p_delta2)
        self.e_q_a = la.as_vector(e_q_a, "E_q(a)")
        self.e_q_aaT = la.as_matrix(e_q_aaT, "E_q(aa^T)")
        self.e_p_a = la.as_vector(e_p_a, "E_p(a)")
        self.n_samples = int(n_samples)
        self.cov_delta2_a = cov_delta2_a
        self.unit = unit

        d = self.A.shape[0]
        for name, shape in (("b", self.b.shape), ("E_q(a)", self.e_q_a.shape), ("E_p(a)", self.e_p_a.shape)):
            if shape != (d,):
                raise e.ShapeError(f"{name} does not match A", self.A.shape, shape)
        if self.e_q_aaT.shape != (d, d):
            raise e.ShapeError("E_q(aa^T) does not match A", self.A.shape, self.e_q_aaT.shape)

    @staticmethod
    def from_moments(e_q_a, e_q_aaT, e_p_a, e_p_delta2=1.0, n_samples=0):
        """Assemble an estimate from q moments, e.g. constructed in tests"""
        e_q_a = la.as_vector(e_q_a)
        e_q_aaT = la.as_matrix(e_q_aaT)
        return unit_fisher_estimate(
            e_p_delta2 * e_q_aaT, e_p_delta2 * e_q_a, e_p_delta2, e_p_delta2,
            e_q_a, e_q_aaT, e_p_a, n_samples,
        )

    @property
    def d(self):
        return self.A.shape[0]

    def matrix(self):
        """The full (d+1) x (d+1) matrix, bias coordinate last"""
        F = np.empty((self.d + 1, self.d + 1))
        F[:-1, :-1] = self.A
        F[:-1, -1] = self.b
        F[-1, :-1] = self.b
        F[-1, -1] = self.c
        return F

    def variance_q(self):
        """Var_q(a) = E_q(a a^T) - E_q(a) E_q(a)^T"""
        return self.e_q_aaT - la.outer(self.e_q_a, self.e_q_a)

    def solve_A(self, rhs):
        """A^-1 rhs, with the ridge fallback. :return: (x, ridge added to A)"""
        x, ridge = la.solve_with_ridge(self.e_q_aaT, rhs)
        return x / self.e_p_delta2, ridge * self.e_p_delta2

    def solve_variance(self, rhs):
        """Var_q(a)^-1 rhs, with the ridge fallback. :return: (x, ridge)"""
        return la.solve_with_ridge(self.variance_q(), rhs)

    def __str__(self):
        title = "unit fisher estimate"
        if self.unit is not None:
            title += f" {self.unit}"
        txt = pu.color_title(title + " {")
        txt += "\n{:16} = ".format("d")
        txt += pu.color_value(self.d)
        txt += "\n{:16} = ".format("n_samples")
        txt += pu.color_value(self.n_samples)
        txt += "\n{:16} = ".format("E_p(delta^2)")
        txt += pu.color_value(f"{self.e_p_delta2:.6g}")
        txt += "\n{:16} = ".format("|E_q(a)|")
        txt += pu.color_value(f"{np.linalg.norm(self.e_q_a):.6g}")
        txt += "\n{:16} = ".format("|E_p(a)|")
        txt += pu.color_value(f"{np.linalg.norm(self.e_p_a):.6g}")
        txt += "\n}"
        return txt

def sample_labels(rng, probabilities):
    """One class index per row, drawn from the row's probabilities"""
    u = rng.random(probabilities.shape[0])
    cumulative = np.cumsum(probabilities, axis=1)
    labels = np.sum(cumulative < u[:, None], axis=1)
    return np.minimum(labels, probabilities.shape[1] - 1)

def unit_samples(net, unit, data, delta_mode=OBSERVED_LABEL, mc_samples=1, seed=0):
    """Incoming activations and deltas of one unit over a dataset

    With model-sampled deltas, every example contributes mc_samples pairs,
    each with a label drawn from the network's own softmax output.

    :return: (a, delta), a is (n, d) and delta is (n,)
    """
    if delta_mode not in DELTA_MODES:
        raise e.ConfigError(f"unknown delta mode '{delta_mode}'")
    unit.check(net)
    if len(data) == 0:
        raise e.ConfigError(f"{data.name} is empty")
    trace = nw.forward(net, data.inputs)
    a = trace.level(unit.level - 1)

    if delta_mode == OBSERVED_LABEL:
        if data.labels is None:
            raise e.ConfigError(f"{data.name} has no labels for observed-label deltas")
        return a.copy(), nw.backprop_logprob_delta(net, trace, data.labels, unit)

    rng = la.seeded_rng(seed)
    deltas = []
    for _ in range(max(1, int(mc_samples))):
        labels = sample_labels(rng, trace.output)
        deltas.append(nw.backprop_logprob_delta(net, trace, labels, unit))
    return np.tile(a, (len(deltas), 1)), np.concatenate(deltas)

def fisher_from_samples(a, delta, unit=None):
    """Empirical unit Fisher moments

    Examples whose delta^2 underflows carry zero weight in q, only an
    all-zero delta is an error.
    """
    a = la.as_matrix(a, "activations")
    delta = la.as_vector(delta, "delta")
    if a.shape[0] != delta.shape[0]:
        raise e.ShapeError("one delta per activation row expected", a.shape, delta.shape)
    n = delta.shape[0]
    w = delta ** 2
    total = float(np.sum(w))
    if n == 0 or total == 0.0:
        raise e.DegenerateFisherError(f"all deltas are zero for unit {unit}, the Fisher matrix is degenerate")

    weighted = a.T * w
    A = weighted @ a / n
    b = weighted.sum(axis=1) / n
    c = total / n
    e_p_a = a.mean(axis=0)
    cov = ((w - c)[:, None] * (a - e_p_a)).mean(axis=0)
    return unit_fisher_estimate(
        A, b, c, c, weighted.sum(axis=1) / total, weighted @ a / total, e_p_a, n,
        cov_delta2_a=cov, unit=unit,
    )

def estimate_unit_fisher(net, unit, data, delta_mode=OBSERVED_LABEL, mc_samples=1, seed=0):
    """Estimate the unit Fisher matrix of one unit (level >= 1) from data"""
    log.debug(f"fisher.estimate_unit_fisher({unit}, {data.name}, {delta_mode})")
    a, delta = unit_samples(net, unit, data, delta_mode, mc_samples, seed)
    return fisher_from_samples(a, delta, unit)

def block_inverse(A, b, c):
    """Inverse of the positive definite block matrix [[A, b], [b^T, c]]

    :return: (K, u, s) with s = (c - b^T A^-1 b)^-1, u = -s A^-1 b,
             K = A^-1 + u s^-1 u^T; the inverse is [[K, u], [u^T, s]]
    """
    A = la.as_matrix(A, "A")
    b = la.as_vector(b, "b")
    A_inv = la.dense_inverse(A)
    A_inv_b = A_inv @ b
    denominator = float(c) - float(b @ A_inv_b)
    if denominator <= PD_THRESHOLD:
        raise e.NotPositiveDefiniteError(f"c - b^T A^-1 b = {denominator:.3g} is not positive")
    s = 1.0 / denominator
    u = -s * A_inv_b
    K = A_inv + la.outer(u, u) / s
    return K, u, s

def assemble_block_inverse(K, u, s):
    d = K.shape[0]
    M = np.empty((d + 1, d + 1))
    M[:-1, :-1] = K
    M[:-1, -1] = u
    M[-1, :-1] = u
    M[-1, -1] = s
    return M

class natgrad_update:
    """(delta_w, delta_w0) = F^-1 (g, g0) for one unit, and the scalar s"""

    def __init__(self, delta_w, delta_w0, s, ridge=0.0):
        self.delta_w = delta_w
        self.delta_w0 = float(delta_w0)
        self.s = float(s)
        self.ridge = ridge

    def vector(self):
        return np.append(self.delta_w, self.delta_w0)

def natural_gradient_update(fisher, g, g0):
    """Unit natural gradient through the block structure:

        delta_w0 = s (g0 - b^T A^-1 g),  delta_w = A^-1 (g - delta_w0 b)

    computed with solves, never with an explicit inverse
    """
    g = la.as_vector(g, "g")
    if g.shape != (fisher.d,):
        raise e.ShapeError("gradient does not match the unit", fisher.A.shape, g.shape)
    x, ridge = fisher.solve_A(np.column_stack([g, fisher.b]))
    A_inv_g, A_inv_b = x[:, 0], x[:, 1]
    denominator = fisher.c - float(fisher.b @ A_inv_b)
    if denominator <= PD_THRESHOLD * fisher.c:
        raise e.NotPositiveDefiniteError(f"c - b^T A^-1 b = {denominator:.3g} is not positive")
    s = 1.0 / denominator
    delta_w0 = s * (float(g0) - float(fisher.b @ A_inv_g))
    delta_w = A_inv_g - delta_w0 * A_inv_b
    return natgrad_update(delta_w, delta_w0, s, ridge)

def s_via_variance(fisher):
    """s = E_p(delta^2)^-1 (1 + E_q(a)^T Var_q(a)^-1 E_q(a))"""
    x, _ = fisher.solve_variance(fisher.e_q_a)
    return (1.0 + float(fisher.e_q_a @ x)) / fisher.e_p_delta2

def k_variance_form(fisher):
    """k = 1 + (E_q(a) - E_p(a))^T Var_q(a)^-1 E_q(a). :return: (k, ridge)"""
    x, ridge = fisher.solve_variance(fisher.e_q_a)
    return 1.0 + float((fisher.e_q_a - fisher.e_p_a) @ x), ridge

def k_dual_form(fisher):
    """k = (1 - E_q^T E_q(aa^T)^-1 E_q)^-1 (1 - E_p^T E_q(aa^T)^-1 E_q). :return: (k, ridge)"""
    x, ridge = la.solve_with_ridge(fisher.e_q_aaT, fisher.e_q_a)
    denominator = 1.0 - float(fisher.e_q_a @ x)
    if denominator <= PD_THRESHOLD:
        raise e.NotPositiveDefiniteError(f"1 - E_q^T E_q(aa^T)^-1 E_q = {denominator:.3g} is not positive")
    return (1.0 - float(fisher.e_p_a @ x)) / denominator, ridge

def k_covariance_form(fisher):
    """k = 1 + E_p(delta^2)^-1 Cov_p(delta^2, a)^T Var_q(a)^-1 E_q(a)

    Needs the covariance measured on the samples, None otherwise
    """
    if fisher.cov_delta2_a is None:
        return None
    x, _ = fisher.solve_variance(fisher.e_q_a)
    return 1.0 + float(fisher.cov_delta2_a @ x) / fisher.e_p_delta2

def correction_factor_k(fisher, check=True, tolerance=TOLERANCE):
    """Bias shift correction factor k

    :param check: also compute the dual form and raise IdentityError if the
                  two disagree beyond tolerance
    """
    k, _ = k_variance_form(fisher)
    if check:
        k_dual, _ = k_dual_form(fisher)
        dev = deviation(k, k_dual)
        if dev > tolerance:
            raise e.IdentityError("k variance form vs dual form", dev, tolerance)
    return k

class bias_shift:
    """Bias shift of one unit under the plain and the natural gradient"""

    def __init__(self, shift_plain, shift_natural, k, mean_correction, k_dual=None, k_covariance=None,
                 decomposition_residual=0.0, k_residual=0.0, covariance_residual=0.0, ridge_used=0.0,
                 e_p_delta2=None, n_samples=0, unit=None, tolerance=TOLERANCE):
        self.shift_plain = shift_plain
        self.shift_natural = shift_natural
        self.k = k
        self.k_dual = k_dual
        self.k_covariance = k_covariance
        self.mean_correction = mean_correction
        self.decomposition_residual = decomposition_residual
        self.k_residual = k_residual
        self.covariance_residual = covariance_residual
        self.ridge_used = ridge_used
        self.e_p_delta2 = e_p_delta2
        self.n_samples = n_samples
        self.unit = unit
        self.tolerance = tolerance

    @property
    def identities_ok(self):
        return max(self.decomposition_residual, self.k_residual, self.covariance_residual) <= self.tolerance

    def to_json(self):
        return {
            "unit": None if self.unit is None else self.unit.index,
            "layer": None if self.unit is None else self.unit.level,
            "k": self.k,
            "k_dual": self.k_dual,
            "k_covariance": self.k_covariance,
            "shift_plain": self.shift_plain,
            "shift_natural": self.shift_natural,
            "mean_correction_norm": float(np.linalg.norm(self.mean_correction)),
            "e_p_delta2": self.e_p_delta2,
            "n_samples": self.n_samples,
            "ridge_used": self.ridge_used,
            "decomposition_residual": self.decomposition_residual,
            "k_residual": self.k_residual,
            "covariance_residual": self.covariance_residual,
            "identities_ok": self.identities_ok,
        }

    def __str__(self):
        title = "bias shift"
        if self.unit is not None:
            title += f" {self.unit}"
        txt = pu.color_title(title + " {")
        for name in ("k", "shift_plain", "shift_natural", "decomposition_residual", "k_residual",
                     "covariance_residual", "ridge_used"):
            txt += "\n{:24} = ".format(name)
            txt += pu.color_value(f"{getattr(self, name):+.6g}")
        txt += "\n{:24} = ".format("identities")
        txt += pu.status(self.identities_ok)
        txt += "\n}"
        return txt

def bias_shift_report(fisher, g, g0, tolerance=TOLERANCE):
    """Bias shift (E_p(a)^T, 1)(delta_w^T, delta_w0)^T of a unit

    shift_plain uses delta_w = A^-1 g, delta_w0 = c^-1 g0 (no bias shift
    correction), shift_natural uses the unit natural gradient. Also checks
    that the natural shift decomposes into an incoming mean corrected by
    -k E_q(a) and a bias unit scaled by k:

        shift_natural = (E_p(a) - k E_q(a))^T A^-1 g + k c^-1 g0
    """
    g = la.as_vector(g, "g")
    A_inv_g, ridge_a = fisher.solve_A(g)
    shift_plain = float(fisher.e_p_a @ A_inv_g) + float(g0) / fisher.c

    update = natural_gradient_update(fisher, g, g0)
    shift_natural = float(fisher.e_p_a @ update.delta_w) + update.delta_w0

    k, ridge_var = k_variance_form(fisher)
    k_dual, ridge_dual = k_dual_form(fisher)
    k_covariance = k_covariance_form(fisher)
    decomposed = float((fisher.e_p_a - k * fisher.e_q_a) @ A_inv_g) + k * float(g0) / fisher.c

    report = bias_shift(
        shift_plain, shift_natural, k, k * fisher.e_q_a,
        k_dual=k_dual,
        k_covariance=k_covariance,
        decomposition_residual=deviation(shift_natural, decomposed),
        k_residual=deviation(k, k_dual),
        covariance_residual=0.0 if k_covariance is None else deviation(k, k_covariance),
        ridge_used=max(ridge_a, update.ridge, ridge_var, ridge_dual),
        e_p_delta2=fisher.e_p_delta2,
        n_samples=fisher.n_samples,
        unit=fisher.unit,
        tolerance=tolerance,
    )
    if not report.identities_ok:
        log.warning(f"unit {fisher.unit}: bias shift identities off by "
                    f"{report.decomposition_residual:.3g} / {report.k_residual:.3g} / {report.covariance_residual:.3g}")
    return report

def mean_quadratic_bound(e_q_a, e_q_aaT):
    """E(a)^T E(a a^T)^-1 E(a), which is at most 1 for consistent moments

    :raises MomentConsistencyError: E(a a^T) - E(a) E(a)^T is not positive semi-definite
    """
    e_q_a = la.as_vector(e_q_a, "E(a)")
    e_q_aaT = la.as_matrix(e_q_aaT, "E(aa^T)")
    variance = e_q_aaT - la.outer(e_q_a, e_q_a)
    smallest = float(np.min(np.linalg.eigvalsh((variance + variance.T) / 2)))
    if smallest < -TOLERANCE * max(1.0, float(np.trace(e_q_aaT))):
        raise e.MomentConsistencyError(f"variance has a negative eigenvalue {smallest:.3g}")
    return la.quadratic_form(e_q_a, e_q_aaT, e_q_a)
