"""Seeded randomized checks of the block inverse, the Sherman-Morrison
identities behind s and k, and the unit natural gradient / bias shift
decomposition, each against a brute-force dense inverse
"""

import logging

import numpy as np

from elulab.nn import activations as act
from elulab.nn import data as dt
from elulab.nn import fisher as fi
from elulab.nn import linalg as la
from elulab.nn import network as nw
from elulab.nn import optimizer as op

log = logging.getLogger("elulab")
log.trace("lemmas.py")

class suite_result:
    def __init__(self, name, cases, max_deviation, tolerance=fi.TOLERANCE):
        self.name = name
        self.cases = cases
        self.max_deviation = max_deviation
        self.tolerance = tolerance

    @property
    def passed(self):
        return self.max_deviation <= self.tolerance

    def to_json(self):
        return {
            "name": self.name,
            "cases": self.cases,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }

def random_spd(rng, d):
    """Well-conditioned symmetric positive definite matrix, eigenvalues >= d"""
    x = rng.normal(size=(d, d))
    return x @ x.T + d * np.eye(d)

def random_moments(rng, d):
    """Consistent moments of a d-dim activation vector

    The q moments are weighted averages over random points with random
    positive weights, E_p(a) is the unweighted average of the same points.

    :return: (e_q_a, e_q_aaT, e_p_a)
    """
    n = 4 * d + 8
    points = rng.normal(loc=rng.normal(size=d), scale=rng.uniform(0.5, 2.0, size=d), size=(n, d))
    weights = rng.uniform(0.1, 1.0, size=n)
    weights /= weights.sum()
    e_q_a = weights @ points
    e_q_aaT = (points.T * weights) @ points
    return e_q_a, e_q_aaT, points.mean(axis=0)

def check_block_inverse(cases, seed, corrupt=False):
    """Block inverse assembled from (K, u, s) vs the dense inverse, dims 2..12

    :param corrupt: perturb every assembled inverse (exercises the failure path)
    """
    rng = la.seeded_rng(seed)
    worst = 0.0
    for _ in range(cases):
        d = int(rng.integers(2, 13))
        M = random_spd(rng, d)
        K, u, s = fi.block_inverse(M[:-1, :-1], M[:-1, -1], M[-1, -1])
        assembled = fi.assemble_block_inverse(K, u, s)
        if corrupt:
            assembled[0, 0] += 1e-6
        worst = max(worst, la.max_abs_deviation(assembled, la.dense_inverse(M)))
    return suite_result("block inverse vs dense inverse", cases, worst)

def check_sherman_morrison(cases, seed):
    """Sherman-Morrison consequences on random consistent moments:

    bound:    E^T E(aa^T)^-1 E <= 1
    identity: (1 - E^T E(aa^T)^-1 E)^-1 = 1 + E^T Var^-1 E
    k forms:  variance form of k = dual form of k
    """
    rng = la.seeded_rng(seed)
    worst_bound = 0.0
    worst_identity = 0.0
    worst_k = 0.0
    for _ in range(cases):
        d = int(rng.integers(1, 9))
        e_q_a, e_q_aaT, e_p_a = random_moments(rng, d)
        bound = fi.mean_quadratic_bound(e_q_a, e_q_aaT)
        worst_bound = max(worst_bound, bound - 1.0)

        variance = e_q_aaT - la.outer(e_q_a, e_q_a)
        rhs = 1.0 + la.quadratic_form(e_q_a, variance, e_q_a)
        worst_identity = max(worst_identity, fi.deviation(1.0 / (1.0 - bound), rhs))

        estimate = fi.unit_fisher_estimate.from_moments(e_q_a, e_q_aaT, e_p_a)
        k, _ = fi.k_variance_form(estimate)
        k_dual, _ = fi.k_dual_form(estimate)
        worst_k = max(worst_k, fi.deviation(k, k_dual))
    return [
        suite_result("mean quadratic form bound (excess over 1)", cases, max(worst_bound, 0.0)),
        suite_result("Sherman-Morrison identity", cases, worst_identity),
        suite_result("k variance form vs dual form", cases, worst_k),
    ]

def trained_estimates(count, seed, samples=200):
    """Unit Fisher estimates from small ELU classifiers trained briefly on a
    synthetic two-class problem, one random unit per network

    :return: list of (estimate, g, g0), g being the full-data gradient of that unit
    """
    rng = la.seeded_rng(seed)
    cfg_seed = int(rng.integers(2 ** 31))
    out = []
    for i in range(count):
        data = dt.synthetic_two_gaussians(samples, 4, 2.0, seed=cfg_seed + i)
        net = nw.init_he([4, 6, 5, 2], act.activation_kind("elu"), seed=cfg_seed + i)
        cfg = op.train_config(learning_rate=0.05, batch_size=32, epochs=2, shuffle_seed=i)
        op.train(net, data, None, cfg)
        level = int(rng.integers(1, len(net.layers) + 1))
        unit = nw.unit_ref(level, int(rng.integers(net.layers[level - 1].fan_out)))
        estimate = fi.estimate_unit_fisher(net, unit, data)
        trace = nw.forward(net, data.inputs)
        grads = nw.backprop_loss(net, trace, op.targets_for(net, data))
        g, g0 = grads.unit(unit)
        out.append((estimate, g, g0))
    return out

def check_natural_gradient(estimates):
    """Natural gradient vs dense F^-1 (g, g0), the bias shift decomposition,
    and the covariance form of k vs the variance form on the sampled estimates
    """
    worst_update = 0.0
    worst_decomposition = 0.0
    worst_covariance = 0.0
    for estimate, g, g0 in estimates:
        update = fi.natural_gradient_update(estimate, g, g0)
        dense = la.dense_inverse(estimate.matrix()) @ np.append(g, g0)
        worst_update = max(worst_update, fi.deviation(update.vector(), dense))
        report = fi.bias_shift_report(estimate, g, g0)
        worst_decomposition = max(worst_decomposition, report.decomposition_residual)
        worst_covariance = max(worst_covariance, report.covariance_residual)
    return [
        suite_result("natural gradient vs dense inverse", len(estimates), worst_update),
        suite_result("bias shift decomposition", len(estimates), worst_decomposition),
        suite_result("k covariance form vs variance form", len(estimates), worst_covariance),
    ]

def run_all(cases, seed, network_cases=50, corrupt=False):
    results = [check_block_inverse(cases, seed, corrupt=corrupt)]
    results += check_sherman_morrison(cases, seed)
    if network_cases > 0:
        results += check_natural_gradient(trained_estimates(network_cases, seed))
    for r in results:
        log.debug(f"{r.name}: max deviation {r.max_deviation:.3g} over {r.cases} cases")
    return results
