"""Weighted 1-D Gaussian mixtures and the distance/transform algebra on them.

These are plain value-level functions shared by the tests, the evaluator and
the reward-distribution machinery. The differentiable tensor versions used
for training live in ``bwelab.learner.losses``; the two are cross-checked
against each other in the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

SIGMA_FLOOR = 1e-4
_WEIGHT_TOL = 1e-6
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianMixture:
    """N weighted Gaussian components over a scalar variable.

    Invariants: weights are non-negative and sum to one (within 1e-6), every
    std sits at or above SIGMA_FLOOR, and there is at least one component.
    """

    weights: tuple[float, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]

    def __post_init__(self):
        n = len(self.weights)
        if n < 1 or len(self.means) != n or len(self.stds) != n:
            raise ValueError("weights, means and stds must have equal length >= 1")
        if any(w < 0.0 for w in self.weights):
            raise ValueError(f"negative component weight in {self.weights}")
        total = sum(self.weights)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {total}, expected 1 within {_WEIGHT_TOL}")
        if any(s < SIGMA_FLOOR for s in self.stds):
            raise ValueError(f"std below floor {SIGMA_FLOOR}: {self.stds}")

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @classmethod
    def single(cls, mean: float, std: float) -> "GaussianMixture":
        return cls((1.0,), (float(mean),), (float(std),))

    @classmethod
    def of(cls, *components: tuple[float, float, float]) -> "GaussianMixture":
        """Build from (weight, mean, std) triples."""
        w, m, s = zip(*components)
        return cls(tuple(map(float, w)), tuple(map(float, m)), tuple(map(float, s)))


def gaussian_w2_sq(mu_a: float, sigma_a: float, mu_b: float, sigma_b: float) -> float:
    """Squared 2-Wasserstein distance between two scalar Gaussians."""
    return (mu_a - mu_b) ** 2 + (sigma_a - sigma_b) ** 2


def mw2_upper(z_a: GaussianMixture, z_b: GaussianMixture) -> float:
    """Independent-coupling upper bound on the mixture W2^2 distance.

    Sums w_i^a * w_j^b * W2^2(i, j) over all component pairs; always at least
    the optimal-coupling value returned by :func:`mw2_exact_oracle`.
    """
    total = 0.0
    for wa, ma, sa in zip(z_a.weights, z_a.means, z_a.stds):
        for wb, mb, sb in zip(z_b.weights, z_b.means, z_b.stds):
            total += wa * wb * gaussian_w2_sq(ma, sa, mb, sb)
    return total


def _northwest_coupling(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    lam = np.zeros((a.size, b.size))
    rem_a = a.astype(float).copy()
    rem_b = b.astype(float).copy()
    i = j = 0
    while i < a.size and j < b.size:
        move = min(rem_a[i], rem_b[j])
        lam[i, j] = move
        rem_a[i] -= move
        rem_b[j] -= move
        if rem_a[i] <= rem_b[j]:
            i += 1
        else:
            j += 1
    return lam


def mw2_exact_oracle(z_a: GaussianMixture, z_b: GaussianMixture) -> float:
    """Exact mixture-coupling W2^2, for small mixtures only (test oracle).

    Minimizes sum(lambda_ij * W2^2(i, j)) over couplings lambda with marginals
    (w^a, w^b). The optimum of this transportation LP lies at a vertex of the
    coupling polytope, and every vertex is a northwest-corner solution under
    some row/column permutation, so enumerating all permutation pairs is an
    exhaustive search of the candidate optima. Not used in training.
    """
    na, nb = z_a.n_components, z_b.n_components
    if na > 3 or nb > 3:
        raise ValueError(f"exact MW2 oracle supports N <= 3, got {na}x{nb}")
    wa = np.asarray(z_a.weights)
    wb = np.asarray(z_b.weights)
    cost = np.array(
        [
            [gaussian_w2_sq(ma, sa, mb, sb) for mb, sb in zip(z_b.means, z_b.stds)]
            for ma, sa in zip(z_a.means, z_a.stds)
        ]
    )
    best = math.inf
    for pa in itertools.permutations(range(na)):
        for pb in itertools.permutations(range(nb)):
            lam_p = _northwest_coupling(wa[list(pa)], wb[list(pb)])
            lam = np.zeros_like(lam_p)
            lam[np.ix_(list(pa), list(pb))] = lam_p
            best = min(best, float(np.sum(lam * cost)))
    return best


def expectile_weight(tau: float, mu_q: float, mu_v: float) -> float:
    """Asymmetric weight |tau - 1{z < 0}| with z = mu_q - mu_v."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    z = mu_q - mu_v
    return abs(tau - (1.0 if z < 0.0 else 0.0))


def bellman_target(r: float, gamma: float, z_v_next: GaussianMixture) -> GaussianMixture:
    """Shift by the reward and scale by the discount, component-wise.

    Weights are unchanged; means become r + gamma * mu_i; stds become
    gamma * sigma_i with the floor re-applied after scaling.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    means = tuple(r + gamma * m for m in z_v_next.means)
    stds = tuple(max(gamma * s, SIGMA_FLOOR) for s in z_v_next.stds)
    return GaussianMixture(z_v_next.weights, means, stds)


def mixture_mean(z: GaussianMixture) -> float:
    return sum(w * m for w, m in zip(z.weights, z.means))


def gm_log_density(z: GaussianMixture, x: float) -> float:
    """log sum_i w_i * N(x; mu_i, sigma_i), stabilized via log-sum-exp."""
    terms = []
    for w, m, s in zip(z.weights, z.means, z.stds):
        if w == 0.0:
            continue
        terms.append(math.log(w) - _LOG_SQRT_2PI - math.log(s) - 0.5 * ((x - m) / s) ** 2)
    hi = max(terms)
    return hi + math.log(sum(math.exp(t - hi) for t in terms))


def gm_sample(z: GaussianMixture, rng: np.random.Generator) -> float:
    """One draw: categorical over weights, then the chosen Gaussian."""
    idx = int(rng.choice(z.n_components, p=np.asarray(z.weights) / sum(z.weights)))
    return float(z.means[idx] + z.stds[idx] * rng.standard_normal())


def min_mean_select(z_1: GaussianMixture, z_2: GaussianMixture) -> GaussianMixture:
    """The input with the smaller mixture mean; ties keep the first."""
    return z_2 if mixture_mean(z_2) < mixture_mean(z_1) else z_1
