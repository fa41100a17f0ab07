"""Moments of self-normalized vectors Y = Z / ||Z||, two independent ways.

For i.i.d. coordinates Z_1..Z_p the product moment E Y_1^{e_1} ... Y_r^{e_r}
is computed either by Monte Carlo (any exponents) or, for even exponents, by
the deterministic Gamma-identity integral

    (1 / Gamma(k)) * int_0^inf s^{k-1} prod_i E Z^{e_i} e^{-s Z^2}
                                     * phi(s)^{p-r} ds,      k = sum e_i / 2,

evaluated in log space. The two routes share no code beyond the population
density, so they serve as independent cross-checks of one another. Odd
exponents are left to Monte Carlo: their integrands carry sign cancellation
that quadrature cannot resolve reliably.

The module also estimates means, variances, and covariances of the quadratic
forms Y'AY and of the ratio forms Y'AY / Y'SY, alongside the closed-form
predictions (``theoretical_quadform_cov``, ``theoretical_ratio_mean``) they
are expected to approach when the fourth moment is finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .covariance import CovModel
from .distributions import Distribution, damped_moment, laplace, sample
from .errors import NumericError

_N_BATCHES = 100  # batch means keep stderr estimates robust to huge summands
_OUTER_RTOL = 1e-8
_TAIL_CUT = 60.0  # outer-integral substitution s = t/p is truncated at t = 60


class Method(Enum):
    MONTE_CARLO = "monte_carlo"
    INTEGRAL = "integral"


@dataclass(frozen=True)
class MomentSpec:
    """Exponents (e_1, ..., e_r) applied to the first r coordinates of Y."""

    exponents: tuple[int, ...]
    p: int

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        if len(self.exponents) < 1:
            raise ValueError("at least one exponent required")
        if any(e < 1 for e in self.exponents):
            raise ValueError("exponents must be >= 1")
        if self.p < len(self.exponents):
            raise ValueError("dimension p must be >= number of exponents")

    @property
    def r(self) -> int:
        return len(self.exponents)

    @property
    def total(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    method: Method

    def __post_init__(self):
        if (self.stderr == 0.0) != (self.method is Method.INTEGRAL):
            raise ValueError("stderr must be 0 exactly for the integral method")


def self_normalize(z: np.ndarray) -> np.ndarray:
    """z / ||z||_2; rejects the all-zero vector."""
    z = np.asarray(z, dtype=float)
    norm = math.sqrt(float(np.dot(z, z)))
    if norm == 0.0:
        raise ValueError("cannot self-normalize the zero vector")
    return z / norm


def _batch_sizes(reps: int) -> np.ndarray:
    nb = min(_N_BATCHES, reps)
    sizes = np.full(nb, reps // nb)
    sizes[: reps % nb] += 1
    return sizes


def _batch_stats(batch_means: np.ndarray) -> tuple[float, float]:
    value = float(np.mean(batch_means))
    if batch_means.size > 1:
        stderr = float(np.std(batch_means, ddof=1) / math.sqrt(batch_means.size))
    else:
        stderr = float("nan")
    return value, stderr


def _normalized_rows(dist: Distribution, count: int, p: int, rng: np.random.Generator) -> np.ndarray:
    z = sample(dist, count * p, rng).reshape(count, p)
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    return z / norms[:, None]


def mc_moment(
    dist: Distribution, spec: MomentSpec, reps: int, rng: np.random.Generator
) -> MomentEstimate:
    """Monte Carlo product moment over independent self-normalized vectors."""
    if reps < 100:
        raise ValueError("reps must be >= 100")
    exps = np.array(spec.exponents, dtype=np.int64)
    batch_means = []
    for size in _batch_sizes(reps):
        Y = _normalized_rows(dist, int(size), spec.p, rng)
        prod = np.prod(Y[:, : spec.r] ** exps, axis=1)
        batch_means.append(prod.mean())
    value, stderr = _batch_stats(np.array(batch_means))
    return MomentEstimate(value, stderr, Method.MONTE_CARLO)


def _log_integrand(dist: Distribution, spec: MomentSpec, s: float) -> float:
    """log of s^{k-1} * prod damped_moment(e_i, s) * phi(s)^{p-r} - log Gamma(k)."""
    k = spec.total // 2
    phi = laplace(dist, s)
    if phi <= 0.0:
        return -math.inf
    acc = (k - 1) * math.log(s) + (spec.p - spec.r) * math.log(phi) - gammaln(k)
    for e in spec.exponents:
        dm = damped_moment(dist, e, s)
        if dm <= 0.0:
            return -math.inf
        acc += math.log(dm)
    return acc


def integral_moment(dist: Distribution, spec: MomentSpec) -> MomentEstimate:
    """Deterministic product moment for even exponents via the Gamma identity.

    The substitution s = t/p concentrates the quadrature where phi^{p-r} is
    non-negligible (phi(s)^p collapses like e^{-p("1-phi")} once s leaves a
    1/p-sized neighborhood of the origin). The substituted integral is
    truncated at t = 60; for small p, where phi^{p-r} decays only
    polynomially, the remainder on (60/p, inf) is integrated explicitly and
    added back.
    """
    if any(e % 2 for e in spec.exponents):
        raise ValueError("integral oracle requires all exponents even")
    p = spec.p

    def substituted(t: float) -> float:
        if t <= 0.0:
            return 0.0
        lg = _log_integrand(dist, spec, t / p) - math.log(p)
        return math.exp(lg) if lg > -700.0 else 0.0

    def tail(s: float) -> float:
        lg = _log_integrand(dist, spec, s)
        return math.exp(lg) if lg > -700.0 else 0.0

    head, head_err = integrate.quad(
        substituted, 0.0, _TAIL_CUT, epsabs=1e-300, epsrel=_OUTER_RTOL, limit=10_000
    )[:2]
    tail_val, tail_err = integrate.quad(
        tail, _TAIL_CUT / p, np.inf, epsabs=1e-300, epsrel=_OUTER_RTOL, limit=10_000
    )[:2]
    value = head + tail_val
    if head_err + tail_err > 100.0 * max(1e-300, _OUTER_RTOL * abs(value)):
        raise NumericError(
            f"moment integral did not converge: value {value:.6g}, "
            f"abs error {head_err + tail_err:.3g}"
        )
    return MomentEstimate(value, 0.0, Method.INTEGRAL)


def _check_symmetric(A: np.ndarray, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square")
    if np.max(np.abs(A - A.T)) > 1e-10 * max(1.0, np.max(np.abs(A))):
        raise ValueError(f"{name} must be symmetric")
    return A


@dataclass(frozen=True)
class QuadformStats:
    mean_a: float
    mean_a_stderr: float
    var_a: float
    var_a_stderr: float
    cov_ab: float
    cov_ab_stderr: float


def quadform_stats(
    dist: Distribution,
    p: int,
    A: np.ndarray,
    B: np.ndarray,
    reps: int,
    rng: np.random.Generator,
) -> QuadformStats:
    """Monte Carlo mean/variance/covariance of Y'AY and Y'BY."""
    A = _check_symmetric(A, "A")
    B = _check_symmetric(B, "B")
    if reps < 1000:
        raise ValueError("reps must be >= 1000")
    means, variances, covs = [], [], []
    for size in _batch_sizes(reps):
        Y = _normalized_rows(dist, int(size), p, rng)
        qa = np.einsum("ij,ij->i", Y @ A, Y)
        qb = np.einsum("ij,ij->i", Y @ B, Y)
        means.append(qa.mean())
        variances.append(qa.var(ddof=1))
        # unbiased within-batch covariance; ddof=0 would shrink every batch
        # value by 1/size and leave a systematic offset in the average
        covs.append(np.sum((qa - qa.mean()) * (qb - qb.mean())) / (size - 1))
    mean_a, mean_se = _batch_stats(np.array(means))
    var_a, var_se = _batch_stats(np.array(variances))
    cov_ab, cov_se = _batch_stats(np.array(covs))
    return QuadformStats(mean_a, mean_se, var_a, var_se, cov_ab, cov_se)


def theoretical_quadform_cov(A: np.ndarray, B: np.ndarray, tau: float, p: int) -> float:
    """Leading-order cov(Y'AY, Y'BY) for fourth moment tau:

    (tau-3)/p^2 tr(A o B) + 2/p^2 tr(AB) + (1-tau)/p^3 tr A tr B.
    """
    A = _check_symmetric(A, "A")
    B = _check_symmetric(B, "B")
    tr_hadamard = float(np.sum(np.diag(A) * np.diag(B)))
    tr_ab = float(np.sum(A * B))  # tr(AB) for symmetric A, B
    return (
        (tau - 3.0) / p**2 * tr_hadamard
        + 2.0 / p**2 * tr_ab
        + (1.0 - tau) / p**3 * float(np.trace(A)) * float(np.trace(B))
    )


@dataclass(frozen=True)
class RatioStats:
    mean: float
    mean_stderr: float
    var: float
    var_stderr: float


def ratio_quadform_stats(
    dist: Distribution,
    p: int,
    A: np.ndarray,
    sigma: CovModel,
    reps: int,
    rng: np.random.Generator,
) -> RatioStats:
    """Monte Carlo mean/variance of (Y'AY) / (Y'SY) for S = sigma's matrix."""
    A = _check_symmetric(A, "A")
    if sigma.p != p:
        raise ValueError("sigma dimension mismatch")
    if reps < 1000:
        raise ValueError("reps must be >= 1000")
    S = sigma.matrix()
    means, variances = [], []
    for size in _batch_sizes(reps):
        Y = _normalized_rows(dist, int(size), p, rng)
        qa = np.einsum("ij,ij->i", Y @ A, Y)
        qs = np.einsum("ij,ij->i", Y @ S, Y)
        ratio = qa / qs
        means.append(ratio.mean())
        variances.append(ratio.var(ddof=1))
    mean, mean_se = _batch_stats(np.array(means))
    var, var_se = _batch_stats(np.array(variances))
    return RatioStats(mean, mean_se, var, var_se)


def theoretical_ratio_mean(A: np.ndarray, sigma: CovModel, tau: float, p: int) -> float:
    """Finite-fourth-moment expansion of E (Y'AY)/(Y'SY):

    tr A / p + (tau-3)/p^3 (tr A tr(S o S) - p tr(A o S))
             + 2/p^3 (tr A tr S^2 - p tr(AS)).
    """
    A = _check_symmetric(A, "A")
    S = sigma.matrix()
    tau3 = tau - 3.0
    tr_a = float(np.trace(A))
    tr_ss_hadamard = float(np.sum(np.diag(S) ** 2))
    tr_as_hadamard = float(np.sum(np.diag(A) * np.diag(S)))
    tr_s2 = float(np.sum(S * S))
    tr_as = float(np.sum(A * S))
    return (
        tr_a / p
        + tau3 / p**3 * (tr_a * tr_ss_hadamard - p * tr_as_hadamard)
        + 2.0 / p**3 * (tr_a * tr_s2 - p * tr_as)
    )
