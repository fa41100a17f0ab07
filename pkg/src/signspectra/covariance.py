"""Population covariance models and the spatial-sign covariance matrix.

A covariance model holds a positive definite matrix rescaled on construction
so that its trace equals the dimension p, the normalization every spectral
result here assumes. Data rows are generated as sqrt(Sigma) z with i.i.d.
entries of z from a chosen population, and the spatial-sign covariance matrix
of a sample is

    B = (p/n) * sum_i x_i x_i' / ||x_i||^2,

which has trace p by construction and is invariant under rescaling individual
rows. ``sigma_tilde`` builds the O(1/p)-adjusted population matrix whose
squared-trace centers the trace statistic of B^2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, sample
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

_TRACE_RTOL = 1e-10


@dataclass(frozen=True)
class SpectralDist:
    """Discrete spectral distribution: positive atoms with weights summing to 1."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if atoms.ndim != 1 or atoms.shape != weights.shape:
            raise ValueError("atoms and weights must be 1-d arrays of equal length")
        if not np.all(atoms > 0):
            raise ValueError("atoms must be strictly positive")
        if not np.all(weights > 0):
            raise ValueError("weights must be strictly positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    def moment(self, k: int) -> float:
        """k-th moment of the distribution, sum_j w_j t_j^k."""
        return float(np.sum(self.weights * self.atoms**k))

    @staticmethod
    def point_mass(atom: float = 1.0) -> "SpectralDist":
        return SpectralDist(np.array([atom]), np.array([1.0]))


class CovModel:
    """Population covariance with trace normalized to p.

    Construct through :meth:`identity`, :meth:`diagonal`,
    :meth:`diagonal_atoms`, :meth:`dense`, or :func:`two_atom_sigma`. The
    matrix square root is computed lazily and cached; instances are immutable
    after construction and safe to share across workers.
    """

    def __init__(self, diag: np.ndarray | None = None, dense: np.ndarray | None = None):
        if (diag is None) == (dense is None):
            raise ValueError("exactly one of diag/dense must be given")
        if diag is not None:
            d = np.asarray(diag, dtype=float).copy()
            if d.ndim != 1:
                raise ValueError("diagonal must be a vector")
            p = d.size
            d *= self._trace_scale(d.sum(), p)
            if not np.all(d > 0):
                raise ConfigurationError("diagonal covariance must be strictly positive")
            self._diag, self._dense = d, None
            self._eig_min, self._eig_max = float(d.min()), float(d.max())
        else:
            m = np.asarray(dense, dtype=float).copy()
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("dense covariance must be square")
            if np.max(np.abs(m - m.T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
                raise ValueError("dense covariance must be symmetric")
            m = 0.5 * (m + m.T)
            p = m.shape[0]
            m *= self._trace_scale(np.trace(m), p)
            eigvals, eigvecs = np.linalg.eigh(m)
            if eigvals[0] <= 0:
                raise ConfigurationError("covariance must be strictly positive definite")
            self._diag, self._dense = None, m
            self._eigvals, self._eigvecs = eigvals, eigvecs
            self._eig_min, self._eig_max = float(eigvals[0]), float(eigvals[-1])
        self.p = p
        self._sqrt = None

    @staticmethod
    def _trace_scale(trace: float, p: int) -> float:
        if trace <= 0:
            raise ConfigurationError("covariance trace must be positive")
        scale = p / trace
        if abs(scale - 1.0) > _TRACE_RTOL:
            logger.info("rescaling covariance by %.12g to restore trace = p", scale)
        return scale

    @classmethod
    def identity(cls, p: int) -> "CovModel":
        return cls(diag=np.ones(p))

    @classmethod
    def diagonal(cls, values) -> "CovModel":
        return cls(diag=np.asarray(values, dtype=float))

    @classmethod
    def diagonal_atoms(cls, pairs) -> "CovModel":
        """Diagonal model from (value, count) pairs."""
        parts = [np.full(int(count), float(value)) for value, count in pairs]
        return cls(diag=np.concatenate(parts))

    @classmethod
    def dense(cls, matrix) -> "CovModel":
        return cls(dense=np.asarray(matrix, dtype=float))

    @property
    def is_diagonal(self) -> bool:
        return self._diag is not None

    @property
    def diag_vector(self) -> np.ndarray:
        if self._diag is None:
            raise ValueError("not a diagonal model")
        return self._diag

    @property
    def condition_bound(self) -> float:
        """Smallest c with eigenvalues contained in [1/c, c]."""
        return max(self._eig_max, 1.0 / self._eig_min)

    def matrix(self) -> np.ndarray:
        return np.diag(self._diag) if self.is_diagonal else self._dense.copy()

    def sqrt_matrix(self) -> np.ndarray:
        """Symmetric square root, cached after first use."""
        if self._sqrt is None:
            if self.is_diagonal:
                s = np.diag(np.sqrt(self._diag))
            else:
                s = (self._eigvecs * np.sqrt(self._eigvals)) @ self._eigvecs.T
            self._sqrt = s
        return self._sqrt

    def spectral_dist(self) -> SpectralDist:
        """Spectrum as atoms/weights, grouping eigenvalues equal to 12 decimals."""
        eigs = self._diag if self.is_diagonal else self._eigvals
        atoms, counts = np.unique(np.round(eigs, 12), return_counts=True)
        return SpectralDist(atoms, counts / eigs.size)


def two_atom_sigma(p: int, hi: float = 1.2, lo: float = 0.8) -> CovModel:
    """Diagonal model with p/2 entries hi and p/2 entries lo (p must be even)."""
    if p % 2 != 0:
        raise ValueError("p must be even for the two-atom model")
    return CovModel.diagonal_atoms([(hi, p // 2), (lo, p // 2)])


def sample_data(n: int, cov: CovModel, dist: Distribution, rng: np.random.Generator) -> np.ndarray:
    """n independent rows sqrt(Sigma) z with i.i.d. z entries from dist."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = sample(dist, n * cov.p, rng).reshape(n, cov.p)
    if cov.is_diagonal:
        return z * np.sqrt(cov.diag_vector)
    return z @ cov.sqrt_matrix()


def spatial_sign_cov(X: np.ndarray) -> np.ndarray:
    """B = (p/n) * sum_i x_i x_i' / ||x_i||^2 for the rows x_i of X.

    Symmetric, positive semidefinite, trace p, and invariant under positive
    rescaling of any row. A numerically zero row (norm below 1e-300) is an
    error: the supported populations put no mass at zero, so silently
    dropping such a row would bias B.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    if np.any(norms < 1e-300):
        raise ValueError("row with (numerically) zero norm")
    U = X / norms[:, None]
    B = (p / n) * (U.T @ U)
    return 0.5 * (B + B.T)


def sigma_tilde(cov: CovModel, tau: float) -> np.ndarray:
    """Adjusted population matrix for fourth moment tau.

    General form:

        Sigma - (2/p) Sigma^2 - ((tau-3)/p) S diag(Sigma) S
              + ((2 tr Sigma^2 + (tau-3) tr(Sigma o Sigma)) / p^2) Sigma

    with S = sqrt(Sigma) and (o) the entrywise product. For diagonal Sigma
    this collapses to Sigma + ((tau-1)/p) S ((tr Sigma^2 / p) I - Sigma) S;
    both are evaluated and cross-checked in that case. The trace is exactly p
    for any tau.
    """
    if not np.isfinite(tau) or tau <= 1:
        raise ValueError("tau must be finite and > 1")
    p = cov.p
    if cov.is_diagonal:
        d = cov.diag_vector
        tr_sq = float(np.sum(d * d))
        general = d - (2.0 / p) * d * d - ((tau - 3.0) / p) * d * d \
            + ((2.0 * tr_sq + (tau - 3.0) * tr_sq) / p**2) * d
        collapsed = d + ((tau - 1.0) / p) * d * (tr_sq / p - d)
        if np.max(np.abs(general - collapsed)) > 1e-12 * max(1.0, np.max(np.abs(general))):
            raise AssertionError("diagonal sigma_tilde forms disagree")
        return np.diag(general)
    m = cov._dense
    s = cov.sqrt_matrix()
    diag_m = np.diag(np.diag(m))
    tr_sq = float(np.sum(m * m))
    tr_hadamard = float(np.sum(np.diag(m) ** 2))
    out = (
        m
        - (2.0 / p) * (m @ m)
        - ((tau - 3.0) / p) * (s @ diag_m @ s)
        + ((2.0 * tr_sq + (tau - 3.0) * tr_hadamard) / p**2) * m
    )
    return 0.5 * (out + out.T)
