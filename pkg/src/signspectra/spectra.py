"""Empirical spectral distributions and their distance to a limiting law.

``kolmogorov_distance`` returns the exact sup-norm distance between the step
CDF of an eigenvalue sample and a law made of a continuous part (linearly
interpolated from its grid) plus a point mass at zero. The law's left limit
at zero is 0, not the atom mass, which is what makes the statistic exact for
p > n samples whose zero eigenvalues face the atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .mp_law import MpSolution


@dataclass(frozen=True)
class EsdSample:
    """Sorted eigenvalue sample with provenance metadata."""

    eigenvalues: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("eigenvalues must be a nonempty vector")
        if np.any(np.diff(vals) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def p(self) -> int:
        return self.eigenvalues.size


def eigenvalues_sym(M: np.ndarray, return_vectors: bool = False):
    """All eigenvalues of a symmetric matrix, ascending.

    With ``return_vectors`` the (eigenvalues, vectors) pair is returned after
    verifying the reconstruction ||M - Q L Q'||_F <= 1e-8 ||M||_F.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(M - M.T)) > 1e-10 * max(1.0, np.max(np.abs(M))):
        raise ValueError("matrix must be symmetric")
    if not return_vectors:
        return np.linalg.eigvalsh(M)
    vals, vecs = np.linalg.eigh(M)
    norm = np.linalg.norm(M)
    if np.linalg.norm(M - (vecs * vals) @ vecs.T) > 1e-8 * max(norm, 1e-300):
        raise NumericError("eigendecomposition failed its reconstruction check")
    return vals, vecs


def _law_cdf(x: np.ndarray, law: MpSolution, left_limit: bool = False) -> np.ndarray:
    """Law CDF at x: 0 below zero, the atom on [0, grid start), interpolated above.

    With ``left_limit`` the value just below x is returned, which differs from
    the CDF only at the zero atom.
    """
    out = np.interp(x, law.grid, law.cdf)
    out = np.where(x < law.grid[0], law.zero_atom, out)
    if left_limit:
        out = np.where(x <= 0.0, 0.0, out)
    else:
        out = np.where(x < 0.0, 0.0, out)
    return out


def kolmogorov_distance(esd: EsdSample, law: MpSolution, margin: float = 0.05) -> float:
    """Exact sup-norm distance between the sample CDF and the law.

    D = max_i max(i/p - F(l_i), F(l_i^-) - (i-1)/p), with F interpolated from
    the law's grid and the zero atom charged at x = 0. Eigenvalues within
    1e-8 * p of zero are snapped to zero before evaluation (B is positive
    semidefinite only up to that rounding). Eigenvalues outside the grid by
    more than ``margin`` (times the grid width, on the high side; absolute
    below zero) raise a range error.
    """
    lam = esd.eigenvalues.copy()
    p = lam.size
    lam[np.abs(lam) <= 1e-8 * p] = 0.0
    width = law.grid[-1] - law.grid[0]
    if lam[-1] > law.grid[-1] + margin * width or lam[0] < -margin * width:
        raise ValueError(
            f"eigenvalue range [{lam[0]:.4g}, {lam[-1]:.4g}] outside law grid "
            f"[{law.grid[0]:.4g}, {law.grid[-1]:.4g}]"
        )
    i = np.arange(1, p + 1)
    upper = i / p - _law_cdf(lam, law)
    lower = _law_cdf(lam, law, left_limit=True) - (i - 1) / p
    return float(min(max(upper.max(), lower.max(), 0.0), 1.0))


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def histogram(esds: list[EsdSample], bins: int = 50) -> Histogram:
    """Pooled eigenvalue histogram over replications, density normalized to 1."""
    if bins < 10:
        raise ValueError("bins must be >= 10")
    pooled = np.concatenate([e.eigenvalues for e in esds])
    counts, edges = np.histogram(pooled, bins=bins)
    widths = np.diff(edges)
    density = counts / (counts.sum() * widths)
    return Histogram(edges=edges, counts=counts, density=density)


def density_sup_deviation(hist: Histogram, law: MpSolution) -> float:
    """Sup over bins of |histogram density - bin-averaged law density|.

    The law is averaged over each bin from its CDF (a histogram is itself a
    bin average, so comparing against pointwise density values would report
    spurious O(bin width) deviations wherever the density is steep, e.g. at
    support edges). Bins outside the law's grid compare against zero; a bin
    containing the zero atom picks up its mass through the CDF jump.
    """
    F = _law_cdf(hist.edges, law)
    ref = np.diff(F) / np.diff(hist.edges)
    return float(np.max(np.abs(hist.density - ref)))
