"""Generalized Marchenko-Pastur law via its Stieltjes-transform fixed point.

For aspect ratio y and a discrete population spectral distribution H, the
Stieltjes transform m(z) of the limiting spectral distribution is the unique
upper-half-plane solution of

    m = sum_j w_j / (t_j (1 - y - y z m) - z).

``solve_m`` finds it by damped fixed-point iteration; ``density_cdf``
recovers the density as Im m(x + i eps) / pi with a one-step Richardson
extrapolation in eps, then accumulates the CDF. The classical closed forms
for H = delta_1 (``mp_closed_form_density``, ``mp_closed_form_stieltjes``)
are kept as independent validation oracles and are never used by the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import SpectralDist
from .errors import NumericError

_FP_TOL = 1e-12  # single-point solves
_GRID_TOL = 2.5e-11  # grid solves; comfortably below the 1e-8 per-point contract
_MAX_ITER = 100_000
_STALL_WINDOW = 10_000
_PICARD_BUDGET = 2_000  # damped-iteration phase before the Newton finisher
_EPS32 = 32 * np.finfo(float).eps  # per-point rounding floor scale


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    points: int

    def __post_init__(self):
        if self.x_min < 0:
            raise ValueError("x_min must be >= 0")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.points < 100:
            raise ValueError("points must be >= 100")


@dataclass(frozen=True)
class MpSolution:
    """Solved law on a grid: transform values, density, CDF, and zero atom."""

    y: float
    H: SpectralDist
    grid: np.ndarray
    m_values: np.ndarray  # m(x + i eps/2) per grid point
    density: np.ndarray
    cdf: np.ndarray
    zero_atom: float
    eps: float
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    def companion_m(self) -> np.ndarray:
        """Transform of the n-dimensional companion matrix, -(1-y)/z + y m(z)."""
        z = self.grid + 1j * (self.eps / 2.0)
        return -(1.0 - self.y) / z + self.y * self.m_values


def _fixed_point_map(m, z, y, atoms, weights):
    """F(m) = sum_j w_j / (t_j (1 - y - y z m) - z), vectorized over m, z."""
    base = 1.0 - y - y * z * m
    return np.sum(weights[:, None] / (atoms[:, None] * base[None, :] - z[None, :]), axis=0)


def mp_residual(m, z, y, H: SpectralDist):
    """|m - F(m)|, the defining-equation residual."""
    m = np.atleast_1d(np.asarray(m, dtype=complex))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.abs(m - _fixed_point_map(m, z, y, H.atoms, H.weights))


def _map_derivative(m, z, y, atoms, weights):
    """dF/dm = sum_j w_j t_j y z / (t_j (1 - y - y z m) - z)^2."""
    base = 1.0 - y - y * z * m
    denom = atoms[:, None] * base[None, :] - z[None, :]
    return np.sum(weights[:, None] * atoms[:, None] * (y * z)[None, :] / denom**2, axis=0)


def _solve_batch(z, y, H, m0, tol=_FP_TOL, max_iter=_MAX_ITER, picard_iters=None):
    """Solve the fixed point for every z in a batch at once.

    Phase 1 is the damped iteration m <- (1-w) m + w F(m), w = 0.5, with w
    halved whenever the worst active residual stalls for 10^4 iterations;
    converged points retire from the working set. Points still active after
    the damped budget switch to a safeguarded Newton finisher on
    g(m) = m - F(m): grid nodes that land within ~1e-5 of a spectral edge
    contract under plain damping at a rate proportional to that distance and
    cannot meet the residual contract inside the iteration budget, while a
    Newton step there converges quadratically (g' stays away from 0 for
    Im z > 0). Newton steps that leave the upper half plane or fail to
    shrink |g| fall back to a damped step.
    """
    atoms, weights = H.atoms, H.weights
    out_m = np.array(m0, dtype=complex, copy=True)
    out_r = np.empty(out_m.size, dtype=float)
    idx = np.arange(out_m.size)
    zz = np.asarray(z, dtype=complex)
    mm = out_m.copy()
    omega = 0.5
    best = np.inf
    stall = 0
    picard = min(_PICARD_BUDGET if picard_iters is None else picard_iters, max_iter)
    for _ in range(picard):
        f = _fixed_point_map(mm, zz, y, atoms, weights)
        resid = np.abs(mm - f)
        done = resid <= np.maximum(tol, _EPS32 * np.abs(mm))
        if done.any():
            out_m[idx[done]] = mm[done]
            out_r[idx[done]] = resid[done]
            keep = ~done
            if not keep.any():
                return out_m, out_r
            idx, zz, mm, f = idx[keep], zz[keep], mm[keep], f[keep]
            best, stall = np.inf, 0
        mm = (1.0 - omega) * mm + omega * f
        worst = float(resid.max())
        if worst < best * (1.0 - 1e-12):
            best, stall = worst, 0
        else:
            stall += 1
            if stall >= _STALL_WINDOW:
                omega *= 0.5
                stall = 0
    for _ in range(max_iter - picard):
        f = _fixed_point_map(mm, zz, y, atoms, weights)
        g = mm - f
        resid = np.abs(g)
        done = resid <= np.maximum(tol, _EPS32 * np.abs(mm))
        if done.any():
            out_m[idx[done]] = mm[done]
            out_r[idx[done]] = resid[done]
            keep = ~done
            if not keep.any():
                return out_m, out_r
            idx, zz, mm, f, g, resid = (
                idx[keep], zz[keep], mm[keep], f[keep], g[keep], resid[keep]
            )
        fp = _map_derivative(mm, zz, y, atoms, weights)
        denom = 1.0 - fp
        safe = np.abs(denom) > 1e-30
        newton = np.where(safe, mm - g / np.where(safe, denom, 1.0), mm)
        f_new = _fixed_point_map(newton, zz, y, atoms, weights)
        ok = (newton.imag > 0) & (np.abs(newton - f_new) < resid)
        mm = np.where(ok, newton, 0.5 * mm + 0.5 * f)
    f = _fixed_point_map(mm, zz, y, atoms, weights)
    resid = np.abs(mm - f)
    if (resid > np.maximum(tol, _EPS32 * np.abs(mm))).any():
        raise NumericError(
            f"fixed-point iteration budget exhausted; worst residual {resid.max():.3g}"
        )
    out_m[idx], out_r[idx] = mm, resid
    return out_m, out_r


def _companion_start(z, y, H, iters=4000):
    """Approximate m via the companion transform's damped iteration.

    The companion form b <- -1/(z - y sum_j w_j t_j / (1 + t_j b)) is a
    self-map of the upper half plane, so its damped iteration cannot cross
    into the wrong branch. Used as a recovery start when iterating the raw
    equation converged to a root with Im m <= 0 (which happens for z over a
    spectral gap, e.g. below the support when y > 1).
    """
    atoms, weights = H.atoms, H.weights
    z = np.asarray(z, dtype=complex)
    b = -1.0 / z
    for _ in range(iters):
        s = np.sum(
            weights[:, None] * atoms[:, None] / (1.0 + atoms[:, None] * b[None, :]), axis=0
        )
        b = 0.5 * b + 0.5 * (-1.0 / (z - y * s))
    return (b + (1.0 - y) / z) / y


def solve_m(z: complex, y: float, H: SpectralDist, m0: complex | None = None) -> complex:
    """Upper-half-plane solution m(z) of the defining equation at one point.

    Starts from m0 = -1/z unless a warm start is supplied. A converged root
    with Im m <= 0 (wrong branch) triggers one retry from a perturbed start.
    """
    if not z.imag > 0:
        raise ValueError("z must have positive imaginary part")
    if not y > 0:
        raise ValueError("y must be positive")
    start = np.array([(-1.0 / z) if m0 is None else m0], dtype=complex)
    zs = np.array([z], dtype=complex)
    m, _ = _solve_batch(zs, y, H, start)
    if m[0].imag <= 0:
        m, _ = _solve_batch(zs, y, H, start + 0.5j)
    if m[0].imag <= 0:
        m, _ = _solve_batch(zs, y, H, _companion_start(zs, y, H), picard_iters=0)
        if m[0].imag <= 0:
            raise NumericError("converged to a root outside the upper half plane")
    return complex(m[0])


def _solve_grid(z, y, H, m0=None, chunk=2048, tol=_GRID_TOL):
    """Solve along a grid in chunks, warm-starting each chunk from the last.

    The fixed point is unique in the upper half plane, so the result does not
    depend on the chunking; warm starts only cut the iteration count.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.size, dtype=complex)
    resid = np.empty(z.size, dtype=float)
    carry = None
    for lo in range(0, z.size, chunk):
        hi = min(lo + chunk, z.size)
        if m0 is not None:
            start = np.asarray(m0[lo:hi], dtype=complex)
        elif carry is None:
            start = -1.0 / z[lo:hi]
        else:
            start = np.full(hi - lo, carry, dtype=complex)
        m, r = _solve_batch(z[lo:hi], y, H, start, tol=tol)
        flipped = m.imag <= 0
        if flipped.any():
            # recover through the companion transform and polish with Newton
            # directly; the damped phase can leave the root's basin near the
            # zero-atom pole
            zf = z[lo:hi][flipped]
            m2, r2 = _solve_batch(zf, y, H, _companion_start(zf, y, H), tol=tol, picard_iters=0)
            if (m2.imag <= 0).any():
                raise NumericError("converged to a root outside the upper half plane")
            m[flipped], r[flipped] = m2, r2
        out[lo:hi], resid[lo:hi] = m, r
        carry = m[-1]
    return out, resid


def default_grid(y: float, H: SpectralDist, points: int = 2000) -> GridSpec:
    """Bracket of the support from the single-atom endpoints scaled by H's range."""
    a_est = (1.0 - math.sqrt(y)) ** 2 * float(H.atoms.min())
    b_est = (1.0 + math.sqrt(y)) ** 2 * float(H.atoms.max())
    return GridSpec(max(0.0, a_est - 0.1), b_est + 0.1, points)


def density_cdf(y: float, H: SpectralDist, grid_spec: GridSpec | None = None) -> MpSolution:
    """Density and CDF of the law on a grid.

    The density at x is Im m(x + i eps)/pi refined by one Richardson step
    (eps and eps/2, eps = 1e-6 of the grid width). The CDF accumulates the
    density by the trapezoid rule on top of the zero atom max(0, 1 - 1/y);
    the result is renormalized to total mass 1 provided the raw integral is
    within 1% of the continuous mass, and a grid-too-coarse error is raised
    otherwise.
    """
    if not y > 0:
        raise ValueError("y must be positive")
    spec = grid_spec or default_grid(y, H)
    zero_atom = max(0.0, 1.0 - 1.0 / y)
    x_min = spec.x_min
    if zero_atom > 0.0:
        # The transform has a pole at the origin when y > 1 (the zero atom),
        # where no double-precision m can meet the residual contract and the
        # extrapolated density would re-count atom mass the CDF already
        # carries. The continuous spectrum is bounded away from 0, so clip
        # the grid a quarter of the way to its estimated lower edge.
        guard = 0.25 * (1.0 - math.sqrt(y)) ** 2 * float(H.atoms.min())
        x_min = max(x_min, guard)
        if x_min >= spec.x_max:
            raise ValueError("grid window lies entirely below the continuous spectrum")
    grid = np.linspace(x_min, spec.x_max, spec.points)
    if x_min == 0.0:
        # y = 1 puts an integrable x^{-1/2} edge at the origin; a sqrt-graded
        # prefix inside the first uniform cell keeps the trapezoid mass honest.
        k = np.arange(1, 16)
        grid = np.unique(np.concatenate([grid, grid[1] * (k / 16.0) ** 2]))
    eps = 1e-6 * (spec.x_max - x_min)

    m_eps, _ = _solve_grid(grid + 1j * eps, y, H)
    m_half, resid = _solve_grid(grid + 1j * (eps / 2.0), y, H, m0=m_eps)

    d_eps = m_eps.imag / math.pi
    d_half = m_half.imag / math.pi
    density = np.maximum(2.0 * d_half - d_eps, 0.0)

    raw_mass = float(np.trapezoid(density, grid))
    target = 1.0 - zero_atom
    if abs(raw_mass - target) > 0.01 * target:
        raise NumericError(
            f"density mass {raw_mass:.4f} deviates from {target:.4g} by more than 1%; "
            "widen the grid or increase its resolution"
        )
    density = density * (target / raw_mass)

    dx = np.diff(grid)
    cdf = zero_atom + np.concatenate(
        [[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * dx)]
    )
    return MpSolution(
        y=y, H=H, grid=grid, m_values=m_half, density=density, cdf=cdf,
        zero_atom=zero_atom, eps=eps, residuals=resid,
    )


def mp_closed_form_stieltjes(z: complex, y: float) -> complex:
    """Oracle: Stieltjes transform for H = delta_1 by the quadratic formula.

    Root of y z m^2 - (1 - y - z) m + 1 = 0 with Im m > 0.
    """
    disc = np.sqrt(complex((1.0 - y - z) ** 2 - 4.0 * y * z))
    for sign in (1.0, -1.0):
        m = ((1.0 - y - z) + sign * disc) / (2.0 * y * z)
        if m.imag > 0:
            return m
    raise NumericError("no upper-half-plane root (is Im z > 0?)")


def mp_closed_form_density(x, y: float):
    """Oracle: classical density for H = delta_1, zero outside the support."""
    if not y > 0:
        raise ValueError("y must be positive")
    x = np.asarray(x, dtype=float)
    a = (1.0 - math.sqrt(y)) ** 2
    b = (1.0 + math.sqrt(y)) ** 2
    inside = (x > a) & (x < b)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (2.0 * math.pi * xi * y)
    return out if out.ndim else float(out)
