"""Spectral analysis of spatial-sign covariance matrices for heavy-tailed data.

The library covers, at desk scale:

- sampling from alpha-regularly-varying populations and evaluating their
  Laplace-transform moments (``distributions``),
- moments of self-normalized vectors by Monte Carlo and by a deterministic
  integral identity, plus quadratic-form statistics (``selfnorm``),
- population covariance models and the spatial-sign covariance matrix
  B = (p/n) sum x x' / ||x||^2 (``covariance``),
- the generalized Marchenko-Pastur law solved from its Stieltjes-transform
  fixed point (``mp_law``),
- empirical spectral distributions and Kolmogorov distances (``spectra``),
- the normal fluctuation of tr(B^2) around its adjusted centering (``clt``),
- a reproducible experiment runner with CSV/JSON outputs (``experiments``),
  also exposed as the ``signspectra`` command line tool.
"""

__version__ = "0.1.0"

from .covariance import (
    CovModel,
    SpectralDist,
    sample_data,
    sigma_tilde,
    spatial_sign_cov,
    two_atom_sigma,
)
from .clt import CltResult, clt_center, clt_experiment, clt_mean_var
from .distributions import (
    Distribution,
    Kind,
    damped_moment,
    gaussian,
    laplace,
    sample,
    student_t,
    sym_pareto,
)
from .errors import ConfigurationError, NumericError
from .experiments import ExperimentConfig, RunResult, run
from .mp_law import (
    GridSpec,
    MpSolution,
    density_cdf,
    mp_closed_form_density,
    mp_closed_form_stieltjes,
    mp_residual,
    solve_m,
)
from .seeding import derive_seed, derive_stream
from .selfnorm import (
    MomentEstimate,
    MomentSpec,
    integral_moment,
    mc_moment,
    quadform_stats,
    ratio_quadform_stats,
    self_normalize,
    theoretical_quadform_cov,
    theoretical_ratio_mean,
)
from .spectra import (
    EsdSample,
    Histogram,
    density_sup_deviation,
    eigenvalues_sym,
    histogram,
    kolmogorov_distance,
)

__all__ = [
    "CltResult",
    "ConfigurationError",
    "CovModel",
    "Distribution",
    "EsdSample",
    "ExperimentConfig",
    "GridSpec",
    "Histogram",
    "Kind",
    "MomentEstimate",
    "MomentSpec",
    "MpSolution",
    "NumericError",
    "RunResult",
    "SpectralDist",
    "clt_center",
    "clt_experiment",
    "clt_mean_var",
    "damped_moment",
    "density_cdf",
    "density_sup_deviation",
    "derive_seed",
    "derive_stream",
    "eigenvalues_sym",
    "gaussian",
    "histogram",
    "integral_moment",
    "kolmogorov_distance",
    "laplace",
    "mc_moment",
    "mp_closed_form_density",
    "mp_closed_form_stieltjes",
    "mp_residual",
    "quadform_stats",
    "ratio_quadform_stats",
    "run",
    "sample",
    "sample_data",
    "self_normalize",
    "sigma_tilde",
    "solve_m",
    "spatial_sign_cov",
    "student_t",
    "sym_pareto",
    "theoretical_quadform_cov",
    "theoretical_ratio_mean",
    "two_atom_sigma",
]
