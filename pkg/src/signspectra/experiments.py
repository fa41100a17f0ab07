"""Experiment runner: configuration, deterministic replication, persistence.

Each subcommand draws its replicates from streams derived as
(master seed, global replicate index), reduces them in index order, and
writes its tables atomically (temp file + rename), so a run is byte-for-byte
reproducible for any worker count and never leaves partial outputs behind.
Output files are named ``<subcommand>-<config hash>-<table>.<ext>`` so runs
with different configurations never collide.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .clt import clt_experiment
from .covariance import CovModel, SpectralDist, sample_data, spatial_sign_cov, two_atom_sigma
from .distributions import Distribution, gaussian, student_t, sym_pareto
from .errors import ConfigurationError
from .mp_law import GridSpec, MpSolution, density_cdf, default_grid
from .parallel import indexed_map
from .seeding import derive_stream
from .selfnorm import (
    MomentSpec,
    integral_moment,
    mc_moment,
    quadform_stats,
    theoretical_quadform_cov,
)
from .spectra import EsdSample, density_sup_deviation, histogram, kolmogorov_distance

SUBCOMMANDS = ("esd", "ks-curve", "clt", "mp-curve", "moments", "quadform")


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    n: int | None = None
    p: int | None = None
    alpha: float | None = None
    alphas: tuple[float, ...] | None = None
    ps: tuple[int, ...] | None = None
    y: float | None = None
    dist: str = "t"
    theta: float = 1.0
    raw: bool = False
    sigma: str = "identity"
    reps: int = 1
    seed: int = 0
    out: str = "."
    format: str = "csv"
    grid: tuple[float, float, int] | None = None
    bins: int = 50
    spec: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigurationError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json")
        if self.reps < 1:
            raise ConfigurationError("reps must be >= 1")
        for name in ("n", "p"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigurationError("alpha must be positive")
        if self.dist not in ("t", "pareto", "gaussian"):
            raise ConfigurationError(f"unknown distribution {self.dist!r}")
        _parse_sigma_spec(self.sigma)  # abort on malformed spec before any compute
        required = {
            "esd": ("n", "p"),
            "ks-curve": ("alphas", "ps", "y"),
            "clt": ("n", "p"),
            "mp-curve": ("y",),
            "moments": ("p", "spec"),
            "quadform": ("p",),
        }[self.subcommand]
        for name in required:
            if getattr(self, name) is None:
                flag = {"alphas": "alpha", "ps": "p"}.get(name, name)
                raise ConfigurationError(f"{self.subcommand} requires --{flag}")
        needs_alpha = self.subcommand in ("esd", "clt", "moments", "quadform")
        if needs_alpha and self.dist != "gaussian" and self.alpha is None:
            raise ConfigurationError(f"{self.subcommand} requires --alpha for dist {self.dist!r}")

    @property
    def y_n(self) -> float | None:
        if self.n and self.p:
            return self.p / self.n
        return None

    def as_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kwargs = dict(d)
        for name in ("alphas", "grid", "spec"):
            if kwargs.get(name) is not None:
                kwargs[name] = tuple(kwargs[name])
        if kwargs.get("ps") is not None:
            kwargs["ps"] = tuple(int(v) for v in kwargs["ps"])
        return cls(**kwargs)

    def config_hash(self) -> str:
        payload = {k: v for k, v in self.as_dict().items() if k != "out"}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:8]


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    metrics: dict
    files: list
    wall_time_s: float
    version: str
    seed: int


def build_distribution(config: ExperimentConfig, alpha: float | None = None) -> Distribution:
    a = config.alpha if alpha is None else alpha
    standardized = None if not config.raw else False
    if config.dist == "gaussian":
        return gaussian()
    if a is None:
        raise ConfigurationError("--alpha is required for t and pareto populations")
    if config.dist == "t":
        return student_t(a, standardized=standardized)
    return sym_pareto(a, theta=config.theta, standardized=standardized)


def _parse_sigma_spec(spec: str):
    """Validate and decompose a sigma spec string; returns (kind, payload)."""
    if spec == "identity":
        return ("identity", None)
    if spec.startswith("two-atom:"):
        parts = spec[len("two-atom:"):].split(",")
        if len(parts) != 2:
            raise ConfigurationError("two-atom sigma needs exactly two values")
        try:
            hi, lo = (float(v) for v in parts)
        except ValueError as exc:
            raise ConfigurationError(f"bad two-atom values in {spec!r}") from exc
        if hi <= 0 or lo <= 0:
            raise ConfigurationError("two-atom values must be positive")
        return ("two-atom", (hi, lo))
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        if not path:
            raise ConfigurationError("file sigma needs a path")
        return ("file", path)
    raise ConfigurationError(f"unknown sigma spec {spec!r}")


def build_cov(spec: str, p: int) -> CovModel:
    kind, payload = _parse_sigma_spec(spec)
    if kind == "identity":
        return CovModel.identity(p)
    if kind == "two-atom":
        hi, lo = payload
        if p % 2 != 0:
            raise ConfigurationError("two-atom sigma requires even p")
        return two_atom_sigma(p, hi, lo)
    matrix = np.loadtxt(payload, delimiter=",", ndmin=2)
    if matrix.shape != (p, p):
        raise ConfigurationError(
            f"sigma file has shape {matrix.shape}, expected ({p}, {p})"
        )
    return CovModel.dense(matrix)


def spectral_dist_of(spec: str) -> SpectralDist:
    """Spectral distribution for a sigma spec without fixing p (mp-curve)."""
    kind, payload = _parse_sigma_spec(spec)
    if kind == "identity":
        return SpectralDist.point_mass(1.0)
    if kind == "two-atom":
        return two_atom_sigma(2, *payload).spectral_dist()
    return CovModel.dense(np.loadtxt(payload, delimiter=",", ndmin=2)).spectral_dist()


# ---------------------------------------------------------------------------
# atomic persistence

def _format_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_table(path_base: Path, header: list, rows: list, fmt: str) -> Path:
    if fmt == "csv":
        path = path_base.with_suffix(".csv")
        lines = [",".join(header)]
        lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
        _atomic_write(path, "\n".join(lines) + "\n")
    else:
        path = path_base.with_suffix(".json")
        payload = {"columns": header, "rows": [[_json_cell(v) for v in row] for row in rows]}
        _atomic_write(path, json.dumps(payload, sort_keys=True) + "\n")
    return path


def _json_cell(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _write_json(path: Path, payload: dict) -> Path:
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# replicate worker functions (module-level for process pools)

def _esd_replicate(payload, index: int) -> np.ndarray:
    n, dist, cov, master_seed = payload
    rng = derive_stream(master_seed, index)
    X = sample_data(n, cov, dist, rng)
    return np.sort(np.linalg.eigvalsh(spatial_sign_cov(X)))


def _ks_replicate(payload, gindex: int) -> tuple:
    cells, reps, master_seed, config = payload
    cell = cells[gindex // reps]
    n, p, alpha = cell
    dist = build_distribution(config, alpha)
    cov = build_cov(config.sigma, p)
    rng = derive_stream(master_seed, gindex)
    X = sample_data(n, cov, dist, rng)
    eigs = np.sort(np.linalg.eigvalsh(spatial_sign_cov(X)))
    return (cell, gindex % reps, eigs)


# ---------------------------------------------------------------------------
# subcommand implementations

def _run_esd(config: ExperimentConfig, outdir: Path, prefix: str):
    dist = build_distribution(config)
    cov = build_cov(config.sigma, config.p)
    eig_arrays = indexed_map(_esd_replicate, (config.n, dist, cov, config.seed), config.reps)
    esds = [
        EsdSample(e, {"replicate": i, "n": config.n, "p": config.p})
        for i, e in enumerate(eig_arrays)
    ]
    rows = [
        (i, j, float(v))
        for i, e in enumerate(eig_arrays)
        for j, v in enumerate(e)
    ]
    files = [_write_table(outdir / f"{prefix}-eigenvalues", ["replicate", "index", "eigenvalue"], rows, config.format)]

    hist = histogram(esds, config.bins)
    hist_rows = [
        (float(hist.edges[i]), float(hist.edges[i + 1]), int(hist.counts[i]), float(hist.density[i]))
        for i in range(hist.counts.size)
    ]
    files.append(
        _write_table(outdir / f"{prefix}-histogram", ["bin_left", "bin_right", "count", "density"], hist_rows, config.format)
    )
    law = density_cdf(config.p / config.n, cov.spectral_dist())
    metrics = {"hist_sup_deviation": density_sup_deviation(hist, law)}
    return metrics, files


def _run_ks_curve(config: ExperimentConfig, outdir: Path, prefix: str):
    cells = [
        (round(p / config.y), p, alpha) for p in config.ps for alpha in config.alphas
    ]
    payload = (cells, config.reps, config.seed, config)
    results = indexed_map(_ks_replicate, payload, len(cells) * config.reps)

    # One law per distinct p; the grid is stretched to cover every eigenvalue
    # seen at that p so heavy-tail mismatch cases still get an exact distance.
    laws = {}
    for p in config.ps:
        n = round(p / config.y)
        H = build_cov(config.sigma, p).spectral_dist()
        top = max(r[2][-1] for r in results if r[0][1] == p)
        base = default_grid(p / n, H)
        spec = GridSpec(base.x_min, max(base.x_max, top + 0.1), base.points)
        laws[p] = density_cdf(p / n, H, spec)

    rows = []
    metrics = {}
    per_cell: dict = {}
    for (cell, rep, eigs) in results:
        n, p, alpha = cell
        d = kolmogorov_distance(EsdSample(eigs), laws[p])
        rows.append((p, n, float(alpha), rep, d))
        per_cell.setdefault(cell, []).append(d)
    for (n, p, alpha), ds in per_cell.items():
        metrics[f"median_distance_p{p}_alpha{alpha:g}"] = float(np.median(ds))
    files = [
        _write_table(outdir / f"{prefix}-distances", ["p", "n", "alpha", "replicate", "distance"], rows, config.format)
    ]
    return metrics, files


def _run_clt(config: ExperimentConfig, outdir: Path, prefix: str):
    dist = build_distribution(config)
    cov = build_cov(config.sigma, config.p)
    result = clt_experiment(config.n, config.p, dist, cov, config.reps, config.seed)
    rows = [(i, float(s)) for i, s in enumerate(result.statistics)]
    files = [_write_table(outdir / f"{prefix}-statistics", ["replicate", "statistic"], rows, config.format)]
    summary = {
        "mu": result.mu,
        "sigma2": result.sigma2,
        "sample_mean": result.sample_mean,
        "sample_var": result.sample_var,
        "ks_stat": result.ks_stat,
        "ks_pass": result.ks_pass,
        "meta": result.meta,
        "config": config.as_dict(),
    }
    files.append(_write_json(outdir / f"{prefix}-clt.json", summary))
    metrics = {
        "mu": result.mu,
        "sigma2": result.sigma2,
        "sample_mean": result.sample_mean,
        "sample_var": result.sample_var,
        "ks_stat": result.ks_stat,
        "ks_pass": float(result.ks_pass),
    }
    return metrics, files


def _run_mp_curve(config: ExperimentConfig, outdir: Path, prefix: str):
    H = spectral_dist_of(config.sigma)
    spec = GridSpec(*config.grid) if config.grid else None
    sol = density_cdf(config.y, H, spec)
    rows = [
        (float(x), float(d), float(c))
        for x, d, c in zip(sol.grid, sol.density, sol.cdf)
    ]
    files = [_write_table(outdir / f"{prefix}-curve", ["x", "density", "cdf"], rows, config.format)]
    sidecar = {
        "y": sol.y,
        "atoms": [float(a) for a in H.atoms],
        "weights": [float(w) for w in H.weights],
        "zero_atom": sol.zero_atom,
        "max_residual": sol.max_residual,
    }
    files.append(_write_json(outdir / f"{prefix}-law.json", sidecar))
    metrics = {"zero_atom": sol.zero_atom, "max_residual": sol.max_residual}
    return metrics, files


def _run_moments(config: ExperimentConfig, outdir: Path, prefix: str):
    dist = build_distribution(config)
    spec = MomentSpec(config.spec, config.p)
    mc = mc_moment(dist, spec, config.reps, derive_stream(config.seed, 0))
    rows = [("monte_carlo", mc.value, mc.stderr)]
    metrics = {"mc_value": mc.value, "mc_stderr": mc.stderr}
    if all(e % 2 == 0 for e in spec.exponents):
        integ = integral_moment(dist, spec)
        rows.append(("integral", integ.value, integ.stderr))
        metrics["integral_value"] = integ.value
        if mc.stderr > 0:
            metrics["z_score"] = (mc.value - integ.value) / mc.stderr
    files = [_write_table(outdir / f"{prefix}-moments", ["method", "value", "stderr"], rows, config.format)]
    return metrics, files


def _run_quadform(config: ExperimentConfig, outdir: Path, prefix: str):
    dist = build_distribution(config)
    tau = dist.tau
    if not math.isfinite(tau):
        raise ConfigurationError("quadform theory needs a finite fourth moment (alpha > 4)")
    p = config.p
    rng = derive_stream(config.seed, 0)
    G = rng.standard_normal((p, p))
    A = 0.5 * (G + G.T)
    A /= np.linalg.norm(A, 2)
    st = quadform_stats(dist, p, A, A, config.reps, derive_stream(config.seed, 1))
    theory_mean = float(np.trace(A)) / p
    theory_var = theoretical_quadform_cov(A, A, tau, p)
    rows = [
        ("mean", st.mean_a, st.mean_a_stderr, theory_mean),
        ("var", st.var_a, st.var_a_stderr, theory_var),
    ]
    files = [
        _write_table(outdir / f"{prefix}-quadform", ["quantity", "estimate", "stderr", "theory"], rows, config.format)
    ]
    metrics = {
        "mc_mean": st.mean_a,
        "theory_mean": theory_mean,
        "mc_var": st.var_a,
        "var_stderr": st.var_a_stderr,
        "theory_var": theory_var,
    }
    return metrics, files


_RUNNERS = {
    "esd": _run_esd,
    "ks-curve": _run_ks_curve,
    "clt": _run_clt,
    "mp-curve": _run_mp_curve,
    "moments": _run_moments,
    "quadform": _run_quadform,
}


def run(config: ExperimentConfig) -> RunResult:
    """Dispatch a configuration and persist its outputs."""
    start = time.perf_counter()
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = f"{config.subcommand}-{config.config_hash()}"
    metrics, files = _RUNNERS[config.subcommand](config, outdir, prefix)
    wall = time.perf_counter() - start
    result = RunResult(
        config=config,
        metrics=metrics,
        files=[str(f) for f in files],
        wall_time_s=wall,
        version=__version__,
        seed=config.seed,
    )
    summary = {
        "config": config.as_dict(),
        "metrics": metrics,
        "files": result.files,
        "wall_time_s": wall,
        "version": __version__,
        "seed": config.seed,
    }
    _write_json(outdir / f"{prefix}-summary.json", summary)
    return result
