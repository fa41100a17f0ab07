"""Acceptance suite: one test per criterion, printing a PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline.
Criterion 5's mean and KS sub-checks are known to fail: the asymptotic
fourth-moment correction the centering relies on converges like p^(-1/4)
and is only about half materialized at p = 200 for tail index 4.5, so the
finite-size sample mean sits near -0.5 rather than the asymptotic -1.04.
The variance and runtime sub-checks pass.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

import signspectra as ss
from signspectra.covariance import SpectralDist, sample_data, spatial_sign_cov, two_atom_sigma
from signspectra.experiments import ExperimentConfig, run, _esd_replicate
from signspectra.parallel import indexed_map
from signspectra.seeding import derive_stream
from signspectra.selfnorm import (
    MomentSpec,
    integral_moment,
    mc_moment,
    quadform_stats,
    theoretical_quadform_cov,
)
from signspectra.spectra import EsdSample, density_sup_deviation, histogram

H_POINT = SpectralDist.point_mass(1.0)
H_TWO_ATOM = SpectralDist(np.array([1.2, 0.8]), np.array([0.5, 0.5]))


def report(num, ok, detail):
    print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def test_criterion_01_mp_solver_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst_m = 0.0
    for y in (0.25, 0.5, 1.0):
        for _ in range(50):
            z = complex(rng.uniform(-2.0, 5.0), 10 ** rng.uniform(-4, 1))
            worst_m = max(worst_m, abs(ss.solve_m(z, y, H_POINT) - ss.mp_closed_form_stieltjes(z, y)))
    worst_d = 0.0
    for y in (0.25, 0.5, 1.0):
        sol = ss.density_cdf(y, H_POINT)
        a, b = (1 - math.sqrt(y)) ** 2, (1 + math.sqrt(y)) ** 2
        w = b - a
        inside = (sol.grid > a + 0.05 * w) & (sol.grid < b - 0.05 * w)
        ref = ss.mp_closed_form_density(sol.grid[inside], y)
        worst_d = max(worst_d, float(np.max(np.abs(sol.density[inside] - ref))))
    elapsed = time.perf_counter() - start
    ok = worst_m < 1e-9 and worst_d < 1e-3 and elapsed < 5.0
    assert report(
        1, ok,
        f"m vs closed form {worst_m:.2e} (<1e-9), density sup {worst_d:.2e} (<1e-3), {elapsed:.1f}s (<5s)",
    )


def test_criterion_02_two_atom_equation_residual():
    start = time.perf_counter()
    sol = ss.density_cdf(0.5, H_TWO_ATOM)
    z = sol.grid + 1j * (sol.eps / 2)
    m = sol.m_values
    base = 1 - 0.5 - 0.5 * z * m
    resid = np.abs(2 * m - 1 / (1.2 * base - z) - 1 / (0.8 * base - z))
    elapsed = time.perf_counter() - start
    ok = float(resid.max()) < 1e-10 and elapsed < 5.0
    assert report(2, ok, f"max residual {resid.max():.2e} (<1e-10) over {z.size} points, {elapsed:.1f}s (<5s)")


def test_criterion_03_esd_histogram_reproduction():
    start = time.perf_counter()
    n, p, reps, bins = 400, 200, 200, 50
    cov = two_atom_sigma(p)
    law = ss.density_cdf(p / n, cov.spectral_dist())
    devs = {}
    for alpha in (2.0, 4.0, 0.5):
        dist = ss.student_t(alpha, standardized=(alpha > 2))
        eigs = indexed_map(_esd_replicate, (n, dist, cov, 7), reps)
        hist = histogram([EsdSample(e) for e in eigs], bins)
        devs[alpha] = density_sup_deviation(hist, law)
    elapsed = time.perf_counter() - start
    ok = devs[2.0] < 0.1 and devs[4.0] < 0.1 and devs[0.5] > 0.1 and elapsed < 180
    assert report(
        3, ok,
        f"sup dev alpha2={devs[2.0]:.3f} alpha4={devs[4.0]:.3f} (<0.1), "
        f"alpha0.5={devs[0.5]:.3f} (>0.1), {elapsed:.0f}s (<180s)",
    )


def test_criterion_04_ks_distance_trend(tmp_path):
    start = time.perf_counter()
    base = ExperimentConfig(
        subcommand="ks-curve", alphas=(2.0, 2.5, 3.0), ps=(200, 800, 2000),
        y=0.5, dist="t", sigma="two-atom:1.2,0.8", reps=10, seed=7, out=str(tmp_path),
    )
    m1 = run(base).metrics
    heavy = ExperimentConfig(
        subcommand="ks-curve", alphas=(0.5,), ps=(2000,), y=0.5, dist="t",
        sigma="two-atom:1.2,0.8", reps=10, seed=7, out=str(tmp_path),
    )
    m2 = run(heavy).metrics
    elapsed = time.perf_counter() - start

    decreasing = all(
        m1[f"median_distance_p200_alpha{a:g}"]
        > m1[f"median_distance_p800_alpha{a:g}"]
        > m1[f"median_distance_p2000_alpha{a:g}"]
        for a in (2.0, 2.5, 3.0)
    )
    ratio = m2["median_distance_p2000_alpha0.5"] / m1["median_distance_p2000_alpha3"]
    ok = decreasing and ratio > 3.0 and elapsed < 600
    assert report(
        4, ok,
        f"medians strictly decreasing in p for alpha 2,2.5,3: {decreasing}; "
        f"alpha0.5/alpha3 ratio at p=2000 = {ratio:.1f} (>3), {elapsed:.0f}s (<600s)",
    )


def test_criterion_05_clt_reproduction():
    start = time.perf_counter()
    res = ss.clt_experiment(200, 200, ss.student_t(4.5), two_atom_sigma(200), 1000, 7)
    elapsed = time.perf_counter() - start
    mean_ok = abs(res.sample_mean - (-1.04)) <= 0.3
    var_ok = abs(res.sample_var - 6.39) <= 0.25 * 6.39
    ks_ok = res.ks_pass
    ok = mean_ok and var_ok and ks_ok and elapsed < 300
    report(
        5, ok,
        f"mean {res.sample_mean:.3f} in -1.04+-0.3: {mean_ok}; "
        f"var {res.sample_var:.3f} in 6.39+-25%: {var_ok}; "
        f"KS {res.ks_stat:.4f} < {1.6276 / math.sqrt(1000):.4f}: {ks_ok}; {elapsed:.0f}s (<300s)",
    )
    assert var_ok and elapsed < 300
    assert mean_ok and ks_ok, (
        "known finite-size gap: the tau correction in the centering converges "
        "like p^(-1/4) and is ~half realized at p = 200 (measured mean ~ -0.5, "
        "effective tau ~ 7 of 15); the asymptotic targets are unreachable here"
    )


def test_criterion_06_closed_form_constants():
    mu, sigma2 = ss.clt_mean_var(H_TWO_ATOM, 1.0, 15.0)
    p = 100
    st = ss.sigma_tilde(two_atom_sigma(p), 15.0)
    coef = (float(np.sum(st * st)) - 1.04 * p + 1.0752) * p
    ok = (
        abs(mu - (-1.04)) < 1e-12
        and abs(sigma2 - 6.390784) < 1e-6
        and abs(coef - 7.225344) < 1e-6
        and abs(coef - 7.22) < 0.01
    )
    assert report(
        6, ok,
        f"(mu, sigma2) = ({mu}, {sigma2:.6f}) vs (-1.04, 6.390784); "
        f"1/p coefficient {coef:.6f} vs 7.2254 (printed 7.22)",
    )


def test_criterion_07_moment_oracle_equivalence():
    start = time.perf_counter()
    worst_z = 0.0
    for d_idx, dist in enumerate([ss.gaussian(), ss.student_t(5.0)]):
        for s_idx, exps in enumerate([(2,), (4,), (2, 2)]):
            for p_idx, p in enumerate([16, 64]):
                spec = MomentSpec(exps, p)
                seed_idx = d_idx * 100 + s_idx * 10 + p_idx
                mc = mc_moment(dist, spec, 10**6, derive_stream(701, seed_idx))
                integ = integral_moment(dist, spec)
                worst_z = max(worst_z, abs(mc.value - integ.value) / mc.stderr)
    exact = integral_moment(ss.gaussian(), MomentSpec((4,), 16)).value
    elapsed = time.perf_counter() - start
    ok = worst_z < 3.0 and abs(exact - 3 / 288) < 1e-6 and elapsed < 120
    assert report(
        7, ok,
        f"worst |z| over 12 cells = {worst_z:.2f} (<3); Gaussian quartic at p=16 "
        f"= {exact:.9f} vs {3 / 288:.9f}; {elapsed:.0f}s (<120s)",
    )


def test_criterion_08_exact_identities():
    start = time.perf_counter()
    checks = []

    rng = derive_stream(801, 0)
    X = sample_data(80, two_atom_sigma(50), ss.student_t(4.5), rng)
    B = spatial_sign_cov(X)
    checks.append(abs(np.trace(B) - 50) < 1e-10 * 50)

    Z = ss.sample(ss.student_t(2.0), 100 * 64, derive_stream(801, 1)).reshape(100, 64)
    Y = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    checks.append(bool(np.max(np.abs(np.sum(Y * Y, axis=1) - 1.0)) < 1e-14))

    p = 64
    dist = ss.student_t(3.0)
    e4 = mc_moment(dist, MomentSpec((4,), p), 200_000, derive_stream(801, 2))
    e22 = mc_moment(dist, MomentSpec((2, 2), p), 200_000, derive_stream(801, 3))
    total = p * e4.value + p * (p - 1) * e22.value
    spread = math.hypot(p * e4.stderr, p * (p - 1) * e22.stderr)
    checks.append(abs(total - 1.0) < 3 * spread)

    scales = derive_stream(801, 4).uniform(0.1, 10.0, size=(80, 1))
    checks.append(bool(np.max(np.abs(spatial_sign_cov(X * scales) - B)) < 1e-12))

    frob = float(np.sum(B * B))
    spec_sum = float(np.sum(np.linalg.eigvalsh(B) ** 2))
    checks.append(abs(frob - spec_sum) < 1e-8 * 50 * 50)

    elapsed = time.perf_counter() - start
    ok = all(checks) and elapsed < 60
    assert report(
        8, ok,
        f"trace={checks[0]}, unit norm={checks[1]}, square-sum identity={checks[2]} "
        f"(total {total:.5f}), rescale invariance={checks[3]}, frobenius-vs-spectrum={checks[4]}; "
        f"{elapsed:.0f}s (<60s)",
    )


def test_criterion_09_quadform_covariance():
    start = time.perf_counter()
    p = 128
    G = derive_stream(900, 0).standard_normal((p, p))
    A = 0.5 * (G + G.T)
    A /= np.linalg.norm(A, 2)
    zs = {}
    for name, dist, tau in (("gaussian", ss.gaussian(), 3.0), ("t6", ss.student_t(6.0), 6.0)):
        st = quadform_stats(dist, p, A, A, 2000, derive_stream(901, ord(name[0])))
        theory = theoretical_quadform_cov(A, A, tau, p)
        zs[name] = (st.cov_ab - theory) / st.cov_ab_stderr
    elapsed = time.perf_counter() - start
    ok = all(abs(z) < 3 for z in zs.values()) and elapsed < 120
    assert report(
        9, ok,
        f"z(gaussian)={zs['gaussian']:+.2f}, z(t6)={zs['t6']:+.2f} (|z|<3); {elapsed:.0f}s (<120s)",
    )


def test_criterion_10_worker_count_determinism(tmp_path, monkeypatch):
    start = time.perf_counter()
    configs = [
        dict(subcommand="esd", n=60, p=30, alpha=4.0, dist="t",
             sigma="two-atom:1.2,0.8", reps=6, seed=3, bins=12),
        dict(subcommand="clt", n=40, p=40, alpha=4.5, dist="t",
             sigma="two-atom:1.2,0.8", reps=8, seed=3),
        dict(subcommand="ks-curve", alphas=(2.5,), ps=(30,), y=0.5,
             sigma="two-atom:1.2,0.8", reps=4, seed=3),
    ]
    identical = True
    for i, kwargs in enumerate(configs):
        outputs = {}
        for workers in ("1", "3"):
            monkeypatch.setenv("SIGNSPECTRA_WORKERS", workers)
            out = tmp_path / f"c{i}w{workers}"
            result = run(ExperimentConfig(out=str(out), **kwargs))
            outputs[workers] = {
                Path(f).name: Path(f).read_bytes()
                for f in result.files if f.endswith(".csv")
            }
        identical &= outputs["1"] == outputs["3"]
    elapsed = time.perf_counter() - start
    ok = identical and elapsed < 120
    assert report(10, ok, f"CSV bodies byte-identical across worker counts: {identical}; {elapsed:.0f}s")
