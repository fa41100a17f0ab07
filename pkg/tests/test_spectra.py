import numpy as np
import pytest

from signspectra.covariance import CovModel, sample_data, spatial_sign_cov, two_atom_sigma
from signspectra.distributions import gaussian
from signspectra.mp_law import GridSpec, density_cdf
from signspectra.covariance import SpectralDist
from signspectra.seeding import derive_stream
from signspectra.spectra import (
    EsdSample,
    density_sup_deviation,
    eigenvalues_sym,
    histogram,
    kolmogorov_distance,
)

H_POINT = SpectralDist.point_mass(1.0)


def scm_eigenvalues(n, p, seed):
    X = sample_data(n, CovModel.identity(p), gaussian(), derive_stream(seed, 0))
    return np.sort(np.linalg.eigvalsh(spatial_sign_cov(X)))


class TestEigenvaluesSym:
    def test_diagonal(self):
        np.testing.assert_allclose(eigenvalues_sym(np.diag([1.2, 0.8])), [0.8, 1.2])

    def test_reflection(self):
        np.testing.assert_allclose(
            eigenvalues_sym(np.array([[0.0, 1.0], [1.0, 0.0]])), [-1.0, 1.0]
        )

    def test_rank_one(self):
        x = derive_stream(50, 0).standard_normal(5)
        M = 5 * np.outer(x, x) / np.dot(x, x)
        eigs = eigenvalues_sym(M)
        np.testing.assert_allclose(eigs[:-1], 0.0, atol=1e-10)
        assert eigs[-1] == pytest.approx(5.0, abs=1e-10)

    def test_reconstruction_with_vectors(self):
        G = derive_stream(50, 1).standard_normal((12, 12))
        M = 0.5 * (G + G.T)
        vals, vecs = eigenvalues_sym(M, return_vectors=True)
        np.testing.assert_allclose((vecs * vals) @ vecs.T, M, atol=1e-10)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            eigenvalues_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestEsdSample:
    def test_must_be_sorted(self):
        with pytest.raises(ValueError):
            EsdSample(np.array([2.0, 1.0]))

    def test_trace_identity_of_scm_samples(self):
        eigs = scm_eigenvalues(50, 30, 51)
        assert abs(eigs.sum() - 30) < 1e-8 * 30


class TestKolmogorovDistance:
    def test_law_quantiles_are_near_optimal(self):
        law = density_cdf(0.5, H_POINT)
        p = 500
        targets = (np.arange(1, p + 1) - 0.5) / p
        quantiles = np.interp(targets, law.cdf, law.grid)
        d = kolmogorov_distance(EsdSample(np.sort(quantiles)), law)
        assert d <= 1 / (2 * p) + 2e-3

    def test_single_eigenvalue(self):
        law = density_cdf(0.5, H_POINT)
        x0 = 1.0
        F = np.interp(x0, law.grid, law.cdf)
        d = kolmogorov_distance(EsdSample(np.array([x0])), law)
        assert d == pytest.approx(max(F, 1 - F), abs=1e-12)

    def test_identity_gaussian_converges(self):
        law = density_cdf(0.5, H_POINT)
        for rep in range(20):
            X = sample_data(400, CovModel.identity(200), gaussian(), derive_stream(52, rep))
            eigs = np.sort(np.linalg.eigvalsh(spatial_sign_cov(X)))
            assert kolmogorov_distance(EsdSample(eigs), law) < 0.05

    def test_tall_case_zero_atom(self):
        # p > n: half the spectrum is an exact zero atom
        law = density_cdf(2.0, H_POINT, GridSpec(0.0, 6.5, 2000))
        X = sample_data(150, CovModel.identity(300), gaussian(), derive_stream(53, 0))
        eigs = np.sort(np.linalg.eigvalsh(spatial_sign_cov(X)))
        d = kolmogorov_distance(EsdSample(eigs), law)
        assert d < 0.07

    def test_grid_refinement_stability(self):
        eigs = scm_eigenvalues(400, 200, 54)
        d1 = kolmogorov_distance(EsdSample(eigs), density_cdf(0.5, H_POINT, GridSpec(0.0, 3.1, 2000)))
        d2 = kolmogorov_distance(EsdSample(eigs), density_cdf(0.5, H_POINT, GridSpec(0.0, 3.1, 4000)))
        assert 0.0 <= d1 <= 1.0
        assert abs(d1 - d2) < 1e-3

    def test_out_of_range_eigenvalue_rejected(self):
        law = density_cdf(0.5, H_POINT)
        with pytest.raises(ValueError):
            kolmogorov_distance(EsdSample(np.array([0.5, 50.0])), law)


class TestHistogram:
    def test_counts_conserved_and_density_normalized(self):
        esds = [EsdSample(scm_eigenvalues(60, 40, 55 + i)) for i in range(3)]
        h = histogram(esds, bins=20)
        assert h.counts.sum() == 3 * 40
        assert np.sum(h.density * np.diff(h.edges)) == pytest.approx(1.0)

    def test_bins_validation(self):
        with pytest.raises(ValueError):
            histogram([EsdSample(np.array([1.0]))], bins=5)

    def test_sup_deviation_small_for_matching_law(self):
        law = density_cdf(0.5, H_POINT)
        esds = [EsdSample(scm_eigenvalues(400, 200, 60 + i)) for i in range(20)]
        h = histogram(esds, bins=40)
        assert density_sup_deviation(h, law) < 0.08
