import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from isobinom.chibar import (
    ChiBarDistribution,
    ProjectionError,
    chi_bar,
    chibar_pvalue,
    chisq_sf,
    cone_covariance,
    correlations,
    metric_from_matrix,
    partial_correlations,
    project_cone,
    project_cone_batch,
    weights_closed_form,
    weights_monte_carlo,
)

from oracles import enumerate_projection, random_spd

MALFORMATION_WEIGHTS = (0.17925, 0.4215, 0.32075, 0.07850)


def mp_sf(t, df):
    return float(mpmath.gammainc(mpmath.mpf(df) / 2, mpmath.mpf(t) / 2, mpmath.inf,
                                 regularized=True))


@pytest.fixture
def malformation_metric(malformation):
    return cone_covariance(malformation.nu)


class TestChisqSf:
    @pytest.mark.parametrize("df", [1, 2, 3, 5, 8])
    @pytest.mark.parametrize("t", [0.01, 0.5, 2.5979, 5.4057, 20.0, 90.0])
    def test_against_mpmath(self, t, df):
        assert chisq_sf(t, df) == pytest.approx(mp_sf(t, df), rel=1e-10)

    def test_known(self):
        assert chisq_sf(2 * math.log(2), 2) == pytest.approx(0.5, rel=1e-14)
        # 0.020073 is a rounded figure; the mpmath oracle gives 0.0200711
        assert chisq_sf(5.4057, 1) == pytest.approx(mp_sf(5.4057, 1), rel=1e-12)
        assert chisq_sf(5.4057, 1) == pytest.approx(0.020073, abs=5e-6)

    def test_point_mass(self):
        assert chisq_sf(0.0, 0) == 1.0
        assert chisq_sf(0.1, 0) == 0.0
        assert chisq_sf(0.0, 3) == 1.0

    def test_vectorised(self):
        assert_allclose(chisq_sf([0.0, 1.0], 0), [1.0, 0.0])

    def test_errors(self):
        with pytest.raises(ValueError):
            chisq_sf(-1.0, 2)
        with pytest.raises(ValueError):
            chisq_sf(1.0, -1)


class TestGeometry:
    def test_malformation_correlations(self, malformation_metric):
        r = correlations(malformation_metric.V)
        p = partial_correlations(malformation_metric.V)
        assert_allclose(sorted(r[np.triu_indices(3, 1)]), [-0.40411, -0.16753, 0.0], atol=5e-5)
        assert_allclose(sorted(p[np.triu_indices(3, 1)]), [-0.4099, -0.18315, -0.075072],
                        atol=5e-5)

    def test_inverse(self, malformation_metric):
        assert_allclose(malformation_metric.V @ malformation_metric.Vinv, np.eye(3), atol=1e-9)

    def test_unnormalised_nu_falls_back(self):
        m = cone_covariance([1.0, 2.0, 3.0])
        assert_allclose(m.V @ m.Vinv, np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("nu", [[1.0], [0.5, 0.0, 0.5], [[0.5, 0.5]]])
    def test_bad_nu(self, nu):
        with pytest.raises(ValueError):
            cone_covariance(nu)

    def test_metric_from_matrix_rejects(self):
        with pytest.raises(ValueError):
            metric_from_matrix([[1.0, 0.2], [0.3, 1.0]])
        with pytest.raises(np.linalg.LinAlgError):
            metric_from_matrix([[1.0, 2.0], [2.0, 1.0]])


class TestProjection:
    def test_interior_point_unchanged(self, malformation_metric):
        z = np.array([0.3, 1.2, 0.7])
        zeta, count = project_cone(z, malformation_metric)
        assert_allclose(zeta, z, atol=1e-14)
        assert count == 3

    def test_negative_orthant_to_origin_for_identity(self):
        zeta, count = project_cone([-1.0, -2.0], metric_from_matrix(np.eye(2)))
        assert_allclose(zeta, 0.0)
        assert count == 0

    def test_identity_metric_clips(self):
        zeta, _ = project_cone([-1.0, 2.0, -0.5], metric_from_matrix(np.eye(3)))
        assert_allclose(zeta, [0.0, 2.0, 0.0], atol=1e-14)

    def test_enumeration_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(400):
            k = int(rng.integers(1, 6))
            V = random_spd(rng, k)
            m = metric_from_matrix(V)
            z = rng.normal(size=k) * rng.choice([0.1, 1.0, 10.0])
            zeta, _ = project_cone(z, m)
            assert_allclose(zeta, enumerate_projection(z, m.Vinv), atol=1e-8)

    def test_batch_rows_independent(self, malformation_metric):
        rng = np.random.default_rng(5)
        z = rng.normal(size=(300, 3)) @ np.linalg.cholesky(malformation_metric.V).T
        batch, counts = project_cone_batch(z, malformation_metric)
        for r in range(0, 300, 17):
            one, c = project_cone(z[r], malformation_metric)
            assert_allclose(batch[r], one, atol=1e-12)
            assert counts[r] == c

    def test_pivot_limit(self, malformation_metric):
        with pytest.raises(ProjectionError):
            project_cone_batch(np.array([[1.0, 1.0, 1.0]]), malformation_metric, max_pivots=1)

    def test_dimension_mismatch(self, malformation_metric):
        with pytest.raises(ValueError):
            project_cone_batch(np.zeros((2, 4)), malformation_metric)


class TestWeights:
    def test_closed_form_malformation(self, malformation_metric):
        w = weights_closed_form(malformation_metric).weights
        assert_allclose(w, MALFORMATION_WEIGHTS, atol=1e-4)

    def test_two_categories(self):
        assert_allclose(weights_closed_form(cone_covariance([0.3, 0.7])).weights, [0.5, 0.5])

    def test_three_categories_equal(self):
        # equal weights give rho = -1/2, so the top weight is 1/6
        w = weights_closed_form(cone_covariance([1 / 3] * 3)).weights
        assert_allclose(w, [1 / 3, 1 / 2, 1 / 6], atol=1e-14)

    def test_closed_form_dimension_limit(self):
        with pytest.raises(ValueError):
            weights_closed_form(cone_covariance([0.2] * 5))

    def test_mc_close_to_closed(self, malformation_metric):
        mc = weights_monte_carlo(malformation_metric, reps=200_000, seed=1)
        assert_allclose(mc.weights, weights_closed_form(malformation_metric).weights, atol=4e-3)
        assert mc.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_mc_two_categories(self):
        mc = weights_monte_carlo(cone_covariance([0.4, 0.6]), reps=100_000, seed=2)
        assert_allclose(mc.weights, [0.5, 0.5], atol=6e-3)

    def test_mc_deterministic(self, malformation_metric):
        a = weights_monte_carlo(malformation_metric, reps=40_000, seed=9)
        b = weights_monte_carlo(malformation_metric, reps=40_000, seed=9)
        c = weights_monte_carlo(malformation_metric, reps=40_000, seed=9, workers=2)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.weights, c.weights)
        assert not np.array_equal(a.weights, weights_monte_carlo(malformation_metric, 40_000, 10).weights)

    def test_scale_invariance(self, malformation_metric):
        scaled = metric_from_matrix(7.5 * malformation_metric.V)
        assert_allclose(weights_closed_form(scaled).weights,
                        weights_closed_form(malformation_metric).weights, atol=1e-14)
        a = weights_monte_carlo(malformation_metric, reps=30_000, seed=4)
        b = weights_monte_carlo(metric_from_matrix(4.0 * malformation_metric.V), reps=30_000, seed=4)
        assert np.array_equal(a.weights, b.weights)

    def test_reversal_invariance(self, malformation_metric):
        rev = metric_from_matrix(malformation_metric.V[::-1, ::-1])
        assert_allclose(weights_closed_form(rev).weights,
                        weights_closed_form(malformation_metric).weights, atol=1e-14)

    @given(st.integers(2, 4).flatmap(
        lambda I: st.lists(st.floats(0.02, 1.0), min_size=I, max_size=I)))
    @settings(max_examples=100)
    def test_closed_form_identities(self, raw):
        nu = np.array(raw) / sum(raw)
        w = weights_closed_form(cone_covariance(nu)).weights
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-14)
        assert w[0::2].sum() == pytest.approx(0.5, abs=1e-14)

    def test_mc_half_sums_larger_cone(self):
        mc = weights_monte_carlo(cone_covariance([1 / 6] * 6), reps=100_000, seed=3)
        assert mc.weights[0::2].sum() == pytest.approx(0.5, abs=6e-3)
        assert mc.weights.size == 6

    def test_chi_bar_dispatch(self, malformation_metric):
        assert chi_bar(malformation_metric).method == "closed_form"
        assert chi_bar(cone_covariance([0.2] * 5), reps=2000).method == "monte_carlo"
        with pytest.raises(ValueError):
            chi_bar(malformation_metric, "exact")

    def test_mc_argument_errors(self, malformation_metric):
        with pytest.raises(ValueError):
            weights_monte_carlo(malformation_metric, reps=0)
        with pytest.raises(ValueError):
            weights_monte_carlo(malformation_metric, reps=10, seed=-1)


class TestPvalue:
    @pytest.fixture
    def dist(self, malformation_metric):
        return weights_closed_form(malformation_metric)

    @pytest.mark.parametrize("t,p", [(5.4057, 0.0413), (2.5979, 0.1686), (8.4942, 0.0090)])
    def test_malformation(self, dist, t, p):
        assert chibar_pvalue(t, dist) == pytest.approx(p, abs=1e-3)

    def test_limits(self, dist):
        assert chibar_pvalue(0.0, dist) == 1.0
        assert chibar_pvalue(1e6, dist) < 1e-15

    def test_monotone(self, dist):
        t = np.linspace(0, 40, 2001)
        p = chibar_pvalue(t, dist)
        assert np.all(np.diff(p) <= 0)
        assert np.all((p >= 0) & (p <= 1))

    def test_nan_passthrough(self, dist):
        assert math.isnan(chibar_pvalue(math.nan, dist))
        assert math.isnan(dist.sf(np.array([math.nan, 1.0]))[0])

    def test_negative(self, dist):
        with pytest.raises(ValueError):
            chibar_pvalue(-0.1, dist)

    def test_mixture_formula(self):
        d = ChiBarDistribution(np.array([0.2, 0.5, 0.3]), "given")
        t = 3.0
        assert chibar_pvalue(t, d) == pytest.approx(0.5 * mp_sf(t, 1) + 0.3 * mp_sf(t, 2),
                                                    rel=1e-12)
