import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy import stats

from denoising.assoc import (
    AssocScenario,
    Phenotype,
    compare_methods,
    confounder_direction,
    deflate,
    fit_columns,
    inflation_factor,
    logistic_wald,
    make_scenario,
    qq_quantiles,
    qq_rows,
    run_pipeline,
)
from denoising.estimators import EstimatorConfig, Variant
from denoising.exceptions import (
    DegenerateDesignError,
    InvalidArgumentError,
    SeparationError,
)


def grid_maximize(x, y):
    """Maximize the logistic log-likelihood by repeatedly zooming a grid."""
    center = np.zeros(2)
    width = 8.0
    for _ in range(14):
        b0 = center[0] + np.linspace(-width, width, 81)
        b1 = center[1] + np.linspace(-width, width, 81)
        B0, B1 = np.meshgrid(b0, b1, indexing='ij')
        eta = B0[..., None] + B1[..., None] * x
        ll = np.sum(y * eta - np.logaddexp(0.0, eta), axis=-1)
        i, j = np.unravel_index(np.argmax(ll), ll.shape)
        center = np.array([b0[i], b1[j]])
        width /= 4.0
    return center


class DeflateTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(3)
        self.Y = rng.standard_normal((10, 7))
        d = rng.standard_normal(10)
        self.d = d / np.linalg.norm(d)

    def test_parallel_columns_vanish(self):
        Y = np.outer(self.d, [1.0, -2.0, 0.5])
        assert_allclose(deflate(Y, self.d), 0.0, atol=1e-12)

    def test_orthogonal_columns_unchanged(self):
        Y = np.zeros((10, 2))
        Y[0, 0] = Y[1, 1] = 1.0
        d = np.zeros(10)
        d[5] = 1.0
        np.testing.assert_array_equal(deflate(Y, d), Y)

    def test_columns_orthogonal_to_direction(self):
        assert_allclose(self.d @ deflate(self.Y, self.d), 0.0, atol=1e-10)

    def test_idempotent_and_contracting(self):
        once = deflate(self.Y, self.d)
        assert_allclose(deflate(once, self.d), once, atol=1e-10)
        self.assertLessEqual(np.linalg.norm(once), np.linalg.norm(self.Y))

    def test_direction_must_be_unit(self):
        with self.assertRaises(InvalidArgumentError):
            deflate(self.Y, 2.0 * self.d)
        with self.assertRaises(InvalidArgumentError):
            deflate(self.Y, self.d[:5])


class PhenotypeTests(SimpleTestCase):

    def test_needs_both_classes(self):
        with self.assertRaises(InvalidArgumentError):
            Phenotype(np.zeros(5))

    def test_needs_binary_labels(self):
        with self.assertRaises(InvalidArgumentError):
            Phenotype(np.array([0, 1, 2]))


class LogisticWaldTests(SimpleTestCase):

    def setUp(self):
        self.x = np.array([-1.2, -0.7, -0.4, 0.2, 0.3, 0.9, 1.5, 2.1])
        self.y = np.array([0, 1, 0, 0, 1, 0, 1, 1])

    def test_matches_grid_search(self):
        fit = logistic_wald(self.x, Phenotype(self.y))
        _, slope = grid_maximize(self.x, self.y.astype(float))
        self.assertAlmostEqual(fit.coefficient, slope, delta=1e-4)
        self.assertAlmostEqual(fit.z, fit.coefficient / fit.std_error, delta=1e-10)
        self.assertAlmostEqual(fit.p_value, 2.0 * stats.norm.sf(abs(fit.z)), delta=1e-12)

    def test_rescaling_keeps_p_value(self):
        fit = logistic_wald(self.x, Phenotype(self.y))
        scaled = logistic_wald(3.0 * self.x + 1.0, Phenotype(self.y))
        self.assertAlmostEqual(scaled.p_value, fit.p_value, delta=1e-10)
        self.assertAlmostEqual(scaled.coefficient, fit.coefficient / 3.0, delta=1e-8)

    def test_constant_column(self):
        with self.assertRaises(DegenerateDesignError):
            logistic_wald(np.full(8, 2.5), Phenotype(self.y))

    def test_complete_separation(self):
        with self.assertRaises(SeparationError) as ctx:
            logistic_wald(np.arange(8.0), Phenotype([0, 0, 0, 0, 1, 1, 1, 1]))
        self.assertEqual(ctx.exception.column, 0)

    def test_length_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            fit_columns(np.ones((5, 2)), Phenotype(self.y))

    def test_null_p_values_are_uniform(self):
        rng = np.random.default_rng(2024)
        phenotype = Phenotype(rng.integers(0, 2, size=500))
        p_values = fit_columns(rng.standard_normal((500, 10000)), phenotype)[3]
        self.assertTrue(np.all((p_values > 0) & (p_values <= 1)))
        self.assertGreater(stats.kstest(p_values, 'uniform').pvalue, 0.01)

    def test_workers_do_not_change_results(self):
        rng = np.random.default_rng(8)
        phenotype = Phenotype(rng.integers(0, 2, size=60))
        columns = rng.standard_normal((60, 2500))
        serial = fit_columns(columns, phenotype)
        threaded = fit_columns(columns, phenotype, workers=3)
        for a, b in zip(serial, threaded):
            np.testing.assert_array_equal(a, b)


class QQTests(SimpleTestCase):

    def test_expected_quantiles(self):
        observed, expected = qq_quantiles(np.array([0.5, 0.01, 0.2, 1.0]))
        assert_allclose(expected, -np.log10([0.875, 0.625, 0.375, 0.125]))
        self.assertTrue(np.all(np.diff(expected) > 0))
        self.assertTrue(np.all(np.diff(observed) >= 0))
        np.testing.assert_array_equal(qq_quantiles(np.full(4, 0.3))[1], expected)

    def test_inflation_of_uniform_grid(self):
        p = (np.arange(1, 2001) - 0.5) / 2000
        self.assertAlmostEqual(inflation_factor(p), 1.0, delta=0.01)


class PipelineTests(SimpleTestCase):

    def test_null_scenario_is_calibrated(self):
        scenario = AssocScenario(m=400, n=2000, t=100, background=0.0, null=True)
        data = make_scenario(scenario, seed=1)
        result = run_pipeline(data.Y, data.phenotype, EstimatorConfig(Variant.REFACTOR_STAR, r=1, t=100))
        self.assertGreater(stats.kstest(result.p_values, 'uniform').pvalue, 0.01)

    def test_confounded_scenario(self):
        scenario = AssocScenario()
        results = compare_methods(make_scenario(scenario, seed=0), scenario)
        refactor = results['refactor'].inflation
        self.assertGreaterEqual(refactor, 0.8)
        self.assertLessEqual(refactor, 1.25)
        self.assertLess(refactor, results['tsvd'].inflation)
        self.assertGreater(results['unadjusted'].inflation, 1.5)
        rows = qq_rows(results)
        self.assertEqual(len(rows), scenario.n)
        self.assertEqual(len(rows[0]), 4)

    def test_noiseless_deflation_removes_everything(self):
        scenario = AssocScenario(m=100, n=300, t=20, background=0.0, sigma=0.0)
        data = make_scenario(scenario, seed=2)
        config = EstimatorConfig(Variant.TSVD, r=1)
        deflated = deflate(data.Y, confounder_direction(data.Y, config))
        self.assertLess(np.max(np.abs(deflated)), 1e-10)
        with self.assertRaises(DegenerateDesignError):
            run_pipeline(data.Y, data.phenotype, config)

    def test_pipeline_needs_rank_one(self):
        data = make_scenario(AssocScenario(m=50, n=100, t=10, background=0.0), seed=0)
        with self.assertRaises(InvalidArgumentError):
            run_pipeline(data.Y, data.phenotype, EstimatorConfig(Variant.TSVD, r=2))

    def test_deterministic(self):
        scenario = AssocScenario(m=60, n=150, t=15, background=0.0)
        first = make_scenario(scenario, seed=4)
        second = make_scenario(scenario, seed=4)
        np.testing.assert_array_equal(first.Y, second.Y)
        np.testing.assert_array_equal(first.phenotype.labels, second.phenotype.labels)
        config = EstimatorConfig(Variant.JL_STAR, r=1, t=15)
        a = run_pipeline(first.Y, first.phenotype, config)
        b = run_pipeline(second.Y, second.phenotype, config)
        np.testing.assert_array_equal(a.p_values, b.p_values)
        np.testing.assert_array_equal(a.coefficients, b.coefficients)
