import unittest

import numpy as np
from numpy.testing import assert_allclose

from pivlink import kernels
from pivlink.ingest import PivSpec


def make_params(eta, alpha=None, phi_mistake=0.1, gamma=0.5):
    n = len(eta)
    return kernels.ModelParams(gamma, eta, alpha or {},
                               [phi_mistake] * n, [0.1] * n, [0.1] * n)


class TestSurvivalProb(unittest.TestCase):
    def test_values(self):
        self.assertEqual(kernels.survival_prob(1.3, 0), 1.0)
        assert_allclose(kernels.survival_prob(np.log(0.28), 1), 0.75578,
                        atol=1e-5)
        assert_allclose(kernels.survival_prob(np.log(0.28), 3), 0.43171,
                        atol=1e-5)

    def test_monotone(self):
        t = np.linspace(0, 10, 50)
        s = kernels.survival_prob(0.0, t)
        self.assertTrue(np.all(np.diff(s) < 0))
        self.assertLess(kernels.survival_prob(0.5, 2.0),
                        kernels.survival_prob(0.0, 2.0))

    def test_negative_time(self):
        with self.assertRaises(ValueError):
            kernels.survival_prob(0.0, -1)


class TestObsGivenTruth(unittest.TestCase):
    def setUp(self):
        self.spec = PivSpec('x', 5)

    def test_values(self):
        assert_allclose(kernels.obs_given_truth(self.spec, 0, 3, 0.1, 0.2), 0.1)
        assert_allclose(kernels.obs_given_truth(self.spec, 3, 3, 0.1, 0.2),
                        0.72)
        assert_allclose(kernels.obs_given_truth(self.spec, 1, 3, 0.1, 0.2),
                        0.045)

    def test_normalised(self):
        for h in range(1, 6):
            total = sum(kernels.obs_given_truth(self.spec, g, h, 0.1, 0.2)
                        for g in range(6))
            assert_allclose(total, 1)

    def test_matrix_agrees(self):
        g = np.array([0, 1, 3, 5])
        matrix = kernels.obs_likelihood_matrix(g, 5, 0.1, 0.2)
        expected = [[kernels.obs_given_truth(self.spec, gi, h, 0.1, 0.2)
                     for h in range(1, 6)] for gi in g]
        assert_allclose(matrix, expected)

    def test_errors(self):
        single = PivSpec('y', 1)
        assert_allclose(kernels.obs_given_truth(single, 1, 1, 0.1, 0.2), 0.72)
        with self.assertRaises(ValueError):
            kernels.obs_given_truth(self.spec, 6, 1, 0.1, 0.2)
        with self.assertRaises(ValueError):
            kernels.obs_given_truth(self.spec, 1, 0, 0.1, 0.2)


class TestTruthPrior(unittest.TestCase):
    def test(self):
        self.assertEqual(kernels.truth_prior(np.full(4, 0.25), 2), 0.25)
        self.assertEqual(kernels.truth_prior([0.7, 0.3], 1), 0.7)
        with self.assertRaises(ValueError):
            kernels.truth_prior([0.7, 0.3], 3)


class TestLinkedTruthJoint(unittest.TestCase):
    def test_stable(self):
        params = make_params([[0.5, 0.5]])
        spec = PivSpec('x', 2)
        self.assertEqual(kernels.linked_truth_joint(spec, 1, 2, None, params,
                                                    0), 0)
        self.assertEqual(kernels.linked_truth_joint(spec, 1, 1, None, params,
                                                    0), 0.5)

    def test_unstable(self):
        spec = PivSpec('x', 2, stable=False)
        t = 1.0
        alpha = np.log(-np.log(0.8) / t)
        params = make_params([[0.5, 0.5]], {0: alpha})
        joint = np.array([[kernels.linked_truth_joint(spec, ha, hb, t, params,
                                                      0)
                           for hb in (1, 2)] for ha in (1, 2)])
        assert_allclose(joint, [[0.4, 0.1], [0.1, 0.4]])
        assert_allclose(joint.sum(), 1)
        with self.assertRaises(ValueError):
            kernels.linked_truth_joint(spec, 1, 1, None, params, 0)

    def test_normalised_and_limits(self):
        spec = PivSpec('x', 4, stable=False)
        eta = [0.1, 0.2, 0.3, 0.4]
        params = make_params([eta], {0: 0.3})
        for t in [0, 0.5, 5]:
            total = sum(kernels.linked_truth_joint(spec, ha, hb, t, params, 0)
                        for ha in range(1, 5) for hb in range(1, 5))
            assert_allclose(total, 1)
        stable = PivSpec('x', 4)
        for ha, hb in [(1, 1), (2, 3)]:
            assert_allclose(
                kernels.linked_truth_joint(spec, ha, hb, 0, params, 0),
                kernels.linked_truth_joint(stable, ha, hb, 0, params, 0))
        assert_allclose(kernels.linked_truth_joint(spec, 2, 3, 1e4, params, 0),
                        0.2 / 3)

    def test_log_ratio(self):
        spec = PivSpec('x', 3, stable=False)
        params = make_params([[0.2, 0.3, 0.5]], {0: -0.4})
        h_a = np.array([1, 2, 3, 1])
        h_b = np.array([1, 3, 3, 2])
        t = np.array([0.5, 1.0, 2.0, 0.0])
        expected = [kernels.linked_truth_joint(spec, a, b, ti, params, 0) /
                    (params.eta[0][a - 1] * params.eta[0][b - 1])
                    for a, b, ti in zip(h_a, h_b, t)]
        with np.errstate(divide='ignore'):
            assert_allclose(np.exp(kernels.log_linked_ratio(spec, h_a, h_b, t,
                                                            params, 0)),
                            expected)
        stable = PivSpec('x', 3)
        out = kernels.log_linked_ratio(stable, h_a, h_b, None, params, 0)
        assert_allclose(out[[0, 2]], [-np.log(0.2), -np.log(0.5)])
        self.assertTrue(np.all(np.isneginf(out[[1, 3]])))


class TestModelParams(unittest.TestCase):
    def setUp(self):
        self.specs = [PivSpec('x', 2), PivSpec('y', 3, stable=False)]

    def test_check(self):
        params = kernels.ModelParams(0.5, [[0.5, 0.5], [0.2, 0.3, 0.5]],
                                     {1: 0.0}, [0.05, 0.05], [0, 0], [0, 0])
        params.check(self.specs)
        bad_eta = params.copy()
        bad_eta.eta[0] = np.array([0.5, 0.6])
        with self.assertRaises(ValueError):
            bad_eta.check(self.specs)
        bad_alpha = params.copy()
        bad_alpha.alpha = {}
        with self.assertRaises(ValueError):
            bad_alpha.check(self.specs)
        bad_phi = params.copy()
        bad_phi.phi_mistake = np.array([0.5, 0.05])
        with self.assertRaises(ValueError):
            bad_phi.check(self.specs)

    def test_mean(self):
        p1 = kernels.ModelParams(0.2, [[0.5, 0.5], [0.2, 0.3, 0.5]], {1: 0.0},
                                 [0.02, 0.04], [0.1, 0], [0, 0])
        p2 = kernels.ModelParams(0.4, [[0.7, 0.3], [0.4, 0.3, 0.3]], {1: 1.0},
                                 [0.04, 0.06], [0.1, 0], [0, 0])
        mean = kernels.ModelParams.mean([p1, p2])
        assert_allclose(mean.gamma, 0.3)
        assert_allclose(mean.eta[0], [0.6, 0.4])
        assert_allclose(mean.eta[1], [0.3, 0.3, 0.4])
        assert_allclose(mean.alpha[1], 0.5)
        assert_allclose(mean.phi_mistake, [0.03, 0.05])
        assert_allclose(mean.phi_missing_a, [0.1, 0])
        mean.check(self.specs)
        assert_allclose(p1.eta[0], [0.5, 0.5])
        assert_allclose(p1.phi_mistake, [0.02, 0.04])
        self.assertEqual(kernels.ModelParams.mean([p1]).gamma, 0.2)
        with self.assertRaises(ValueError):
            kernels.ModelParams.mean([])
