import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd
from numpy.testing import assert_allclose, assert_array_equal

from pivlink.config import LinkConfig
from pivlink.exceptions import ConfigurationError, DataError
from pivlink.ingest import RecordTable, read_tables
from pivlink.simulate import distortion, scenario


def link_agreement(a, b, truth):
    return (a.values[truth.rows] == b.values[truth.cols]).mean(axis=0)


class TestScenarioConfig(unittest.TestCase):
    def test_latent_distribution(self):
        cfg = scenario.ScenarioConfig(10, 10, 5, [2, 6])
        assert_allclose(cfg.latent_distribution(0)[0], 1 / (1 + np.exp(0.25)))
        assert_allclose(cfg.latent_distribution(0)[0], 0.4378, atol=1e-4)
        dist = cfg.latent_distribution(1)
        assert_allclose(dist.sum(), 1)
        self.assertTrue(np.all(np.diff(dist) > 0))

    def test_paper_defaults(self):
        cfg = scenario.ScenarioConfig.paper_defaults()
        self.assertEqual((cfg.n_a, cfg.n_b, cfg.n_links), (800, 1000, 500))
        self.assertEqual(cfg.piv_supports, [6, 7, 8, 9, 15])
        assert_allclose(cfg.mistake_rate, [0.02, 0.02, 0.02, 0.02, 0])
        assert_allclose(cfg.missing_rate, 0.007)
        self.assertEqual(cfg.unstable_index, 4)

    def test_validation(self):
        for args, kwargs in [((10, 10, 11, [2]), {}),
                             ((0, 10, 0, [2]), {}),
                             ((10, 10, 5, [0]), {}),
                             ((10, 10, 5, [2]), dict(unstable_index=1)),
                             ((10, 10, 5, [2]), dict(mistake_rate=1.5)),
                             ((10, 10, 5, [2, 3]), dict(missing_rate=[0.1])),
                             ((10, 10, 5, [2]), dict(hazard=0)),
                             ((10, 10, 5, [2]), dict(time_range_a=(3, 1)))]:
            with self.assertRaises(ConfigurationError):
                scenario.ScenarioConfig(*args, **kwargs)


class TestRegister(unittest.TestCase):
    def test_rates(self):
        h = np.full((10000, 2), 3)
        g = scenario.register(h, [5, 5], np.array([0.1, 0.0]),
                              np.array([0.05, 0.05]), 0)
        missing = g == 0
        assert_allclose(missing.mean(axis=0), 0.05, atol=0.007)
        observed = ~missing[:, 0]
        assert_allclose((g[observed, 0] != 3).mean(), 0.1, atol=0.01)
        assert_array_equal(g[~missing[:, 1], 1], 3)

    def test_draw_other(self):
        values = np.repeat(np.arange(1, 5), 100)
        other = scenario.draw_other(values, 4, np.random.default_rng(0))
        self.assertTrue(np.all(other != values))
        self.assertTrue(np.all((other >= 1) & (other <= 4)))
        self.assertEqual(len(np.unique(other[values == 1])), 3)


class TestGroundTruth(unittest.TestCase):
    def test(self):
        truth = scenario.GroundTruth([3, 1], [0, 2])
        self.assertEqual(truth.pairs, [(1, 2), (3, 0)])
        self.assertEqual(list(truth.frame().columns),
                         ['row_index_a', 'row_index_b'])
        with self.assertRaises(DataError):
            scenario.GroundTruth([1, 1], [0, 2])
        with self.assertRaises(ValueError):
            scenario.GroundTruth([1], [0, 2])


class TestGenerateScenario(unittest.TestCase):
    def test_paper_defaults(self):
        a, b, truth = scenario.generate_scenario(
            scenario.ScenarioConfig.paper_defaults(seed=1))
        self.assertEqual((a.n_records, b.n_records, len(truth)),
                         (800, 1000, 500))
        self.assertEqual(a.names, ['V1', 'V2', 'V3', 'V4', 'V5'])
        assert_array_equal(a.support_sizes, [6, 7, 8, 9, 15])
        self.assertTrue(np.all((a.times >= 0) & (a.times <= 3)))
        self.assertTrue(np.all((b.times >= 3) & (b.times <= 6)))
        self.assertEqual(len(np.unique(truth.cols)), 500)

    def test_deterministic(self):
        cfg = scenario.ScenarioConfig(50, 60, 20, [3, 4], mistake_rate=0.1,
                                      unstable_index=1, seed=9)
        first = scenario.generate_scenario(cfg)
        second = scenario.generate_scenario(cfg)
        for x, y in zip(first[:2], second[:2]):
            assert_array_equal(x.values, y.values)
            assert_array_equal(x.times, y.times)
        self.assertEqual(first[2].pairs, second[2].pairs)

    def test_clean_links_agree(self):
        cfg = scenario.ScenarioConfig(30, 40, 20, [3, 4, 5], seed=2)
        a, b, truth = scenario.generate_scenario(cfg)
        assert_array_equal(a.values[truth.rows], b.values[truth.cols])

    def test_agreement_of_links(self):
        stable, unstable = [], []
        for seed in range(4):
            a, b, truth = scenario.generate_scenario(
                scenario.ScenarioConfig.paper_defaults(seed=seed))
            agree = link_agreement(a, b, truth)
            stable.append(agree[:4].mean())
            unstable.append(agree[4])
        assert_allclose(np.mean(stable), 0.95, atol=0.02)
        # E[S(t)] under the two time ranges, with both values observed
        rate = 0.28
        survival = ((np.exp(-3 * rate) - np.exp(-6 * rate)) / (3 * rate) *
                    (np.exp(3 * rate) - 1) / (3 * rate))
        assert_allclose(np.mean(unstable), survival * 0.993 ** 2, atol=0.04)
        assert_allclose(np.mean(unstable), 0.46, atol=0.05)


class TestWriteScenario(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.cfg = scenario.ScenarioConfig(30, 40, 15, [3, 4, 5],
                                           mistake_rate=[0.05, 0.05, 0],
                                           missing_rate=0.1, unstable_index=2,
                                           seed=4)
        self.a, self.b, self.truth = scenario.generate_scenario(self.cfg)

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_files(self):
        paths = scenario.write_scenario(self.directory, self.a, self.b,
                                        self.truth, self.cfg)
        self.assertEqual(set(paths), {'a', 'b', 'truth', 'config'})
        frame = pd.read_csv(paths['a'], dtype=str, keep_default_na=False)
        self.assertEqual(list(frame.columns), ['V1', 'V2', 'V3', 't'])
        self.assertEqual((frame['V1'] == '').sum(),
                         (self.a.values[:, 0] == 0).sum())
        self.assertEqual(scenario.read_truth(paths['truth']).pairs,
                         self.truth.pairs)
        with open(paths['config']) as f:
            text = f.read()
        self.assertIn('[pivs.V3]\nstable = false\nmistake_bound = 0.0', text)

    def test_reread(self):
        paths = scenario.write_scenario(self.directory, self.a, self.b,
                                        self.truth, self.cfg)
        config = LinkConfig.from_file(paths['config'])
        a, b, specs, _ = read_tables(config)
        self.assertEqual([spec.stable for spec in specs], [True, True, False])
        assert_array_equal(a.missing, self.a.missing)
        assert_allclose(b.times, self.b.times)
        assert_array_equal(link_agreement(a, b, self.truth),
                           link_agreement(self.a, self.b, self.truth))

    def test_specs_match_config(self):
        paths = scenario.write_scenario(self.directory, self.a, self.b,
                                        self.truth, self.cfg)
        _, _, read, _ = read_tables(LinkConfig.from_file(paths['config']))
        specs = scenario.scenario_specs(self.cfg)
        self.assertEqual([s.support_size for s in specs], [3, 4, 5])
        for ours, theirs in zip(specs, read):
            self.assertEqual((ours.name, ours.stable, ours.mistake_bound),
                             (theirs.name, theirs.stable,
                              theirs.mistake_bound))
        self.assertEqual(specs[2].mistake_bound, 0.0)

    def test_read_truth_errors(self):
        path = os.path.join(self.directory, 'truth.csv')
        pd.DataFrame({'row_index_a': [0, 0], 'row_index_b': [1, 2]}).to_csv(
            path, index=False)
        with self.assertRaises(DataError):
            scenario.read_truth(path)
        pd.DataFrame({'row_index_a': [0]}).to_csv(path, index=False)
        with self.assertRaisesRegex(DataError, 'row_index_b'):
            scenario.read_truth(path)
        with self.assertRaises(DataError):
            scenario.read_truth(os.path.join(self.directory, 'absent.csv'))


class TestDistortion(unittest.TestCase):
    def setUp(self):
        cfg = scenario.ScenarioConfig(4000, 5000, 3000, [6, 7, 8, 9, 15],
                                      seed=5)
        self.a, self.b, self.truth = scenario.generate_scenario(cfg)

    def test_level(self):
        self.assertEqual(distortion.distortion_level(self.a, self.b,
                                                     self.truth), 0)
        a, b = distortion.inject_distortion(self.a, self.b, self.truth, 0.04,
                                            seed=1)
        assert_allclose(distortion.distortion_level(a, b, self.truth), 0.04,
                        atol=0.01)

    def test_level_zero(self):
        a, b = distortion.inject_distortion(self.a, self.b, self.truth, 0.0, 1)
        self.assertIs(a, self.a)
        self.assertIs(b, self.b)

    def test_deterministic(self):
        first = distortion.inject_distortion(self.a, self.b, level=0.1, seed=3)
        second = distortion.inject_distortion(self.a, self.b, level=0.1,
                                              seed=3)
        for x, y in zip(first, second):
            assert_array_equal(x.values, y.values)
        assert_array_equal(first[0].times, self.a.times)

    def test_shares(self):
        a, _ = distortion.inject_distortion(self.a, self.b, level=0.2, seed=0,
                                            substitution_share=1.0)
        self.assertFalse(np.any(a.values == 0))
        self.assertTrue(np.any(a.values != self.a.values))
        a, _ = distortion.inject_distortion(self.a, self.b, level=0.2, seed=0,
                                            substitution_share=0.0)
        changed = a.values != self.a.values
        assert_array_equal(a.values[changed], 0)
        with self.assertRaises(ValueError):
            distortion.inject_distortion(self.a, self.b, level=0.6)

    def test_medians(self):
        a = RecordTable([[1, 1, 1], [1, 1, 1], [1, 1, 1], [1, 1, 1],
                         [1, 1, 1], [1, 1, 1], [1, 1, 1], [1, 1, 1],
                         [1, 1, 1], [1, 1, 1]], support_sizes=[2, 2, 2])
        values = a.values.copy()
        values[0, 1] = 2
        values[:2, 2] = 2
        values[2:5, 2] = 0
        b = RecordTable(values, support_sizes=[2, 2, 2])
        truth = scenario.GroundTruth(np.arange(10), np.arange(10))
        # disagreement (0, 0.1, 0.2), missing (0, 0, 0.3)
        assert_allclose(distortion.distortion_level(a, b, truth), 0.1)
        with self.assertRaises(ValueError):
            distortion.distortion_level(a, b, scenario.GroundTruth([], []))
