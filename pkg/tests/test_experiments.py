import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd
from numpy.testing import assert_allclose

from pivlink.evaluate import confusion, simplistic_link
from pivlink.exceptions import ConfigurationError
from pivlink.inference.stem import StemConfig
from pivlink.simulate import experiments
from pivlink.simulate.distortion import distortion_level
from pivlink.simulate.scenario import (ScenarioConfig, generate_scenario,
                                       scenario_specs)


def small_experiment(seed=3):
    design = ScenarioConfig(30, 40, 20, [4, 5, 6],
                            mistake_rate=[0.02, 0.02, 0], missing_rate=0.02,
                            unstable_index=2, seed=seed)
    return experiments.ExperimentConfig(
        design, StemConfig(v0=2, v1=2, z0=3, z1=3), n_sim=20, posterior_z0=3)


class TestReplicate(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.cfg = small_experiment()
        cls.results = experiments.replicate(2, cls.cfg)

    def test_rows(self):
        self.assertEqual(self.results.columns.tolist(),
                         ['replication', 'seed', 'method', 'tp', 'fp', 'fn',
                          'fdr', 'sensitivity', 'f1'])
        self.assertEqual(self.results['method'].tolist(),
                         list(experiments.METHODS) * 2)
        self.assertEqual(self.results['seed'].tolist(), [3, 3, 3, 4, 4, 4])
        assert_allclose(self.results['tp'] + self.results['fn'], 20)
        self.assertTrue(self.results['f1'].between(0, 1).all())

    def test_simplistic_rows(self):
        for r in range(2):
            a, b, truth = generate_scenario(self.cfg.design_for(r))
            row = self.results[(self.results['replication'] == r) &
                               (self.results['method'] == 'simplistic')]
            counts = confusion(simplistic_link(a, b), truth)
            self.assertEqual(tuple(row[['tp', 'fp', 'fn']].iloc[0]),
                             tuple(counts))

    def test_deterministic(self):
        again = experiments.replicate(2, small_experiment(),
                                      methods=['instability'])
        model = self.results[self.results['method'] == 'instability']
        pd.testing.assert_frame_equal(again,
                                      model.reset_index(drop=True))

    def test_design_seeds(self):
        self.assertEqual(self.cfg.design_for(5).seed, 8)
        self.assertEqual(self.cfg.design.seed, 3)

    def test_validation(self):
        with self.assertRaises(ConfigurationError):
            experiments.replicate(0, self.cfg)
        with self.assertRaisesRegex(ConfigurationError, 'exact'):
            experiments.replicate(1, self.cfg, methods=['exact'])
        with self.assertRaises(ConfigurationError):
            experiments.ExperimentConfig(n_sim=0)
        with self.assertRaises(ConfigurationError):
            experiments.ExperimentConfig(threshold=1.0)


class TestSummaries(unittest.TestCase):
    def results(self):
        return pd.DataFrame({
            'method': ['model', 'baseline', 'model', 'baseline'],
            'tp': [10, 6, 12, 8], 'fp': [2, 4, 2, 2], 'fn': [10, 14, 8, 12],
            'fdr': [0.2, 0.4, 0.1, 0.2], 'sensitivity': [0.5, 0.3, 0.6, 0.4],
            'f1': [0.6, 0.4, 0.7, 0.5]})

    def test_summarize(self):
        summary = experiments.summarize(self.results())
        self.assertEqual(summary['method'].tolist(), ['model', 'baseline'])
        self.assertEqual(summary['n'].tolist(), [2, 2])
        assert_allclose(summary['tp_mean'], [11, 7])
        assert_allclose(summary['f1_mean'], [0.65, 0.45])
        assert_allclose(summary['f1_std'], [np.sqrt(0.005)] * 2)
        self.assertIn('sensitivity_std', summary.columns)

    def test_f1_loss(self):
        ladder = self.results()
        ladder['level'] = [0.08, 0.08, 0.0, 0.0]
        loss = experiments.f1_loss(ladder)
        assert_allclose(loss['model'], 0.1)
        assert_allclose(loss['baseline'], 0.1)

    def test_export(self):
        directory = tempfile.mkdtemp()
        try:
            path = os.path.join(directory, 'out', 'summary.csv')
            summary = experiments.summarize(self.results())
            experiments.export_results(summary, path)
            frame = pd.read_csv(path)
            self.assertEqual(frame.columns.tolist(), summary.columns.tolist())
            assert_allclose(frame['f1_mean'], [0.65, 0.45])
        finally:
            shutil.rmtree(directory)


class TestDistortionLadder(unittest.TestCase):
    def test_ladder(self):
        cfg = small_experiment(seed=5)
        ladder = experiments.distortion_ladder((0.0, 0.3), cfg)
        self.assertEqual(ladder['method'].tolist(),
                         ['instability', 'simplistic'] * 2)
        self.assertEqual(ladder['level'].tolist(), [0.0, 0.0, 0.3, 0.3])
        a, b, truth = generate_scenario(cfg.design)
        assert_allclose(ladder['distortion'].iloc[0],
                        distortion_level(a, b, truth))
        self.assertGreater(ladder['distortion'].iloc[2],
                           ladder['distortion'].iloc[0])
        assert_allclose(ladder['tp'] + ladder['fn'], 20)
        clean = ladder[(ladder['level'] == 0) &
                       (ladder['method'] == 'simplistic')]
        self.assertEqual(clean['tp'].iloc[0],
                         confusion(simplistic_link(a, b), truth).tp)
        self.assertEqual(set(experiments.f1_loss(ladder)),
                         {'instability', 'simplistic'})

    def test_all_stable_specs(self):
        specs = scenario_specs(small_experiment().design)
        stable = [s.as_stable() for s in specs]
        self.assertTrue(all(s.stable for s in stable))
        self.assertEqual(stable[2].mistake_bound, 1.0)
        self.assertEqual(stable[0].mistake_bound, specs[0].mistake_bound)
