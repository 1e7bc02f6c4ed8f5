import json
import os
import shutil
import tempfile
import unittest

import pandas as pd

from pivlink import cli
from pivlink.simulate.scenario import (ScenarioConfig, generate_scenario,
                                       write_scenario)

SMALL_RUN = """
[stem]
v0 = 2
v1 = 2
z0 = 3
z1 = 3
seed = 1

[posterior]
n_sim = 20
z0 = 3
"""


class TestCommands(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.sim = os.path.join(self.directory, 'sim')
        cfg = ScenarioConfig(40, 50, 25, [4, 5, 6],
                             mistake_rate=[0.02, 0.02, 0], missing_rate=0.02,
                             unstable_index=2, seed=1)
        self.paths = write_scenario(self.sim, *generate_scenario(cfg), cfg=cfg)
        with open(self.paths['config'], 'a') as f:
            f.write(SMALL_RUN)

    def tearDown(self):
        shutil.rmtree(self.directory)

    def path(self, *parts):
        return os.path.join(self.directory, *parts)

    def test_link_and_evaluate(self):
        out = self.path('run')
        self.assertEqual(cli.main(['link', '--config', self.paths['config'],
                                   '--out', out, '--fdr', '0.2']), 0)
        for name in ('links.csv', 'trace.csv', 'posterior_hist.csv',
                     'manifest.json'):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        self.assertEqual(len(pd.read_csv(os.path.join(out, 'trace.csv'))), 4)
        with open(os.path.join(out, 'manifest.json')) as f:
            manifest = json.load(f)
        links = pd.read_csv(os.path.join(out, 'links.csv'))
        self.assertEqual(manifest['result']['n_links'], len(links))
        self.assertEqual(manifest['config']['posterior']['fdr'], 0.2)
        self.assertEqual(manifest['seed'], 1)
        self.assertIn(os.fspath(self.paths['config']), manifest['inputs'])

        report = self.path('report.csv')
        self.assertEqual(cli.main(['evaluate', '--links',
                                   os.path.join(out, 'links.csv'), '--truth',
                                   self.paths['truth'], '--out', report]), 0)
        frame = pd.read_csv(report)
        self.assertEqual(frame['tp'][0] + frame['fp'][0], len(links))

    def test_link_options(self):
        out = self.path('run')
        self.assertEqual(cli.main(['-q', 'link', '--config',
                                   self.paths['config'], '--out', out,
                                   '--threshold', '0.9', '--seed', '4',
                                   '--all-stable', '--threads', '2']), 0)
        with open(os.path.join(out, 'manifest.json')) as f:
            manifest = json.load(f)
        self.assertEqual(manifest['result']['threshold_used'], 0.9)
        self.assertTrue(manifest['all_stable'])
        self.assertEqual(manifest['seed'], 4)
        links = pd.read_csv(os.path.join(out, 'links.csv'))
        self.assertTrue((links['probability'] > 0.9).all())

    def test_simplistic(self):
        self.assertEqual(cli.main(['evaluate', '--simplistic',
                                   self.paths['config'], '--truth',
                                   self.paths['truth']]), 0)

    def test_simulate(self):
        out = self.path('defaults')
        self.assertEqual(cli.main(['simulate', '--paper-defaults', '--seed',
                                   '2', '--out', out]), 0)
        self.assertEqual(len(pd.read_csv(os.path.join(out, 'A.csv'))), 800)
        self.assertEqual(len(pd.read_csv(os.path.join(out, 'truth.csv'))),
                         500)
        self.assertTrue(os.path.exists(os.path.join(out, 'link.toml')))

    def test_simulate_design(self):
        out = self.path('custom')
        self.assertEqual(cli.main(['simulate', '--n-a', '30', '--n-b', '40',
                                   '--n-links', '20', '--supports', '3', '4',
                                   '--mistake-rate', '0.01', '0',
                                   '--unstable-index', '1', '--out', out]), 0)
        frame = pd.read_csv(os.path.join(out, 'B.csv'))
        self.assertEqual(frame.columns.tolist(), ['V1', 'V2', 't'])
        self.assertEqual(len(frame), 40)
        self.assertEqual(len(pd.read_csv(os.path.join(out, 'truth.csv'))),
                         20)
        with open(os.path.join(out, 'link.toml')) as f:
            text = f.read()
        self.assertIn('[pivs.V2]\nstable = false\nmistake_bound = 0.0', text)

        out = self.path('fewer')
        self.assertEqual(cli.main(['simulate', '--paper-defaults',
                                   '--n-links', '100', '--out', out]), 0)
        self.assertEqual(len(pd.read_csv(os.path.join(out, 'truth.csv'))),
                         100)
        self.assertEqual(len(pd.read_csv(os.path.join(out, 'B.csv'))), 1000)

    def test_experiments(self):
        small = ['--n-a', '30', '--n-b', '40', '--n-links', '20',
                 '--supports', '4', '5', '6', '--unstable-index', '2',
                 '--mistake-rate', '0.02', '0.02', '0', '--missing-rate',
                 '0.02', '--v0', '2', '--v1', '2', '--z0', '3', '--z1', '3',
                 '--n-sim', '20', '--posterior-z0', '3']
        results, summary = self.path('reps.csv'), self.path('summary.csv')
        self.assertEqual(cli.main(['replicate', '--n-rep', '2', '--out',
                                   results, '--summary', summary] + small), 0)
        self.assertEqual(len(pd.read_csv(results)), 6)
        self.assertEqual(pd.read_csv(summary)['method'].tolist(),
                         ['instability', 'all_stable', 'simplistic'])

        ladder = self.path('ladder.csv')
        self.assertEqual(cli.main(['ladder', '--levels', '0', '0.05',
                                   '--out', ladder] + small), 0)
        frame = pd.read_csv(ladder)
        self.assertEqual(frame['level'].tolist(), [0, 0, 0.05, 0.05])
        self.assertEqual(cli.main(['ladder', '--n-a', '30', '--out',
                                   ladder]), 2)

    def test_distort(self):
        out = self.path('distorted')
        self.assertEqual(cli.main(['distort', '--in', self.sim, '--out', out,
                                   '--level', '0.1', '--seed', '3']), 0)
        before = pd.read_csv(self.paths['a'], dtype=str, keep_default_na=False)
        after = pd.read_csv(os.path.join(out, 'A.csv'), dtype=str,
                            keep_default_na=False)
        self.assertEqual(before.shape, after.shape)
        self.assertFalse(before.equals(after))
        with open(os.path.join(out, 'link.toml')) as f:
            self.assertIn('[stem]', f.read())

    def test_independence(self):
        path = self.path('grid.csv')
        self.assertEqual(cli.main(['independence', '--n-a', '50', '--k', '5',
                                   '--c', '0', '1', '--n-b', '50', '100',
                                   '--out', path]), 0)
        self.assertEqual(len(pd.read_csv(path)), 4)
        self.assertEqual(cli.main(['independence', '--n-a', '50', '--k', '5',
                                   '45', '--c', '0', '--n-b', '60', '--out',
                                   path]), 0)
        for k in (5, 45):
            self.assertTrue(os.path.exists(self.path('grid_k%d.csv' % k)))


class TestExitCodes(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_configuration_error(self):
        self.assertEqual(cli.main(['link', '--config',
                                   os.path.join(self.directory, 'absent.toml'),
                                   '--out', self.directory]), 2)
        self.assertEqual(cli.main(['evaluate', '--truth', 'truth.csv']), 2)

    def test_simulate_without_design(self):
        out = os.path.join(self.directory, 'sim')
        with self.assertLogs('pivlink.cli', 'ERROR') as logs:
            self.assertEqual(cli.main(['simulate', '--n-a', '10', '--out',
                                       out]), 2)
        self.assertIn('--n-b, --n-links, --supports', logs.output[0])
        self.assertFalse(os.path.exists(out))
        self.assertEqual(cli.main(['simulate', '--paper-defaults',
                                   '--supports', '4', '5', '--out', out]), 2)

    def test_unstable_without_times(self):
        for name in ('A.csv', 'B.csv'):
            with open(os.path.join(self.directory, name), 'w') as f:
                f.write('zip\n1000\n2000\n')
        config = os.path.join(self.directory, 'link.toml')
        with open(config, 'w') as f:
            f.write('[files]\na = "A.csv"\nb = "B.csv"\n\n'
                    '[pivs.zip]\nstable = false\n')
        with self.assertLogs('pivlink.cli', 'ERROR') as logs:
            self.assertEqual(cli.main(['link', '--config', config, '--out',
                                       os.path.join(self.directory, 'run')]),
                             2)
        self.assertIn("'zip'", logs.output[0])

    def test_data_error(self):
        config = os.path.join(self.directory, 'link.toml')
        with open(config, 'w') as f:
            f.write('[files]\na = "A.csv"\nb = "B.csv"\n\n[pivs.x]\n')
        self.assertEqual(cli.main(['link', '--config', config, '--out',
                                   self.directory]), 3)

    def test_usage(self):
        with self.assertRaises(SystemExit):
            cli.main(['link', '--config', 'x.toml', '--out', 'y',
                      '--threshold', '0.5', '--fdr', '0.1'])
