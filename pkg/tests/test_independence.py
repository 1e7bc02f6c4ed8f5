import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd
from numpy.testing import assert_allclose

from pivlink import independence
from pivlink.independence import CaptureScenario


class TestCaptureScenario(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ValueError):
            CaptureScenario(10, 20, 3, 4)
        with self.assertRaises(ValueError):
            CaptureScenario(10, 5, 3, 1)
        with self.assertRaises(ValueError):
            CaptureScenario(10, 20, 3, 1, overlap_success=2)


class TestCaptureRatio(unittest.TestCase):
    def test_against_naive_sum(self):
        for args in [(20, 30, 3, 1), (20, 50, 10, 5), (40, 40, 1, 0)]:
            s = CaptureScenario(*args)
            assert_allclose(independence.capture_ratio(s),
                            independence.capture_ratio_naive(s), rtol=1e-9)

    def test_values(self):
        # reference values from a 40-digit double sum
        for n_b, expected in [(1000, 0.9499813782764407),
                              (500, 0.9003934674520068)]:
            s = CaptureScenario(200, n_b, 10, 5)
            assert_allclose(independence.capture_ratio(s), expected,
                            rtol=1e-8)
            assert_allclose(independence.capture_ratio_naive(s), expected,
                            rtol=1e-8)

    def test_close_to_one(self):
        ratios = independence.ratio_grid(200, 190, range(0, 21),
                                         range(1000, 2001, 200))
        self.assertTrue(np.all(ratios > 0.95))
        ratios = independence.ratio_grid(200, 10, range(0, 11),
                                         range(1000, 2001, 200))
        self.assertTrue(np.all(ratios > 0.90))
        self.assertTrue(np.all(ratios < 1))

    def test_increasing_in_n_b(self):
        ratios = independence.ratio_grid(200, 10, [0, 5, 10],
                                         range(200, 2001, 200))
        self.assertTrue(np.all(np.diff(ratios, axis=1) > 0))

    def test_too_few_records(self):
        s = CaptureScenario(5, 5, 5, 5)
        self.assertEqual(independence.capture_ratio(s), 0)
        self.assertEqual(independence.capture_ratio_naive(s), 0)


class TestExportGrid(unittest.TestCase):
    def test(self):
        directory = tempfile.mkdtemp()
        try:
            path = os.path.join(directory, 'grid.csv')
            ratios = independence.export_grid(path, 50, 5, [0, 1, 2],
                                              [50, 100])
            frame = pd.read_csv(path)
            self.assertEqual(list(frame.columns), ['c', 'n_b', 'ratio'])
            self.assertEqual(len(frame), 6)
            self.assertEqual(frame['c'].tolist(), [0, 0, 1, 1, 2, 2])
            assert_allclose(frame['ratio'], ratios.ravel())
        finally:
            shutil.rmtree(directory)

    def test_empty_grid(self):
        with self.assertRaises(ValueError):
            independence.ratio_grid(50, 5, [], [50])
