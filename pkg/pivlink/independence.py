"""
Sensitivity of the independence of row sums of the linkage matrix

Records of A are captured in B one at a time. The ratio

    P(N^B = n_b | c + 1 captures after k draws) / P(N^B = n_b | c captures
    after k - 1 draws)

measures how far conditioning on the size of B moves the capture probability
of the k-th record away from its unconditional value: close to 1, the
captures are nearly independent given the size of B. Each term is a
convolution of the number of later captures (binomial) with the number of
records of B outside A (Poisson with mean n_b).
"""
import logging

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import logsumexp

from .constants import LOG_TRUNCATION
from .utils import inspect_repr, write_csv_atomic

logger = logging.getLogger(__name__)


class CaptureScenario(object):
    """
    Parameters
    ----------
    n_a, n_b : int
        Sizes of file A and file B, with n_b >= n_a.
    k : int
        Number of records of A drawn so far.
    c : int
        Number of those found in B, 0 <= c <= k <= n_a.
    overlap_success : float, default 0.5
        Probability that a record of A not yet drawn is in B.
    """
    def __init__(self, n_a, n_b, k, c, overlap_success=0.5):
        if not 0 <= c <= k <= n_a:
            raise ValueError('need 0 <= c <= k <= n_a')
        if n_b < n_a:
            raise ValueError('need n_b >= n_a')
        if not 0 <= overlap_success <= 1:
            raise ValueError('overlap_success must lie in [0, 1]')
        self.n_a = int(n_a)
        self.n_b = int(n_b)
        self.k = int(k)
        self.c = int(c)
        self.overlap_success = float(overlap_success)

    def __repr__(self):
        return inspect_repr(self)


def _log_convolution(n_trials, p, total, mu):
    """
    log sum_l Binomial(l; n_trials, p) Poisson(total - l; mu), or -inf when
    total < 0
    """
    if total < 0:
        return -np.inf
    ell = np.arange(min(n_trials, total) + 1)
    terms = (stats.binom.logpmf(ell, n_trials, p) +
             stats.poisson.logpmf(total - ell, mu))
    top = terms.max()
    if not np.isfinite(top):
        return -np.inf
    return float(logsumexp(terms[terms >= top - LOG_TRUNCATION]))


def capture_ratio(s):
    """
    Ratio of the two convolutions for a CaptureScenario, computed in log space

    Returns 0 when n_b < c + 1.
    """
    p, mu = s.overlap_success, float(s.n_b)
    numerator = _log_convolution(s.n_a - s.k, p, s.n_b - (s.c + 1), mu)
    if numerator == -np.inf:
        return 0.0
    denominator = _log_convolution(s.n_a - s.k + 1, p, s.n_b - s.c, mu)
    return float(np.exp(numerator - denominator))


def capture_ratio_naive(s):
    """
    capture_ratio by direct summation of the probabilities, for checking at
    moderate sizes
    """
    p, mu = s.overlap_success, float(s.n_b)

    def convolution(n_trials, total):
        ell = np.arange(total + 1)
        return float(np.sum(stats.binom.pmf(ell, n_trials, p) *
                            stats.poisson.pmf(total - ell, mu)))

    if s.n_b < s.c + 1:
        return 0.0
    return (convolution(s.n_a - s.k, s.n_b - (s.c + 1)) /
            convolution(s.n_a - s.k + 1, s.n_b - s.c))


def ratio_grid(n_a, k, c_values, n_b_values, overlap_success=0.5):
    """
    capture_ratio over a grid of capture counts (rows) and sizes of B
    (columns)

    Returns
    -------
    ratios : np.ndarray, shape (len(c_values), len(n_b_values))
    """
    c_values = list(c_values)
    n_b_values = list(n_b_values)
    if not c_values or not n_b_values:
        raise ValueError('grids must be nonempty')
    return np.array([[capture_ratio(CaptureScenario(n_a, n_b, k, c,
                                                    overlap_success))
                      for n_b in n_b_values] for c in c_values])


def grid_frame(c_values, n_b_values, ratios):
    """Long-format DataFrame (c, n_b, ratio) of a ratio grid"""
    c_grid, n_b_grid = np.meshgrid(c_values, n_b_values, indexing='ij')
    return pd.DataFrame({'c': c_grid.ravel(), 'n_b': n_b_grid.ravel(),
                         'ratio': np.asarray(ratios).ravel()},
                        columns=['c', 'n_b', 'ratio'])


def export_grid(path, n_a, k, c_values, n_b_values, overlap_success=0.5):
    """Compute a ratio grid and write it as CSV"""
    ratios = ratio_grid(n_a, k, c_values, n_b_values, overlap_success)
    write_csv_atomic(grid_frame(c_values, n_b_values, ratios), path)
    logger.info('wrote %dx%d capture-ratio grid to %s', len(ratios),
                ratios.shape[1], path)
    return ratios
