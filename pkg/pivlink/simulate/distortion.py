"""
Controlled extra registration errors, and the distortion level of a pair of
files measured on their true links
"""
import logging

import numpy as np

from ..ingest import RecordTable
from ..utils import check_random_state, substream
from .scenario import draw_other

logger = logging.getLogger(__name__)


def _random_state(seed):
    if seed is None or isinstance(seed, np.random.Generator):
        return check_random_state(seed)
    return substream(seed, 4)


def _distort(table, p_substitute, p_blank, rng):
    values = table.values.copy()
    for k, n_k in enumerate(table.support_sizes):
        u = rng.random(table.n_records)
        blank = u < p_blank
        substitute = (~blank & (u < p_blank + p_substitute) &
                      (values[:, k] != 0))
        if n_k > 1:
            values[substitute, k] = draw_other(values[substitute, k], n_k,
                                               rng)
        values[blank, k] = 0
    return RecordTable(values, table.times, table.names, table.support_sizes)


def inject_distortion(a, b, truth=None, level=0.0, seed=None,
                      substitution_share=0.5):
    """
    Substitute and blank PIV values of both files uniformly at random

    Every entry of each file is blanked with probability level * (1 - s) / 2
    and otherwise, when observed, replaced by a different value with
    probability level * s / 2, where s is `substitution_share`. A linked pair
    then disagrees or has a missing value on a PIV with probability close to
    `level`, so the distortion_level of clean files rises by about `level`.

    Parameters
    ----------
    a, b : RecordTable
    truth : GroundTruth, optional
        Unused by the injection itself; accepted so callers can pass the
        scenario triple through.
    level : float
        Target increase of the distortion level, in [0, 0.5].
    seed : None, int or np.random.Generator
        Integer seeds draw from the substream (seed, 4).
    substitution_share : float, default 0.5
        Share of the distortion made of substitutions rather than deletions.

    Returns
    -------
    a, b : RecordTable
    """
    if not 0 <= level <= 0.5:
        raise ValueError('level must lie in [0, 0.5]')
    if not 0 <= substitution_share <= 1:
        raise ValueError('substitution_share must lie in [0, 1]')
    if level == 0:
        return a, b
    rng = _random_state(seed)
    p_substitute = level * substitution_share / 2
    p_blank = level * (1 - substitution_share) / 2
    out = tuple(_distort(table, p_substitute, p_blank, rng)
                for table in (a, b))
    logger.info('injected distortion at level %.3f', level)
    return out


def distortion_level(a, b, truth):
    """
    Median over PIVs of the disagreement rate among true links plus the median
    of their missing-value rate

    A true link disagrees on a PIV when both values are observed and differ,
    and counts as missing when either value is.
    """
    if not len(truth):
        raise ValueError('the distortion level needs at least one true link')
    g_a = a.values[truth.rows]
    g_b = b.values[truth.cols]
    missing = (g_a == 0) | (g_b == 0)
    disagree = ~missing & (g_a != g_b)
    return float(np.median(disagree.mean(axis=0)) +
                 np.median(missing.mean(axis=0)))
