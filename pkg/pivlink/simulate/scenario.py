"""
Synthetic pairs of overlapping files with known links

Individuals draw their true PIV values independently, with P(H = h)
proportional to exp(0.25 h) on {1..n_k}. The linked individuals appear in both
files; the value of the unstable PIV, if any, moves to one of the other n_k - 1
values with probability 1 - S(t) between the two registrations. Each file then
registers every value, missing with probability missing_rate, else mistaken
(replaced uniformly by one of the other values) with probability mistake_rate.
"""
import logging
import os

import numpy as np
import pandas as pd

from ..constants import (MISTAKE_BOUND, SIMULATION_HAZARD, SIMULATION_SLOPE)
from ..exceptions import ConfigurationError, DataError
from ..ingest import PivSpec, RecordTable, SupportMap, decode_table
from ..utils import check_random_state, inspect_repr, substream, \
    write_csv_atomic

logger = logging.getLogger(__name__)

TIME_COLUMN = 't'
TRUTH_COLUMNS = ['row_index_a', 'row_index_b']


def _per_piv(value, n_pivs, name):
    out = np.asarray(value, dtype=float)
    if out.ndim == 0:
        out = np.full(n_pivs, float(out))
    if out.shape != (n_pivs,):
        raise ConfigurationError('%s must be a scalar or have one entry per '
                                 'PIV' % name)
    if np.any((out < 0) | (out > 1)):
        raise ConfigurationError('%s must lie in [0, 1]' % name)
    return out


class ScenarioConfig(object):
    """
    Design of a simulated pair of files

    Parameters
    ----------
    n_a, n_b : int
        Number of records of file A and file B.
    n_links : int
        Number of individuals registered in both files.
    piv_supports : sequence of int
        Support size n_k of each PIV.
    mistake_rate, missing_rate : float or sequence of float
        Per-PIV probabilities of a registration mistake and of a missing value.
    unstable_index : int, optional
        Index of the PIV whose true value may change between registrations.
    hazard : float, default 0.28
        Constant hazard of the unstable PIV.
    time_range_a, time_range_b : tuple of float, default (0, 3) and (3, 6)
        Registration times are uniform on these intervals.
    seed : int, default 0
        Generation draws from the substream (seed, 3).
    slope : float, default 0.25
        Latent values are weighted by exp(slope * h).
    """
    def __init__(self, n_a, n_b, n_links, piv_supports, mistake_rate=0.0,
                 missing_rate=0.0, unstable_index=None,
                 hazard=SIMULATION_HAZARD, time_range_a=(0.0, 3.0),
                 time_range_b=(3.0, 6.0), seed=0, slope=SIMULATION_SLOPE):
        if min(n_a, n_b) < 1 or not 0 <= n_links <= min(n_a, n_b):
            raise ConfigurationError('file sizes must be positive and n_links '
                                     'must lie in {0..min(n_a, n_b)}')
        piv_supports = [int(n) for n in piv_supports]
        if not piv_supports or min(piv_supports) < 1:
            raise ConfigurationError('every PIV needs a support size of at '
                                     'least 1')
        n_pivs = len(piv_supports)
        if unstable_index is not None and not 0 <= unstable_index < n_pivs:
            raise ConfigurationError('unstable_index out of range')
        if not hazard > 0:
            raise ConfigurationError('hazard must be positive')
        for rng in (time_range_a, time_range_b):
            if not rng[0] <= rng[1]:
                raise ConfigurationError('time ranges must be (low, high) with '
                                         'low <= high')
        self.n_a = int(n_a)
        self.n_b = int(n_b)
        self.n_links = int(n_links)
        self.piv_supports = piv_supports
        self.mistake_rate = _per_piv(mistake_rate, n_pivs, 'mistake_rate')
        self.missing_rate = _per_piv(missing_rate, n_pivs, 'missing_rate')
        self.unstable_index = unstable_index
        self.hazard = float(hazard)
        self.time_range_a = tuple(float(x) for x in time_range_a)
        self.time_range_b = tuple(float(x) for x in time_range_b)
        self.seed = int(seed)
        self.slope = float(slope)

    def __repr__(self):
        return inspect_repr(self)

    @property
    def n_pivs(self):
        return len(self.piv_supports)

    @classmethod
    def paper_defaults(cls, seed=0):
        """
        Five PIVs with 6, 7, 8, 9 and 15 values, 800 and 1000 records of which
        500 are linked; 2% mistakes (none on the fifth, unstable PIV), 0.7%
        missing values and a hazard of 0.28 per unit time
        """
        return cls(800, 1000, 500, [6, 7, 8, 9, 15],
                   mistake_rate=[0.02, 0.02, 0.02, 0.02, 0.0],
                   missing_rate=0.007, unstable_index=4, seed=seed)

    def latent_distribution(self, k):
        """Distribution of the true values of PIV k"""
        weights = np.exp(self.slope * np.arange(1, self.piv_supports[k] + 1))
        return weights / weights.sum()


class GroundTruth(object):
    """
    The true links of a simulated pair of files, as (row in A, row in B)
    pairs sorted by row
    """
    def __init__(self, rows, cols):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.shape != cols.shape:
            raise ValueError('rows and cols must have the same length')
        if (len(np.unique(rows)) != len(rows) or
                len(np.unique(cols)) != len(cols)):
            raise DataError('true links must be one-to-one')
        order = np.argsort(rows, kind='stable')
        self.rows = rows[order]
        self.cols = cols[order]

    def __repr__(self):
        return 'GroundTruth(n_links=%d)' % len(self)

    def __len__(self):
        return len(self.rows)

    @property
    def pairs(self):
        return [(int(i), int(j)) for i, j in zip(self.rows, self.cols)]

    def frame(self):
        return pd.DataFrame({'row_index_a': self.rows,
                             'row_index_b': self.cols}, columns=TRUTH_COLUMNS)


def draw_other(values, n_k, rng):
    """Uniform draw among the n_k - 1 codes different from each value"""
    shift = rng.integers(1, n_k, size=len(values)) if n_k > 1 else 0
    return (values - 1 + shift) % n_k + 1


def register(h, n_supports, mistake_rate, missing_rate, random_state=None):
    """
    Registered codes of true values h: missing (0) with probability
    missing_rate, otherwise a different value with probability mistake_rate

    Parameters
    ----------
    h : np.ndarray of int, shape (n, K)
    n_supports : sequence of int
    mistake_rate, missing_rate : np.ndarray, shape (K,)
    """
    rng = check_random_state(random_state)
    g = np.array(h, dtype=np.int64)
    for k, n_k in enumerate(n_supports):
        missing = rng.random(len(g)) < missing_rate[k]
        mistaken = ~missing & (rng.random(len(g)) < mistake_rate[k])
        if n_k > 1:
            g[mistaken, k] = draw_other(g[mistaken, k], n_k, rng)
        g[missing, k] = 0
    return g


def generate_scenario(cfg):
    """
    Simulate two files with overlapping individuals

    Parameters
    ----------
    cfg : ScenarioConfig

    Returns
    -------
    a, b : RecordTable
        Registered codes (columns V1, V2, ...) with registration times.
    truth : GroundTruth
    """
    rng = substream(cfg.seed, 3)
    n_pivs = cfg.n_pivs
    n_people = cfg.n_a + cfg.n_b - cfg.n_links
    latent = np.column_stack([
        rng.choice(n_k, size=n_people, p=cfg.latent_distribution(k)) + 1
        for k, n_k in enumerate(cfg.piv_supports)])

    rows = np.sort(rng.choice(cfg.n_a, size=cfg.n_links, replace=False))
    cols = rng.choice(cfg.n_b, size=cfg.n_links, replace=False)
    # individuals 0..n_a-1 are the records of A; B holds the linked ones at
    # `cols` and fresh individuals elsewhere
    person_of_b = np.full(cfg.n_b, -1, dtype=np.int64)
    person_of_b[cols] = rows
    person_of_b[person_of_b < 0] = np.arange(cfg.n_a, n_people)
    h_a = latent[:cfg.n_a]
    h_b = latent[person_of_b].copy()

    t_a = rng.uniform(*cfg.time_range_a, size=cfg.n_a)
    t_b = rng.uniform(*cfg.time_range_b, size=cfg.n_b)
    k = cfg.unstable_index
    if k is not None and cfg.n_links:
        survival = np.exp(-cfg.hazard * np.abs(t_b[cols] - t_a[rows]))
        changed = rng.random(cfg.n_links) >= survival
        h_b[cols[changed], k] = draw_other(h_b[cols[changed], k],
                                            cfg.piv_supports[k], rng)

    names = ['V%d' % (k + 1) for k in range(n_pivs)]
    tables = [RecordTable(register(h, cfg.piv_supports, cfg.mistake_rate,
                                   cfg.missing_rate, rng),
                          t, names, cfg.piv_supports)
              for h, t in ((h_a, t_a), (h_b, t_b))]
    logger.info('simulated %d and %d records with %d links', cfg.n_a, cfg.n_b,
                cfg.n_links)
    return tables[0], tables[1], GroundTruth(rows, cols)


def table_frame(table, supports=None, time_column=TIME_COLUMN):
    """
    Raw CSV view of a RecordTable: one column per PIV (missing values empty)
    plus the time column

    Codes are written as integers unless `supports` maps them back to raw
    values.
    """
    if supports is None:
        supports = [SupportMap([str(c) for c in range(1, n_k + 1)])
                    for n_k in table.support_sizes]
    frame = decode_table(table, supports)
    if table.times is not None:
        frame[time_column] = table.times
    return frame


def _mistake_bound(k, unstable_index, mistake_rate):
    if (k == unstable_index and mistake_rate is not None and
            mistake_rate[k] == 0):
        return 0.0
    return MISTAKE_BOUND


def scenario_specs(cfg):
    """
    PIV metadata matching a scenario design: columns V1..VK, the unstable PIV
    flagged, and a zero mistake bound on an unstable PIV registered without
    mistakes
    """
    return [PivSpec('V%d' % (k + 1), n_k, k != cfg.unstable_index,
                    _mistake_bound(k, cfg.unstable_index, cfg.mistake_rate))
            for k, n_k in enumerate(cfg.piv_supports)]


def scenario_toml(names, unstable_index=None, mistake_rate=None,
                  time_column=TIME_COLUMN):
    """
    Text of a run configuration for the files written by `write_scenario`
    """
    lines = ['[files]', 'a = "A.csv"', 'b = "B.csv"',
             'time_column = "%s"' % time_column, '']
    for k, name in enumerate(names):
        stable = k != unstable_index
        bound = _mistake_bound(k, unstable_index, mistake_rate)
        lines += ['[pivs.%s]' % name, 'stable = %s' % str(stable).lower(),
                  'mistake_bound = %r' % bound, '']
    return '\n'.join(lines)


def write_scenario(out_dir, a, b, truth, cfg=None, supports=None,
                   config_text=None, time_column=TIME_COLUMN):
    """
    Write A.csv, B.csv, truth.csv and a matching link.toml to out_dir

    The configuration is generated from `cfg` unless `config_text` is given.

    Returns
    -------
    paths : dict
        Written paths keyed by 'a', 'b', 'truth' and 'config'.
    """
    paths = {'a': os.path.join(out_dir, 'A.csv'),
             'b': os.path.join(out_dir, 'B.csv'),
             'truth': os.path.join(out_dir, 'truth.csv'),
             'config': os.path.join(out_dir, 'link.toml')}
    write_csv_atomic(table_frame(a, supports, time_column), paths['a'])
    write_csv_atomic(table_frame(b, supports, time_column), paths['b'])
    write_csv_atomic(truth.frame(), paths['truth'])
    unstable = None if cfg is None else cfg.unstable_index
    mistakes = None if cfg is None else cfg.mistake_rate
    try:
        with open(paths['config'], 'w') as f:
            f.write(config_text if config_text is not None else
                    scenario_toml(a.names, unstable, mistakes, time_column))
    except OSError as e:
        raise DataError('could not write {}: {}'.format(paths['config'], e))
    logger.info('wrote scenario to %s', out_dir)
    return paths


def read_truth(path):
    """
    Read a truth CSV (columns row_index_a, row_index_b)

    Raises
    ------
    DataError
        If the file cannot be read, lacks a column or is not one-to-one.
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError('could not read {}: {}'.format(path, e))
    absent = [c for c in TRUTH_COLUMNS if c not in frame.columns]
    if absent:
        raise DataError('{}: missing column(s) {}'.format(path,
                                                          ', '.join(absent)))
    try:
        return GroundTruth(frame['row_index_a'].astype(np.int64),
                           frame['row_index_b'].astype(np.int64))
    except (ValueError, TypeError) as e:
        raise DataError('{}: {}'.format(path, e))
