"""
Posterior linkage probabilities and the selection of a final set of links

At the estimated parameters, the Gibbs chain is run for n_sim further sweeps
(after a burn-in) and the link indicators of the kept states are averaged per
pair. Links are then declared for the pairs whose probability exceeds a
threshold, fixed or chosen to control the estimated false discovery rate

    FDR(xi) = 1 - mean of the probabilities of the pairs above xi.
"""
from concurrent.futures import ThreadPoolExecutor
import logging
import threading

import numpy as np
import pandas as pd

from ..constants import HISTOGRAM_BINS, N_SIM, POSTERIOR_Z0, XI
from ..exceptions import DataError
from ..utils import substream, write_csv_atomic
from .gibbs import GibbsSampler
from .stem import swap_params

logger = logging.getLogger(__name__)

LINK_COLUMNS = ['row_index_a', 'row_index_b', 'probability']


class LinkagePosterior(object):
    """
    Sparse per-pair marginal link probabilities

    Only pairs linked in at least one sample are stored; every other pair has
    probability exactly 0.

    Parameters
    ----------
    rows, cols : array_like of int
        Record indices (0-based) of the stored pairs in file A and file B.
    counts : array_like of int
        Number of samples in which each pair was linked.
    n_sim : int
        Number of samples.
    """
    def __init__(self, rows, cols, counts, n_sim):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if not rows.shape == cols.shape == counts.shape:
            raise ValueError('rows, cols and counts must have the same length')
        if n_sim < 1:
            raise ValueError('n_sim must be positive')
        if np.any(counts < 1) or np.any(counts > n_sim):
            raise ValueError('counts must lie in {1..n_sim}')
        order = np.lexsort((cols, rows))
        self.rows = rows[order]
        self.cols = cols[order]
        self.counts = counts[order]
        self.n_sim = int(n_sim)

    def __repr__(self):
        return 'LinkagePosterior(n_pairs=%d, n_sim=%d)' % (len(self),
                                                           self.n_sim)

    def __len__(self):
        return len(self.rows)

    @property
    def probs(self):
        return self.counts / float(self.n_sim)

    def get(self, i, j):
        """Probability that record i of A and record j of B are linked"""
        match = np.flatnonzero((self.rows == i) & (self.cols == j))
        return float(self.probs[match[0]]) if len(match) else 0.0

    def as_dict(self):
        return {(int(i), int(j)): float(p)
                for i, j, p in zip(self.rows, self.cols, self.probs)}

    def row_sums(self):
        """Total link probability of each row of A with a stored pair"""
        rows, inverse = np.unique(self.rows, return_inverse=True)
        return rows, np.bincount(inverse.reshape(-1), weights=self.probs)

    def merge(self, other):
        """
        Pool the samples of two posteriors over the same files
        """
        return _from_codes(np.concatenate([self._codes(), other._codes()]),
                           np.concatenate([self.counts, other.counts]),
                           self.n_sim + other.n_sim)

    def _codes(self):
        return np.stack([self.rows, self.cols], axis=1)

    def transpose(self):
        """Returns the same posterior with the roles of A and B exchanged"""
        return LinkagePosterior(self.cols, self.rows, self.counts, self.n_sim)

    def histogram(self, bins=HISTOGRAM_BINS):
        """
        Counts of the stored probabilities in uniform bins on [0, 1]

        Returns
        -------
        counts : np.ndarray of int, shape (bins,)
        edges : np.ndarray, shape (bins + 1,)
        """
        return np.histogram(self.probs, bins=bins, range=(0.0, 1.0))

    def export_histogram(self, path, bins=HISTOGRAM_BINS):
        counts, edges = self.histogram(bins)
        frame = pd.DataFrame({'bin_left': edges[:-1], 'bin_right': edges[1:],
                              'count': counts})
        write_csv_atomic(frame, path)
        logger.info('wrote posterior histogram to %s', path)
        return path


def _from_codes(pairs, counts, n_sim):
    if not len(pairs):
        return LinkagePosterior([], [], [], n_sim)
    unique, inverse = np.unique(pairs, axis=0, return_inverse=True)
    summed = np.bincount(inverse.reshape(-1), weights=counts).astype(np.int64)
    return LinkagePosterior(unique[:, 0], unique[:, 1], summed, n_sim)


class LinkSet(object):
    """
    A selected set of links

    Attributes
    ----------
    rows, cols : np.ndarray of int
        Record indices of the linked pairs in file A and file B.
    probs : np.ndarray
        Posterior probability of each link.
    threshold_used : float or None
        The threshold xi; pairs with probability strictly above it are linked.
        None when no threshold satisfied an FDR bound.
    estimated_fdr : float
        1 minus the mean probability of the links; 0 for an empty set.
    """
    def __init__(self, rows, cols, probs, threshold_used=None,
                 estimated_fdr=None):
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.probs = np.asarray(probs, dtype=float)
        self.threshold_used = threshold_used
        if estimated_fdr is None:
            estimated_fdr = _fdr(self.probs)
        self.estimated_fdr = float(estimated_fdr)

    def __repr__(self):
        return ('LinkSet(n_links=%d, threshold_used=%r, estimated_fdr=%.4f)'
                % (len(self), self.threshold_used, self.estimated_fdr))

    def __len__(self):
        return len(self.rows)

    @property
    def is_empty(self):
        return not len(self)

    @property
    def pairs(self):
        return [(int(i), int(j), float(p))
                for i, j, p in zip(self.rows, self.cols, self.probs)]

    def is_one_to_one(self):
        return (len(np.unique(self.rows)) == len(self.rows) and
                len(np.unique(self.cols)) == len(self.cols))

    def frame(self):
        return pd.DataFrame({'row_index_a': self.rows,
                             'row_index_b': self.cols,
                             'probability': self.probs}, columns=LINK_COLUMNS)

    def to_csv(self, path):
        write_csv_atomic(self.frame(), path)
        logger.info('wrote %d links to %s', len(self), path)
        return path


def read_links(path):
    """
    Read a link-set CSV (columns row_index_a, row_index_b and optionally
    probability)

    Raises
    ------
    DataError
        If the file cannot be read or lacks the index columns.
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError('could not read {}: {}'.format(path, e))
    absent = [c for c in LINK_COLUMNS[:2] if c not in frame.columns]
    if absent:
        raise DataError('{}: missing column(s) {}'.format(path,
                                                          ', '.join(absent)))
    probs = (frame['probability'] if 'probability' in frame.columns
             else np.ones(len(frame)))
    try:
        return LinkSet(frame['row_index_a'].astype(np.int64),
                       frame['row_index_b'].astype(np.int64),
                       np.asarray(probs, dtype=float))
    except (ValueError, TypeError) as e:
        raise DataError('{}: malformed link indices: {}'.format(path, e))


class _Progress(object):
    """Count of kept samples over all chains, logged at every tenth of n_sim"""
    def __init__(self, n_sim):
        self.n_sim = n_sim
        self.done = 0
        self.logged = 0
        self.lock = threading.Lock()

    def step(self):
        with self.lock:
            self.done += 1
            tenth = 10 * self.done // self.n_sim
            if tenth > self.logged:
                self.logged = tenth
                logger.info('posterior sampling: %d/%d samples (%d%%)',
                            self.done, self.n_sim,
                            100 * self.done // self.n_sim)


def _chain_counts(sampler, z0, n_kept, random_state, progress=None):
    codes = []
    n_b = sampler.n_b

    def record(state):
        rows, cols = state.links()
        codes.append(rows * n_b + cols)
        if progress is not None:
            progress.step()

    sampler.run(z0, n_kept, random_state, on_sample=record)
    codes = np.concatenate(codes) if codes else np.zeros(0, dtype=np.int64)
    unique, counts = np.unique(codes, return_counts=True)
    return LinkagePosterior(unique // n_b, unique % n_b, counts, n_kept)


def sample_posterior(a, b, specs, theta_hat, n_sim=N_SIM, z0=POSTERIOR_Z0,
                     seed=0, n_chains=1, n_jobs=1):
    """
    Estimate the marginal posterior link probability of every pair

    Parameters
    ----------
    a, b : RecordTable
    specs : list of PivSpec
    theta_hat : ModelParams
        Parameters, as returned by `stem.fit` for the same file order.
    n_sim : int, default 1000
        Total number of kept samples.
    z0 : int, default 100
        Burn-in sweeps of each chain.
    seed : int, default 0
        Chain c draws from the substream (seed, 2, c).
    n_chains : int, default 1
        Number of independent chains; n_sim is split as evenly as possible
        between them. The result depends on the number of chains, never on
        `n_jobs`.
    n_jobs : int, default 1
        Number of worker threads.

    Returns
    -------
    posterior : LinkagePosterior
    """
    if n_sim < 1:
        raise ValueError('n_sim must be positive')
    if not 1 <= n_chains <= n_sim:
        raise ValueError('n_chains must lie in {1..n_sim}')
    swapped = b.n_records < a.n_records
    if swapped:
        a, b = b, a
        theta_hat = swap_params(theta_hat)
    sampler = GibbsSampler(a, b, specs, theta_hat)
    sizes = [n_sim // n_chains + (c < n_sim % n_chains)
             for c in range(n_chains)]

    progress = _Progress(n_sim)

    def run(c):
        logger.debug('posterior chain %d/%d: %d samples', c + 1, n_chains,
                     sizes[c])
        return _chain_counts(sampler, z0, sizes[c], substream(seed, 2, c),
                             progress)

    with ThreadPoolExecutor(max_workers=max(1, n_jobs)) as executor:
        chains = list(executor.map(run, range(n_chains)))
    posterior = chains[0]
    for chain in chains[1:]:
        posterior = posterior.merge(chain)
    return posterior.transpose() if swapped else posterior


def _fdr(probs):
    return float(1 - np.mean(probs)) if len(probs) else 0.0


def select_by_threshold(post, xi=XI):
    """
    Links for the pairs whose probability is strictly above xi

    For xi >= 0.5 the result is one-to-one, since the probabilities of a row
    (or column) sum to at most one.
    """
    if not 0 <= xi <= 1:
        raise ValueError('xi must lie in [0, 1]')
    probs = post.probs
    selected = probs > xi
    return LinkSet(post.rows[selected], post.cols[selected], probs[selected],
                   threshold_used=float(xi))


def estimated_fdr(post, xi, return_empty=False):
    """
    Estimated false discovery rate of select_by_threshold(post, xi)

    Returns
    -------
    fdr : float
        1 - mean probability of the selected pairs, or 0 when none is
        selected.
    empty : bool
        Only returned if `return_empty`; whether no pair is selected.
    """
    probs = post.probs
    selected = probs[probs > xi]
    fdr = _fdr(selected)
    return (fdr, not len(selected)) if return_empty else fdr


def select_by_fdr(post, fdr_max):
    """
    Links for the smallest threshold xi >= 0.5 whose estimated FDR is below
    fdr_max

    Candidate thresholds are 0.5 and the stored probabilities above it; the
    estimated FDR does not increase along them. When no threshold achieves the
    bound, the returned LinkSet is empty with `threshold_used` None.
    """
    if not 0 < fdr_max < 1:
        raise ValueError('fdr_max must lie in (0, 1)')
    probs = post.probs
    grid = np.unique(np.concatenate([[XI], probs[probs >= XI]]))
    for xi in grid:
        fdr, empty = estimated_fdr(post, xi, return_empty=True)
        if empty:
            break
        if fdr < fdr_max:
            logger.info('threshold %.4f selects %d links with estimated FDR '
                        '%.4f', xi, int((probs > xi).sum()), fdr)
            return select_by_threshold(post, float(xi))
    logger.warning('no threshold of at least %s gives an estimated FDR below '
                   '%s; no link selected', XI, fdr_max)
    return LinkSet([], [], [], threshold_used=None, estimated_fdr=0.0)
