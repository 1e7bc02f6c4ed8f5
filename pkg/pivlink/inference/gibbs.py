"""
Stochastic E-step: a Gibbs sampler over the true values H^A, H^B and the
one-to-one linkage matrix Delta, at fixed parameters

Each sweep updates, in this order,

1. the true values of the records of both files that have no link, from the
   registration model and the prior eta;
2. the true values of the linked pairs, jointly per pair, from both
   registrations and the linked-pair model (identical values for stable PIVs);
3. the linkage indicators, sequentially in row-major order over the candidate
   pairs.

Candidate pairs are the pairs whose true values agree on every stable PIV
(latent blocking): any other pair has a link probability of exactly zero, so
the n_A x n_B matrix is never materialised.
"""
import logging

import numpy as np
from scipy.special import gammaln, xlogy

from ..constants import GAMMA_FLOOR
from ..exceptions import NumericalError
from ..kernels import (linked_truth_joint, log_linked_ratio,
                       obs_likelihood_matrix)
from ..utils import check_random_state, inspect_repr, sample_categorical

logger = logging.getLogger(__name__)


class LatentState(object):
    """
    One configuration of the latent variables

    Parameters
    ----------
    h_a : np.ndarray of int, shape (n_A, K)
        True values (1-based) of the records of file A.
    h_b : np.ndarray of int, shape (n_B, K)
        True values of the records of file B.
    link_of_row : np.ndarray of int, shape (n_A,), optional
        Column linked to each row of A, or -1. Defaults to no links.
    link_of_col : np.ndarray of int, shape (n_B,), optional
        Row linked to each record of B, or -1. Derived from `link_of_row` when
        omitted.
    """
    def __init__(self, h_a, h_b, link_of_row=None, link_of_col=None):
        self.h_a = np.array(h_a, dtype=np.int64)
        self.h_b = np.array(h_b, dtype=np.int64)
        n_a, n_b = len(self.h_a), len(self.h_b)
        if link_of_row is None:
            link_of_row = np.full(n_a, -1, dtype=np.int64)
        self.link_of_row = np.array(link_of_row, dtype=np.int64)
        if link_of_col is None:
            link_of_col = np.full(n_b, -1, dtype=np.int64)
            rows = np.flatnonzero(self.link_of_row >= 0)
            link_of_col[self.link_of_row[rows]] = rows
        self.link_of_col = np.array(link_of_col, dtype=np.int64)

    def __repr__(self):
        return inspect_repr(self)

    @property
    def n_links(self):
        return int((self.link_of_row >= 0).sum())

    def links(self):
        """Linked pairs as (rows, cols) arrays, sorted by row"""
        rows = np.flatnonzero(self.link_of_row >= 0)
        return rows, self.link_of_row[rows]

    def copy(self):
        return LatentState(self.h_a, self.h_b, self.link_of_row,
                           self.link_of_col)

    def check(self, specs):
        """
        Raise AssertionError unless the linkage is a partial bijection, true
        values lie in their supports and linked pairs agree on stable PIVs
        """
        rows, cols = self.links()
        assert np.all(self.link_of_col[cols] == rows), 'inconsistent links'
        assert (self.link_of_col >= 0).sum() == len(rows), 'inconsistent links'
        assert len(np.unique(cols)) == len(cols), 'column linked twice'
        sizes = np.array([spec.support_size for spec in specs])
        for h in (self.h_a, self.h_b):
            assert h.size == 0 or (h.min() >= 1 and np.all(h <= sizes)), \
                'true value outside its support'
        stable = [k for k, spec in enumerate(specs) if spec.stable]
        assert np.all(self.h_a[rows][:, stable] == self.h_b[cols][:, stable]), \
            'linked pair disagrees on a stable PIV'


class SufficientStats(object):
    """
    Per-sample summaries of kept Gibbs states, as needed by the M-step

    Parameters
    ----------
    specs : list of PivSpec
    n_a, n_b : int
        Number of records of each file.

    Attributes
    ----------
    disagreements, nonmissing : np.ndarray, shape (n_samples, K)
        Number of non-missing registrations that differ from their true value,
        and number of non-missing registrations, over both files.
    latent_linked, latent_unlinked : list of np.ndarray
        For each PIV, counts of each true value (pooled over samples) among
        linked pairs (counted once, at h_a) and among records without a link.
    link_times, link_disagree : dict of np.ndarray
        For each unstable PIV, the time difference of every link of every
        sample and whether its true values differ.
    n_links : np.ndarray, shape (n_samples,)
        Number of links in each sample.
    """
    def __init__(self, specs, n_a, n_b):
        self.specs = list(specs)
        self.n_a = n_a
        self.n_b = n_b
        self._disagreements = []
        self._nonmissing = []
        self._n_links = []
        self.latent_linked = [np.zeros(spec.support_size, dtype=np.int64)
                              for spec in specs]
        self.latent_unlinked = [np.zeros(spec.support_size, dtype=np.int64)
                                for spec in specs]
        self._times = {k: [] for k, spec in enumerate(specs) if not spec.stable}
        self._disagree = {k: [] for k in self._times}
        self.states = []
        self.final_state = None

    def __repr__(self):
        return ('SufficientStats(n_samples=%d, n_a=%d, n_b=%d)'
                % (self.n_samples, self.n_a, self.n_b))

    @property
    def n_samples(self):
        return len(self._n_links)

    @property
    def disagreements(self):
        return np.array(self._disagreements, dtype=np.int64).reshape(
            -1, len(self.specs))

    @property
    def nonmissing(self):
        return np.array(self._nonmissing, dtype=np.int64).reshape(
            -1, len(self.specs))

    @property
    def n_links(self):
        return np.array(self._n_links, dtype=np.int64)

    @property
    def link_times(self):
        return {k: np.concatenate(v) if v else np.zeros(0)
                for k, v in self._times.items()}

    @property
    def link_disagree(self):
        return {k: np.concatenate(v) if v else np.zeros(0, dtype=bool)
                for k, v in self._disagree.items()}

    def accumulate(self, state, a, b, keep_state=False):
        """
        Add the summaries of one kept state

        Parameters
        ----------
        state : LatentState
        a, b : RecordTable
            Registered values of both files.
        keep_state : bool, default False
            Whether to also store a copy of the state itself.
        """
        observed_a = a.values != 0
        observed_b = b.values != 0
        self._disagreements.append(
            (observed_a & (a.values != state.h_a)).sum(axis=0) +
            (observed_b & (b.values != state.h_b)).sum(axis=0))
        self._nonmissing.append(observed_a.sum(axis=0) +
                                observed_b.sum(axis=0))
        rows, cols = state.links()
        self._n_links.append(len(rows))
        unlinked_a = state.link_of_row < 0
        unlinked_b = state.link_of_col < 0
        for k, spec in enumerate(self.specs):
            n_k = spec.support_size
            self.latent_linked[k] += np.bincount(state.h_a[rows, k] - 1,
                                                 minlength=n_k)
            self.latent_unlinked[k] += (
                np.bincount(state.h_a[unlinked_a, k] - 1, minlength=n_k) +
                np.bincount(state.h_b[unlinked_b, k] - 1, minlength=n_k))
        if self._times:
            t = pair_times(a, b, rows, cols)
            for k in self._times:
                self._times[k].append(t)
                self._disagree[k].append(state.h_a[rows, k] !=
                                         state.h_b[cols, k])
        if keep_state:
            self.states.append(state.copy())
        return self


def pair_times(a, b, rows, cols):
    """
    Registration time differences |t^B_j - t^A_i| of the given pairs, or None
    when the files carry no times
    """
    if a.times is None or b.times is None:
        return None
    return np.abs(b.times[cols] - a.times[rows])


def _observation_matrices(table, specs, phi_missing, phi_mistake):
    return [obs_likelihood_matrix(table.values[:, k], spec.support_size,
                                  phi_missing[k], phi_mistake[k])
            for k, spec in enumerate(specs)]


class GibbsSampler(object):
    """
    Gibbs sampler over (H^A, H^B, Delta) at fixed parameters

    Parameters
    ----------
    a, b : RecordTable
        Registered values of both files; B should be the larger file.
    specs : list of PivSpec
    params : kernels.ModelParams
    """
    def __init__(self, a, b, specs, params):
        unstable = [spec.name for spec in specs if not spec.stable]
        if unstable and (a.times is None or b.times is None):
            raise ValueError('unstable PIV(s) %s require registration times'
                             % ', '.join(unstable))
        self.a = a
        self.b = b
        self.specs = list(specs)
        self.params = params
        self.stable = [k for k, spec in enumerate(specs) if spec.stable]
        self.unstable = [k for k, spec in enumerate(specs) if not spec.stable]
        self.obs_a = _observation_matrices(a, specs, params.phi_missing_a,
                                           params.phi_mistake)
        self.obs_b = _observation_matrices(b, specs, params.phi_missing_b,
                                           params.phi_mistake)
        with np.errstate(divide='ignore'):
            self.log_prior_odds = (np.log(params.gamma) -
                                   np.log(max(1 - params.gamma, GAMMA_FLOOR)))

    def __repr__(self):
        return inspect_repr(self)

    @property
    def n_a(self):
        return self.a.n_records

    @property
    def n_b(self):
        return self.b.n_records

    def init_state(self, random_state=None):
        """
        Initial state: registered values where observed, missing values drawn
        from eta, and no links
        """
        rng = check_random_state(random_state)
        h = []
        for table in (self.a, self.b):
            values = table.values.copy()
            for k in range(len(self.specs)):
                missing = np.flatnonzero(values[:, k] == 0)
                if len(missing):
                    eta = np.broadcast_to(self.params.eta[k],
                                          (len(missing), len(self.params.eta[k])))
                    values[missing, k] = sample_categorical(eta, rng) + 1
            h.append(values)
        return LatentState(*h)

    def resample_nonlinked(self, state, random_state=None):
        """
        Redraw the true values of every record of A and B without a link
        """
        rng = check_random_state(random_state)
        for h, link, obs in ((state.h_a, state.link_of_row, self.obs_a),
                             (state.h_b, state.link_of_col, self.obs_b)):
            free = np.flatnonzero(link < 0)
            if not len(free):
                continue
            for k in range(len(self.specs)):
                weights = obs[k][free] * self.params.eta[k]
                h[free, k] = sample_categorical(weights, rng) + 1
        return state

    def resample_linked(self, state, random_state=None):
        """
        Redraw the true values of every linked pair jointly
        """
        rng = check_random_state(random_state)
        rows, cols = state.links()
        if not len(rows):
            return state
        t = pair_times(self.a, self.b, rows, cols)
        for k, spec in enumerate(self.specs):
            eta = self.params.eta[k]
            obs_a = self.obs_a[k][rows]
            obs_b = self.obs_b[k][cols]
            if spec.stable:
                value = sample_categorical(obs_a * obs_b * eta, rng) + 1
                state.h_a[rows, k] = value
                state.h_b[cols, k] = value
            else:
                n_k = len(eta)
                joint = _linked_joint_matrices(eta, self.params.alpha[k], t)
                weights = obs_a[:, :, np.newaxis] * obs_b[:, np.newaxis, :]
                weights = (weights * joint).reshape(len(rows), n_k * n_k)
                index = sample_categorical(weights, rng)
                state.h_a[rows, k] = index // n_k + 1
                state.h_b[cols, k] = index % n_k + 1
        return state

    def candidate_pairs(self, state):
        """
        Pairs whose true values agree on every stable PIV, in row-major order

        Returns
        -------
        rows, cols : np.ndarray of int
        """
        n_a, n_b = self.n_a, self.n_b
        if not self.stable:
            return (np.repeat(np.arange(n_a), n_b),
                    np.tile(np.arange(n_b), n_a))
        signatures = np.concatenate([state.h_a[:, self.stable],
                                     state.h_b[:, self.stable]])
        _, group = np.unique(signatures, axis=0, return_inverse=True)
        group = group.reshape(-1)
        group_a, group_b = group[:n_a], group[n_a:]
        order_b = np.argsort(group_b, kind='stable')
        sorted_b = group_b[order_b]
        start = np.searchsorted(sorted_b, group_a, side='left')
        counts = np.searchsorted(sorted_b, group_a, side='right') - start
        rows = np.repeat(np.arange(n_a), counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts,
                                                      counts)
        cols = order_b[np.repeat(start, counts) + offsets]
        return rows, cols

    def log_link_odds(self, state, rows, cols):
        """
        Log of gamma / (1 - gamma) times the likelihood ratio of a link, for
        each candidate pair; divide the odds by (n_B - m) to get the odds of
        the Delta_ij update, with m the number of other links
        """
        log_odds = np.full(len(rows), self.log_prior_odds)
        t = pair_times(self.a, self.b, rows, cols)
        for k, spec in enumerate(self.specs):
            log_odds += log_linked_ratio(spec, state.h_a[rows, k],
                                         state.h_b[cols, k], t, self.params, k)
        return log_odds

    def resample_linkage(self, state, random_state=None):
        """
        Sequentially redraw Delta_ij over the candidate pairs

        Returns
        -------
        n_candidates : int
        """
        rng = check_random_state(random_state)
        rows, cols = self.candidate_pairs(state)
        with np.errstate(over='ignore'):
            odds = np.exp(self.log_link_odds(state, rows, cols))
        u = rng.random(len(rows))
        link_of_row = state.link_of_row.tolist()
        link_of_col = state.link_of_col.tolist()
        n_links = sum(1 for j in link_of_row if j >= 0)
        n_b = self.n_b
        for i, j, o, ui in zip(rows.tolist(), cols.tolist(), odds.tolist(),
                               u.tolist()):
            current = link_of_row[i]
            if current == j:
                m = n_links - 1
            elif current >= 0 or link_of_col[j] >= 0:
                continue
            else:
                m = n_links
            o /= n_b - m
            link = o == np.inf or ui * (1 + o) < o
            if link and current != j:
                link_of_row[i] = j
                link_of_col[j] = i
                n_links += 1
            elif not link and current == j:
                link_of_row[i] = -1
                link_of_col[j] = -1
                n_links -= 1
        state.link_of_row = np.array(link_of_row, dtype=np.int64)
        state.link_of_col = np.array(link_of_col, dtype=np.int64)
        return len(rows)

    def sweep(self, state, random_state=None):
        """
        One full Gibbs sweep: non-linked truths, linked truths, then linkage
        """
        rng = check_random_state(random_state)
        self.resample_nonlinked(state, rng)
        self.resample_linked(state, rng)
        n_candidates = self.resample_linkage(state, rng)
        logger.debug('sweep: %d candidate pairs, %d links', n_candidates,
                     state.n_links)
        return state

    def run(self, z0, z1, random_state=None, keep_states=False,
            check_every_sweep=False, on_sample=None):
        """
        Run a chain from a fresh initial state

        Parameters
        ----------
        z0 : int
            Number of burn-in sweeps to discard.
        z1 : int
            Number of subsequent sweeps to keep.
        random_state : None, int or np.random.Generator, optional
        keep_states : bool, default False
            Whether the returned statistics should hold copies of the kept
            states (in `stats.states`).
        check_every_sweep : bool, default False
            Check the LatentState invariants after every sweep instead of only
            at the end of the chain.
        on_sample : function, optional
            Called with each kept state.

        Returns
        -------
        stats : SufficientStats
        """
        if z0 < 0 or z1 < 1:
            raise ValueError('z0 must be nonnegative and z1 positive')
        rng = check_random_state(random_state)
        state = self.init_state(rng)
        stats = SufficientStats(self.specs, self.n_a, self.n_b)
        for z in range(z0 + z1):
            self.sweep(state, rng)
            if check_every_sweep:
                state.check(self.specs)
            if z >= z0:
                stats.accumulate(state, self.a, self.b, keep_states)
                if on_sample is not None:
                    on_sample(state)
        state.check(self.specs)
        stats.final_state = state
        return stats


def _linked_joint_matrices(eta, alpha_k, t):
    """
    Stack of n_k x n_k matrices of the linked-pair model of an unstable PIV,
    one per time difference
    """
    n_k = len(eta)
    survival = np.exp(-np.exp(alpha_k) * np.asarray(t, dtype=float))
    change = (1 - survival) / (n_k - 1) if n_k > 1 else np.zeros_like(survival)
    eye = np.eye(n_k, dtype=bool)
    joint = np.where(eye, survival[:, np.newaxis, np.newaxis],
                     change[:, np.newaxis, np.newaxis])
    return joint * eta[np.newaxis, :, np.newaxis]


def init_state(a, b, specs, params, random_state=None):
    """
    Initial latent state of a chain: registered values where observed, missing
    values imputed from eta, and an empty linkage

    See GibbsSampler.init_state.
    """
    return GibbsSampler(a, b, specs, params).init_state(random_state)


def resample_truth_nonlinked(g, specs, params, random_state=None,
                             phi_missing=None):
    """
    Draw new true values for one record without a link

    Parameters
    ----------
    g : array_like of int, shape (K,)
        Registered codes of the record.
    specs : list of PivSpec
    params : ModelParams
    random_state : None, int or np.random.Generator, optional
    phi_missing : array_like, optional
        Missing-value rates of the record's file (default: file A's). They
        scale every weight equally and do not change the draw.

    Returns
    -------
    h : np.ndarray of int, shape (K,)
    """
    rng = check_random_state(random_state)
    if phi_missing is None:
        phi_missing = params.phi_missing_a
    weights = truth_weights_nonlinked(g, specs, params, phi_missing)
    return np.array([sample_categorical(w[np.newaxis], rng)[0] + 1
                     for w in weights])


def truth_weights_nonlinked(g, specs, params, phi_missing=None):
    """
    Normalised distribution of the true value of each PIV of a record without
    a link, as a list of arrays of length n_k
    """
    if phi_missing is None:
        phi_missing = params.phi_missing_a
    out = []
    for k, spec in enumerate(specs):
        w = (obs_likelihood_matrix(np.array([g[k]]), spec.support_size,
                                   phi_missing[k], params.phi_mistake[k])[0]
             * params.eta[k])
        if w.sum() <= 0:
            raise NumericalError('all true values of PIV %r have zero weight'
                                 % spec.name)
        out.append(w / w.sum())
    return out


def truth_weights_linked(g_a, g_b, t, specs, params):
    """
    Normalised joint distribution of the true values (h_a, h_b) of each PIV of
    a linked pair, as a list of n_k x n_k arrays (zero off the diagonal for
    stable PIVs)
    """
    out = []
    for k, spec in enumerate(specs):
        n_k = spec.support_size
        obs_a = obs_likelihood_matrix(np.array([g_a[k]]), n_k,
                                      params.phi_missing_a[k],
                                      params.phi_mistake[k])[0]
        obs_b = obs_likelihood_matrix(np.array([g_b[k]]), n_k,
                                      params.phi_missing_b[k],
                                      params.phi_mistake[k])[0]
        joint = np.array([[linked_truth_joint(spec, ha, hb, t, params, k)
                           for hb in range(1, n_k + 1)]
                          for ha in range(1, n_k + 1)])
        w = obs_a[:, np.newaxis] * obs_b[np.newaxis, :] * joint
        if w.sum() <= 0:
            raise NumericalError('all true values of PIV %r have zero weight'
                                 % spec.name)
        out.append(w / w.sum())
    return out


def resample_truth_linked(g_a, g_b, t, specs, params, random_state=None):
    """
    Draw new true values for one linked pair

    Returns
    -------
    h_a, h_b : np.ndarray of int, shape (K,)
    """
    rng = check_random_state(random_state)
    h_a, h_b = [], []
    for w in truth_weights_linked(g_a, g_b, t, specs, params):
        n_k = len(w)
        index = sample_categorical(w.reshape(1, -1), rng)[0]
        h_a.append(index // n_k + 1)
        h_b.append(index % n_k + 1)
    return np.array(h_a), np.array(h_b)


def linkage_cell_probability(i, j, state, specs, params, n_b, t=None):
    """
    Conditional probability that Delta_ij = 1 given everything else

    Zero when row i or column j is linked elsewhere, or when a stable PIV
    disagrees; otherwise o / (1 + o) with

        o = gamma / ((1 - gamma) (n_B - m)) * prod_k joint_k / (eta_k[h_a] eta_k[h_b])

    where m counts the links other than (i, j).
    """
    current = state.link_of_row[i]
    if current != j and (current >= 0 or state.link_of_col[j] >= 0):
        return 0.0
    m = state.n_links - (1 if current == j else 0)
    with np.errstate(divide='ignore'):
        log_odds = (np.log(params.gamma) -
                    np.log(max(1 - params.gamma, GAMMA_FLOOR)) - np.log(n_b - m))
    for k, spec in enumerate(specs):
        log_odds += float(log_linked_ratio(
            spec, np.array([state.h_a[i, k]]), np.array([state.h_b[j, k]]),
            None if t is None else np.array([t]), params, k)[0])
    if log_odds == -np.inf:
        return 0.0
    return float(1 / (1 + np.exp(-log_odds)))


def resample_linkage_cell(i, j, state, specs, params, n_b, random_state=None,
                          t=None):
    """
    Redraw Delta_ij in place from its conditional distribution

    Returns
    -------
    state : LatentState
    """
    rng = check_random_state(random_state)
    p = linkage_cell_probability(i, j, state, specs, params, n_b, t)
    link = rng.random() < p
    if link and state.link_of_row[i] != j:
        state.link_of_row[i] = j
        state.link_of_col[j] = i
    elif not link and state.link_of_row[i] == j:
        state.link_of_row[i] = -1
        state.link_of_col[j] = -1
    return state


def run_chain(a, b, specs, params, z0, z1, random_state=None,
              keep_states=False, check_every_sweep=False):
    """
    Run the Gibbs sampler for z0 + z1 sweeps and summarise the last z1

    See GibbsSampler.run.
    """
    return GibbsSampler(a, b, specs, params).run(
        z0, z1, random_state, keep_states=keep_states,
        check_every_sweep=check_every_sweep)


def log_complete_likelihood(state, a, b, specs, params):
    """
    Complete-data log-likelihood of a latent state

    Sums the log prior of the linkage configuration, the log prior of the true
    values (joint for linked pairs) and the log probability of the
    registrations given the true values.
    """
    n_a, n_b = a.n_records, b.n_records
    rows, cols = state.links()
    n_links = len(rows)
    with np.errstate(divide='ignore'):
        total = (xlogy(n_links, params.gamma) +
                 xlogy(n_a - n_links, 1 - params.gamma) +
                 gammaln(n_b - n_links + 1) - gammaln(n_b + 1))
        free_a = state.link_of_row < 0
        free_b = state.link_of_col < 0
        t = pair_times(a, b, rows, cols)
        obs_a = _observation_matrices(a, specs, params.phi_missing_a,
                                      params.phi_mistake)
        obs_b = _observation_matrices(b, specs, params.phi_missing_b,
                                      params.phi_mistake)
        for k, spec in enumerate(specs):
            log_eta = np.log(params.eta[k])
            h_a, h_b = state.h_a[:, k], state.h_b[:, k]
            total += np.log(obs_a[k][np.arange(n_a), h_a - 1]).sum()
            total += np.log(obs_b[k][np.arange(n_b), h_b - 1]).sum()
            total += log_eta[h_a[free_a] - 1].sum()
            total += log_eta[h_b[free_b] - 1].sum()
            # linked pairs: eta[h_a] * (indicator or survival term)
            total += (log_eta[h_a[rows] - 1] + log_eta[h_b[cols] - 1] +
                      log_linked_ratio(spec, h_a[rows], h_b[cols], t, params,
                                       k)).sum()
    return float(total)

