"""
Stochastic EM driver

Each iteration runs a fresh Gibbs chain at the current parameters (the
stochastic E-step) and updates the parameters from its kept samples (the
M-step). The estimate is the average of the iterates after burn-in.
"""
import logging

import numpy as np
import pandas as pd

from ..constants import CHANGE0, GAMMA0, PHI0, V0, V1, Z0, Z1
from ..exceptions import ConfigurationError
from ..ingest import missing_rates
from ..kernels import ModelParams
from ..utils import inspect_repr, substream, write_csv_atomic
from .gibbs import GibbsSampler
from .mstep import MStepConfig, m_step

logger = logging.getLogger(__name__)


class StemConfig(object):
    """
    Settings of a StEM run

    Parameters
    ----------
    v0, v1 : int, default 75, 25
        Number of burn-in and kept StEM iterations.
    z0, z1 : int, default 100, 100
        Number of burn-in and kept Gibbs sweeps within each iteration.
    seed : int, default 0
        Master seed; iteration v draws from the substream (seed, 1, v).
    phi0 : float, default 0.05
        Initial mistake probability of every PIV (capped by its bound).
    gamma0 : float, default 0.05
        Initial link proportion.
    change0 : float, default 0.05
        Initial probability that an unstable PIV changes over the mean time
        difference between the files.
    mstep : MStepConfig, optional
    """
    def __init__(self, v0=V0, v1=V1, z0=Z0, z1=Z1, seed=0, phi0=PHI0,
                 gamma0=GAMMA0, change0=CHANGE0, mstep=None):
        if v0 < 0 or v1 < 1:
            raise ConfigurationError('v0 must be nonnegative and v1 positive')
        if z0 < 0 or z1 < 1:
            raise ConfigurationError('z0 must be nonnegative and z1 positive')
        if not 0 < change0 < 1:
            raise ConfigurationError('change0 must lie in (0, 1)')
        self.v0 = int(v0)
        self.v1 = int(v1)
        self.z0 = int(z0)
        self.z1 = int(z1)
        self.seed = int(seed)
        self.phi0 = float(phi0)
        self.gamma0 = float(gamma0)
        self.change0 = float(change0)
        self.mstep = mstep or MStepConfig()

    def __repr__(self):
        return inspect_repr(self)


class ParameterTrace(object):
    """
    History of a StEM run: the parameters after each iteration, with link-count
    summaries of the iteration's kept Gibbs samples

    Attributes
    ----------
    params : list of ModelParams
    mean_links : list of float
        Mean number of links over the kept samples of each iteration.
    first_links, last_links : list of int
        Number of links in the first and last kept sample of each iteration; a
        persistent gap suggests the within-iteration burn-in is too short.
    swapped : bool
        Whether the files were exchanged so that file A is the smaller one.
    """
    def __init__(self, specs, swapped=False):
        self.specs = list(specs)
        self.swapped = swapped
        self.params = []
        self.mean_links = []
        self.first_links = []
        self.last_links = []

    def __len__(self):
        return len(self.params)

    def __repr__(self):
        return 'ParameterTrace(n_iterations=%d, swapped=%s)' % (len(self),
                                                                 self.swapped)

    def append(self, params, stats):
        n_links = stats.n_links
        self.params.append(params)
        self.mean_links.append(float(n_links.mean()))
        self.first_links.append(int(n_links[0]))
        self.last_links.append(int(n_links[-1]))

    def frame(self):
        """
        Returns the trace as a pandas DataFrame, one row per iteration
        """
        columns = {'iteration': np.arange(1, len(self) + 1),
                   'gamma': [p.gamma for p in self.params]}
        for k, spec in enumerate(self.specs):
            columns['phi_%s' % spec.name] = [p.phi_mistake[k]
                                             for p in self.params]
        for k, spec in enumerate(self.specs):
            if not spec.stable:
                columns['alpha_%s' % spec.name] = [p.alpha[k]
                                                   for p in self.params]
        columns['mean_links'] = self.mean_links
        columns['first_links'] = self.first_links
        columns['last_links'] = self.last_links
        return pd.DataFrame(columns)


def export_trace(trace, path):
    """
    Write a ParameterTrace as CSV (header plus one row per iteration),
    replacing any existing file atomically
    """
    write_csv_atomic(trace.frame(), path)
    logger.info('wrote parameter trace to %s', path)
    return path


def mean_abs_time_difference(t_a, t_b):
    """
    Mean of |t_b[j] - t_a[i]| over all pairs (i, j), in O(n log n) time
    """
    t_a = np.asarray(t_a, dtype=float)
    t_b = np.sort(np.asarray(t_b, dtype=float))
    if not len(t_a) or not len(t_b):
        raise ValueError('both time arrays must be nonempty')
    below_sums = np.concatenate([[0.0], np.cumsum(t_b)])
    n_below = np.searchsorted(t_b, t_a, side='right')
    total = below_sums[-1]
    below = t_a * n_below - below_sums[n_below]
    above = (total - below_sums[n_below]) - t_a * (len(t_b) - n_below)
    return float((below + above).sum() / (len(t_a) * len(t_b)))


def initial_params(a, b, specs, cfg):
    """
    Starting parameters: uniform eta, phi_mistake = phi0 (capped by each PIV's
    bound), gamma = gamma0, missing rates from the data, and for each unstable
    PIV the hazard whose change probability at the mean time difference is
    change0
    """
    alpha = {}
    unstable = [k for k, spec in enumerate(specs) if not spec.stable]
    if unstable:
        t_mean = mean_abs_time_difference(a.times, b.times)
        if t_mean <= 0:
            raise ConfigurationError(
                'the hazard of unstable PIV(s) %s is not identifiable: all '
                'registration times are equal'
                % ', '.join(repr(specs[k].name) for k in unstable))
        alpha0 = float(np.log(-np.log1p(-cfg.change0) / t_mean))
        alpha = {k: alpha0 for k in unstable}
    eta = [np.full(spec.support_size, 1.0 / spec.support_size)
           for spec in specs]
    phi = [min(cfg.phi0, cfg.mstep.bound(specs, k)) for k in range(len(specs))]
    return ModelParams(cfg.gamma0, eta, alpha, phi, missing_rates(a),
                       missing_rates(b))


def swap_params(params):
    """Returns a copy of params with the roles of files A and B exchanged"""
    out = params.copy()
    out.phi_missing_a, out.phi_missing_b = out.phi_missing_b, out.phi_missing_a
    return out


def _check_inputs(a, b, specs):
    if a.n_pivs != len(specs) or b.n_pivs != len(specs):
        raise ConfigurationError('both files must have one column per PIV')
    if not a.n_records or not b.n_records:
        raise ConfigurationError('both files must contain records')
    for k, spec in enumerate(specs):
        if spec.support_size is None:
            raise ConfigurationError('support size of PIV %r is unknown'
                                     % spec.name)
        if max(a.support_sizes[k], b.support_sizes[k]) > spec.support_size:
            raise ConfigurationError('codes of PIV %r exceed its support size'
                                     % spec.name)
    unstable = [spec.name for spec in specs if not spec.stable]
    if unstable and (a.times is None or b.times is None):
        raise ConfigurationError('PIV(s) %s declared unstable but the files '
                                 'carry no registration times'
                                 % ', '.join(repr(n) for n in unstable))


def fit(a, b, specs, cfg=None):
    """
    Estimate the model parameters by Stochastic EM

    Parameters
    ----------
    a, b : RecordTable
        Encoded files. If B has fewer records than A, the files are exchanged
        for the run (`trace.swapped` is set); the returned parameters refer to
        the files in the order given.
    specs : list of PivSpec
        PIV metadata with support sizes.
    cfg : StemConfig, optional

    Returns
    -------
    theta_hat : ModelParams
        Coordinate-wise mean of the last v1 iterates.
    trace : ParameterTrace
        Parameters after each of the v0 + v1 iterations.

    Raises
    ------
    ConfigurationError
        If an unstable PIV has no registration times, a support is degenerate
        or a hazard is not identifiable.
    """
    cfg = cfg or StemConfig()
    _check_inputs(a, b, specs)
    swapped = b.n_records < a.n_records
    if swapped:
        logger.warning('file B has fewer records than file A (%d < %d); '
                       'exchanging the files for estimation',
                       b.n_records, a.n_records)
        a, b = b, a
    params = initial_params(a, b, specs, cfg)
    params.check(specs)
    trace = ParameterTrace(specs, swapped)
    n_iterations = cfg.v0 + cfg.v1
    for v in range(n_iterations):
        sampler = GibbsSampler(a, b, specs, params)
        stats = sampler.run(cfg.z0, cfg.z1, substream(cfg.seed, 1, v))
        params = m_step(stats, params, cfg.mstep)
        trace.append(params, stats)
        logger.info('StEM iteration %d/%d: gamma=%.4f, mean links=%.1f',
                    v + 1, n_iterations, params.gamma, trace.mean_links[-1])
    theta_hat = ModelParams.mean(trace.params[cfg.v0:])
    theta_hat.check(specs)
    if swapped:
        theta_hat = swap_params(theta_hat)
    return theta_hat, trace
