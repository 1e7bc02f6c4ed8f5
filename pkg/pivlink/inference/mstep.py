"""
M-step: maximise the Monte-Carlo complete-data log-likelihood

The objective separates into one block per parameter, so each of phi_mistake,
alpha, eta and gamma is updated on its own from the SufficientStats of the kept
Gibbs samples.
"""
import logging
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from ..constants import ALPHA_INTERVAL, ALPHA_TOLERANCE
from ..exceptions import ConfigurationError, DegenerateParameterWarning
from ..kernels import ModelParams
from ..utils import inspect_repr

logger = logging.getLogger(__name__)


class MStepConfig(object):
    """
    Settings of the M-step

    Parameters
    ----------
    alpha_search_interval : tuple of float, default (-10, 5)
        Interval searched for the log baseline hazard of unstable PIVs.
    alpha_tolerance : float, default 1e-6
        Absolute tolerance of the bounded search.
    mistake_bounds : sequence of float, optional
        Cap on the mistake probability of each PIV. Defaults to each PivSpec's
        `mistake_bound`.
    """
    def __init__(self, alpha_search_interval=ALPHA_INTERVAL,
                 alpha_tolerance=ALPHA_TOLERANCE, mistake_bounds=None):
        low, high = (float(x) for x in alpha_search_interval)
        if not (np.isfinite(low) and np.isfinite(high) and low < high):
            raise ValueError('alpha_search_interval must be a finite, nonempty '
                             'interval')
        if not alpha_tolerance > 0:
            raise ValueError('alpha_tolerance must be positive')
        self.alpha_search_interval = (low, high)
        self.alpha_tolerance = float(alpha_tolerance)
        self.mistake_bounds = (None if mistake_bounds is None
                               else [float(b) for b in mistake_bounds])

    def __repr__(self):
        return inspect_repr(self)

    def bound(self, specs, k):
        if self.mistake_bounds is None:
            return specs[k].mistake_bound
        return self.mistake_bounds[k]


def _warn(message):
    logger.warning(message)
    warnings.warn(message, DegenerateParameterWarning)


def update_phi_mistake(stats, k, bound=1.0, previous=None):
    """
    Mistake probability of PIV k: the average over samples of the proportion
    of non-missing registrations that differ from their true value, clamped to
    [0, bound]

    Parameters
    ----------
    stats : gibbs.SufficientStats
    k : int
    bound : float, default 1.0
    previous : float, optional
        Value kept (with a DegenerateParameterWarning) when PIV k has no
        non-missing registration in any sample.
    """
    disagreements = stats.disagreements[:, k]
    nonmissing = stats.nonmissing[:, k]
    usable = nonmissing > 0
    if not usable.any():
        _warn('PIV %r has no non-missing registration; phi_mistake kept at %s'
              % (stats.specs[k].name, previous))
        return previous
    phi = np.mean(disagreements[usable] / nonmissing[usable])
    return float(np.clip(phi, 0, bound))


def _log_expm1(x):
    # log(exp(x) - 1) for x > 0, without overflow for large x
    return x + np.log(-np.expm1(-x))


def alpha_objective(alpha, t, disagree):
    """
    Monte-Carlo objective of the log baseline hazard of an unstable PIV

        sum over links of 1{h_a != h_b} log(exp(exp(alpha) t) - 1) - exp(alpha) t

    Parameters
    ----------
    alpha : float
    t : np.ndarray
        Time difference of every link of every kept sample.
    disagree : np.ndarray of bool
        Whether the true values of each link differ.
    """
    rate = np.exp(alpha)
    x = rate * np.asarray(t, dtype=float)
    disagree = np.asarray(disagree, dtype=bool)
    with np.errstate(divide='ignore'):
        changed = _log_expm1(x[disagree]).sum() if disagree.any() else 0.0
    return float(changed - x.sum())


def update_alpha(stats, k, cfg=None, previous=None):
    """
    Log baseline hazard of unstable PIV k, by bounded scalar maximisation of
    `alpha_objective`

    Parameters
    ----------
    stats : gibbs.SufficientStats
    k : int
    cfg : MStepConfig, optional
    previous : float, optional
        Value kept (with a DegenerateParameterWarning) when no sample has any
        link.

    Raises
    ------
    ConfigurationError
        If every link has a null time difference, or a link whose true values
        differ has a null time difference: the hazard is then not identifiable.
    """
    cfg = cfg or MStepConfig()
    name = stats.specs[k].name
    t = stats.link_times[k]
    disagree = stats.link_disagree[k]
    if not len(t):
        _warn('no link in any sample; alpha of PIV %r kept at %s'
              % (name, previous))
        return previous
    if np.all(t == 0) or np.any(disagree & (t == 0)):
        raise ConfigurationError(
            'the hazard of unstable PIV %r is not identifiable: links with '
            'null registration time differences' % name)
    result = minimize_scalar(lambda a: -alpha_objective(a, t, disagree),
                             bounds=cfg.alpha_search_interval,
                             method='bounded',
                             options={'xatol': cfg.alpha_tolerance})
    return float(result.x)


def update_eta(stats, k):
    """
    Distribution of the true values of PIV k: pooled counts over samples, where
    each linked pair counts once (at its file-A value) and each record without
    a link counts its own value

    Raises
    ------
    ConfigurationError
        If there is nothing to count.
    """
    counts = stats.latent_linked[k] + stats.latent_unlinked[k]
    total = counts.sum()
    if total == 0:
        raise ConfigurationError('no true values of PIV %r to estimate its '
                                 'distribution from' % stats.specs[k].name)
    return counts / float(total)


def update_gamma(stats, n_a):
    """Mean over samples of the proportion of records of A with a link"""
    if n_a < 1:
        raise ValueError('n_a must be at least 1')
    if not stats.n_samples:
        raise ValueError('no samples to average over')
    return float(np.mean(stats.n_links / float(n_a)))


def m_step(stats, params, cfg=None):
    """
    Update every parameter block from the statistics of one StEM iteration

    Parameters
    ----------
    stats : gibbs.SufficientStats
    params : kernels.ModelParams
        Current parameters, providing the fixed missing-value rates and the
        fallback values of degenerate updates.
    cfg : MStepConfig, optional

    Returns
    -------
    params : kernels.ModelParams
    """
    cfg = cfg or MStepConfig()
    specs = stats.specs
    phi = np.array([update_phi_mistake(stats, k, cfg.bound(specs, k),
                                       params.phi_mistake[k])
                    for k in range(len(specs))])
    eta = [update_eta(stats, k) for k in range(len(specs))]
    alpha = {k: update_alpha(stats, k, cfg, params.alpha[k])
             for k in params.alpha}
    gamma = update_gamma(stats, stats.n_a)
    return ModelParams(gamma, eta, alpha, phi, params.phi_missing_a,
                       params.phi_missing_b)
