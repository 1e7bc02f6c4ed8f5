"""
Replicated simulation studies

`replicate` links freshly simulated pairs of files three ways: the full model
with the instability of unstable PIVs modelled, the same model with every PIV
treated as stable, and the exact-match baseline. `distortion_ladder` links one
scenario again after injecting increasing registration errors, to compare how
fast the model and the baseline lose accuracy.
"""
import copy
import logging

import pandas as pd

from ..constants import N_SIM, POSTERIOR_Z0, XI
from ..evaluate import confusion, metrics, simplistic_link
from ..exceptions import ConfigurationError
from ..inference.posterior import sample_posterior, select_by_threshold
from ..inference.stem import StemConfig, fit
from ..utils import inspect_repr, write_csv_atomic
from .distortion import distortion_level, inject_distortion
from .scenario import ScenarioConfig, generate_scenario, scenario_specs

logger = logging.getLogger(__name__)

METHODS = ('instability', 'all_stable', 'simplistic')
METRIC_COLUMNS = ['tp', 'fp', 'fn', 'fdr', 'sensitivity', 'f1']
DISTORTION_LEVELS = (0.0, 0.02, 0.04, 0.06, 0.08)


class ExperimentConfig(object):
    """
    Settings shared by the replications of a simulation study

    Parameters
    ----------
    design : ScenarioConfig, optional
        Scenario of the first replication; replication r uses the seed
        design.seed + r. Defaults to `ScenarioConfig.paper_defaults()`.
    stem : StemConfig, optional
        StEM settings; the seed of replication r replaces its seed.
    n_sim, posterior_z0 : int, default 1000, 100
        Kept samples and burn-in of the posterior chains.
    threshold : float, default 0.5
        Pairs with posterior probability above it are linked.
    n_chains, n_jobs : int, default 1
        Posterior chains and the worker threads that run them.
    """
    def __init__(self, design=None, stem=None, n_sim=N_SIM,
                 posterior_z0=POSTERIOR_Z0, threshold=XI, n_chains=1,
                 n_jobs=1):
        if n_sim < 1 or posterior_z0 < 0:
            raise ConfigurationError('n_sim must be positive and posterior_z0 '
                                     'nonnegative')
        if not 0 <= threshold < 1:
            raise ConfigurationError('threshold must lie in [0, 1)')
        self.design = design or ScenarioConfig.paper_defaults()
        self.stem = stem or StemConfig()
        self.n_sim = int(n_sim)
        self.posterior_z0 = int(posterior_z0)
        self.threshold = float(threshold)
        self.n_chains = int(n_chains)
        self.n_jobs = int(n_jobs)

    def __repr__(self):
        return inspect_repr(self)

    def design_for(self, replication):
        design = copy.copy(self.design)
        design.seed = self.design.seed + replication
        return design


def score(est, truth, **labels):
    """Confusion counts and metrics of a link set, as one result row"""
    counts = confusion(est, truth)
    m = metrics(counts)
    row = dict(labels)
    row.update(tp=counts.tp, fp=counts.fp, fn=counts.fn, fdr=m.fdr,
               sensitivity=m.sensitivity, f1=m.f1)
    return row


def link_model(a, b, specs, cfg, seed):
    """
    Links selected by the full model: StEM fit, posterior at the estimate and
    the fixed threshold, all seeded by `seed`
    """
    stem = copy.copy(cfg.stem)
    stem.seed = seed
    theta_hat, _ = fit(a, b, specs, stem)
    posterior = sample_posterior(a, b, specs, theta_hat, cfg.n_sim,
                                 cfg.posterior_z0, seed,
                                 n_chains=cfg.n_chains, n_jobs=cfg.n_jobs)
    return select_by_threshold(posterior, cfg.threshold)


def run_methods(a, b, truth, specs, cfg, seed, /, methods=METHODS, **labels):
    """
    Score each method on one pair of files

    Returns
    -------
    rows : list of dict
        One row per method, with `labels`, the method name and the metrics.
    """
    rows = []
    for method in methods:
        if method == 'instability':
            est = link_model(a, b, specs, cfg, seed)
        elif method == 'all_stable':
            est = link_model(a, b, [s.as_stable() for s in specs], cfg, seed)
        elif method == 'simplistic':
            est = simplistic_link(a, b)
        else:
            raise ConfigurationError('unknown method %r; choose from %s'
                                     % (method, ', '.join(METHODS)))
        rows.append(score(est, truth, method=method, **labels))
    return rows


def replicate(n_rep, cfg=None, methods=METHODS):
    """
    Simulate `n_rep` scenarios and score every method on each

    Returns
    -------
    results : pandas.DataFrame
        Columns replication, seed, method and the metric columns; one row per
        replication and method.
    """
    cfg = cfg or ExperimentConfig()
    if n_rep < 1:
        raise ConfigurationError('n_rep must be positive')
    rows = []
    for r in range(n_rep):
        design = cfg.design_for(r)
        a, b, truth = generate_scenario(design)
        new = run_methods(a, b, truth, scenario_specs(design), cfg,
                          design.seed, methods, replication=r,
                          seed=design.seed)
        logger.info('replication %d/%d: %s', r + 1, n_rep,
                    ', '.join('F1 %.3f (%s)' % (row['f1'], row['method'])
                              for row in new))
        rows.extend(new)
    return pd.DataFrame(rows, columns=['replication', 'seed', 'method'] +
                        METRIC_COLUMNS)


def summarize(results, by='method'):
    """
    Mean and standard deviation of every metric per group, in order of first
    appearance

    Returns
    -------
    summary : pandas.DataFrame
        Columns `by`, n, and <metric>_mean, <metric>_std for each metric.
    """
    grouped = results.groupby(by, sort=False)[METRIC_COLUMNS]
    summary = grouped.agg(['mean', 'std'])
    summary.columns = ['%s_%s' % col for col in summary.columns]
    summary.insert(0, 'n', grouped.size())
    return summary.reset_index()


def distortion_ladder(levels=DISTORTION_LEVELS, cfg=None,
                      methods=('instability', 'simplistic'),
                      substitution_share=0.5):
    """
    Score the methods on one scenario distorted at increasing levels

    Every level starts from the same clean files and draws its extra errors
    from the distortion substream of the design seed.

    Returns
    -------
    results : pandas.DataFrame
        Columns level, distortion (the measured distortion level), method and
        the metric columns.
    """
    cfg = cfg or ExperimentConfig()
    design = cfg.design_for(0)
    a, b, truth = generate_scenario(design)
    specs = scenario_specs(design)
    rows = []
    for level in levels:
        a_l, b_l = inject_distortion(a, b, truth, level, design.seed,
                                     substitution_share)
        measured = distortion_level(a_l, b_l, truth)
        new = run_methods(a_l, b_l, truth, specs, cfg, design.seed, methods,
                          level=level, distortion=measured)
        logger.info('distortion %.3f (measured %.4f): %s', level, measured,
                    ', '.join('F1 %.3f (%s)' % (row['f1'], row['method'])
                              for row in new))
        rows.extend(new)
    return pd.DataFrame(rows, columns=['level', 'distortion', 'method'] +
                        METRIC_COLUMNS)


def f1_loss(ladder):
    """
    Drop of the F1 score of each method between the lowest and the highest
    distortion level of a ladder

    Returns
    -------
    loss : dict
        F1 at the lowest level minus F1 at the highest, keyed by method.
    """
    loss = {}
    for method, group in ladder.groupby('method', sort=False):
        group = group.sort_values('level')
        loss[method] = float(group['f1'].iloc[0] - group['f1'].iloc[-1])
    return loss


def export_results(frame, path):
    """Write an experiment or summary frame as CSV, replacing any old file"""
    write_csv_atomic(frame, path, float_format='%.6g')
    logger.info('wrote %d rows to %s', len(frame), path)
    return path
