"""
Scoring of link sets against known links, and the exact-match baseline
"""
from collections import namedtuple
import logging

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


ConfusionCounts = namedtuple('ConfusionCounts', ['tp', 'fp', 'fn'])

Metrics = namedtuple('Metrics', ['fdr', 'sensitivity', 'f1', 'degenerate'])


def _pair_set(pairs):
    if hasattr(pairs, 'rows') and hasattr(pairs, 'cols'):
        return set(zip(np.asarray(pairs.rows).tolist(),
                       np.asarray(pairs.cols).tolist()))
    return {(int(p[0]), int(p[1])) for p in pairs}


def simplistic_link(a, b):
    """
    Every cross-file pair whose PIV vectors are identical, missing codes
    included, with no one-to-one constraint

    Returns
    -------
    pairs : list of tuple
        (row in A, row in B) pairs, sorted.
    """
    _, group = np.unique(np.concatenate([a.values, b.values]), axis=0,
                         return_inverse=True)
    group = group.reshape(-1)
    group_a, group_b = group[:a.n_records], group[a.n_records:]
    order_b = np.argsort(group_b, kind='stable')
    sorted_b = group_b[order_b]
    start = np.searchsorted(sorted_b, group_a, side='left')
    stop = np.searchsorted(sorted_b, group_a, side='right')
    return [(i, int(j)) for i in range(a.n_records)
            for j in order_b[start[i]:stop[i]]]


def confusion(est, truth):
    """
    Counts of true positives, false positives and false negatives

    Parameters
    ----------
    est, truth : iterable of pairs, LinkSet or GroundTruth
    """
    est = _pair_set(est)
    truth = _pair_set(truth)
    tp = len(est & truth)
    return ConfusionCounts(tp, len(est) - tp, len(truth) - tp)


def metrics(counts):
    """
    False discovery rate fp / (tp + fp), sensitivity tp / (tp + fn) and F1
    score 2 tp / (2 tp + fp + fn)

    Undefined ratios are reported as 0; `degenerate` is set when any was.
    """
    tp, fp, fn = counts
    degenerate = False
    values = []
    for numerator, denominator in [(fp, tp + fp), (tp, tp + fn),
                                   (2 * tp, 2 * tp + fp + fn)]:
        if denominator:
            values.append(numerator / float(denominator))
        else:
            values.append(0.0)
            degenerate = True
    return Metrics(*values, degenerate=degenerate)


def report_frame(counts):
    """One-row pandas DataFrame of counts and metrics"""
    m = metrics(counts)
    return pd.DataFrame([{'tp': counts.tp, 'fp': counts.fp, 'fn': counts.fn,
                          'fdr': m.fdr, 'sensitivity': m.sensitivity,
                          'f1': m.f1}],
                        columns=['tp', 'fp', 'fn', 'fdr', 'sensitivity', 'f1'])


def format_report(counts):
    """Aligned text summary of counts and metrics"""
    m = metrics(counts)
    rows = [('TP', '%d' % counts.tp), ('FP', '%d' % counts.fp),
            ('FN', '%d' % counts.fn), ('FDR', '%.4f' % m.fdr),
            ('sensitivity', '%.4f' % m.sensitivity), ('F1', '%.4f' % m.f1)]
    width = max(len(name) for name, _ in rows)
    lines = ['%s  %s' % (name.ljust(width), value) for name, value in rows]
    if m.degenerate:
        lines.append('(undefined ratios reported as 0)')
    return '\n'.join(lines)
