"""
Reading and categorical encoding of the partially identifying variables (PIVs)

Both files share one support per PIV: the distinct non-missing values observed
in either file, numbered 1..n_k by first appearance (file A scanned before file
B). Missing values are encoded as 0.
"""
import logging
import os
import unicodedata
import warnings

import jellyfish
import numpy as np
import pandas as pd

from .constants import MISSING_MARKERS, MISTAKE_BOUND, SOUNDEX_EMPTY
from .exceptions import ConfigurationError, DataError, DegenerateParameterWarning
from .utils import inspect_repr, memoized_property

logger = logging.getLogger(__name__)


class PivSpec(object):
    """
    Metadata for one partially identifying variable

    Parameters
    ----------
    name : str
        Column name of the PIV in both input files.
    support_size : int, optional
        Number n_k of distinct values of the PIV. Unknown until the support has
        been built from the data (see `build_support`).
    stable : bool, default True
        Whether the true value of this PIV is identical in both files for the
        same individual. Unstable PIVs may drift with the time elapsed between
        registrations.
    mistake_bound : float, default 0.10
        Upper bound on the probability of a registration mistake.
    soundex_encoded : bool, default False
        Whether raw values are replaced by their soundex code before encoding.
    """
    def __init__(self, name, support_size=None, stable=True,
                 mistake_bound=MISTAKE_BOUND, soundex_encoded=False):
        if support_size is not None and int(support_size) < 1:
            raise ValueError('support_size of PIV %r must be at least 1' % name)
        if not 0 <= mistake_bound <= 1:
            raise ValueError('mistake_bound of PIV %r must lie in [0, 1]'
                             % name)
        self.name = name
        self.support_size = None if support_size is None else int(support_size)
        self.stable = bool(stable)
        self.mistake_bound = float(mistake_bound)
        self.soundex_encoded = bool(soundex_encoded)

    def __repr__(self):
        return inspect_repr(self)

    def __eq__(self, other):
        return (isinstance(other, PivSpec) and
                vars(self) == vars(other))

    def __ne__(self, other):
        return not self == other

    def with_support_size(self, support_size):
        return PivSpec(self.name, support_size, self.stable, self.mistake_bound,
                       self.soundex_encoded)

    def as_stable(self):
        """
        Stable copy of this PIV. A PIV that was unstable loses its mistake
        bound: its changes of value now count as registration mistakes.
        """
        bound = self.mistake_bound if self.stable else 1.0
        return PivSpec(self.name, self.support_size, True, bound,
                       self.soundex_encoded)


class SupportMap(object):
    """
    Bijection between the raw values of a PIV and the codes 1..n_k

    Parameters
    ----------
    values : sequence of str
        Distinct raw values in code order; values[0] receives code 1.

    Attributes
    ----------
    forward : dict
        Raw value -> code.
    reverse : np.ndarray of object
        Raw value indexed by code; reverse[0] is None (the missing code).
    """
    def __init__(self, values):
        values = list(values)
        self.forward = {v: code for code, v in enumerate(values, start=1)}
        if len(self.forward) != len(values):
            raise ValueError('support values must be distinct')
        self.reverse = np.array([None] + values, dtype=object)

    def __repr__(self):
        return 'SupportMap(%r)' % list(self.reverse[1:])

    def __len__(self):
        return len(self.forward)

    @property
    def values(self):
        return list(self.reverse[1:])

    @property
    def support_size(self):
        return len(self.forward)


class RecordTable(object):
    """
    An encoded file: a matrix of PIV codes, plus optional registration times

    Parameters
    ----------
    values : array_like of int, shape (n_records, K)
        Codes in {0, 1, ..., n_k} for each PIV column; 0 marks a missing value.
    times : array_like of float, optional
        Registration time of each record, in any consistent unit.
    names : sequence of str, optional
        PIV column names. Defaults to 'V1', 'V2', ...
    support_sizes : sequence of int, optional
        Support size n_k of each column. Defaults to the column maxima.
    """
    def __init__(self, values, times=None, names=None, support_sizes=None):
        values = np.asarray(values, dtype=np.int64)
        if values.ndim != 2:
            raise ValueError('values must be a two dimensional matrix')
        n_pivs = values.shape[1]
        if names is None:
            names = ['V%d' % (k + 1) for k in range(n_pivs)]
        if support_sizes is None:
            support_sizes = (values.max(axis=0) if len(values)
                             else np.ones(n_pivs, dtype=np.int64))
            support_sizes = np.maximum(support_sizes, 1)
        names = list(names)
        support_sizes = np.asarray(support_sizes, dtype=np.int64)
        if len(names) != n_pivs or len(support_sizes) != n_pivs:
            raise ValueError('names and support_sizes must have one entry per '
                             'PIV column')
        if values.size and (values.min() < 0 or
                            np.any(values > support_sizes)):
            k = int(np.flatnonzero((values < 0).any(axis=0) |
                                   (values > support_sizes).any(axis=0))[0])
            raise ValueError('codes of column %r must lie in {0..%d}'
                             % (names[k], support_sizes[k]))
        if times is not None:
            times = np.asarray(times, dtype=float)
            if times.shape != (len(values),):
                raise ValueError('times must have one entry per record')
        self.values = values
        self.times = times
        self.names = names
        self.support_sizes = support_sizes

    def __repr__(self):
        return inspect_repr(self)

    @property
    def n_records(self):
        return self.values.shape[0]

    @property
    def n_pivs(self):
        return self.values.shape[1]

    @memoized_property
    def missing(self):
        """Boolean matrix marking missing entries"""
        return self.values == 0

    def subset(self, rows):
        """Returns a new RecordTable restricted to the given rows"""
        times = None if self.times is None else self.times[rows]
        return RecordTable(self.values[rows], times, self.names,
                           self.support_sizes)


def soundex(name):
    """
    American (Russell) soundex code of a string

    The input is stripped of diacritics (by Unicode decomposition) and of any
    character outside A-Z before `jellyfish.soundex` codes it: the first letter
    is kept, then up to three digits, zero-padded.

    Strings without any codable letter return the sentinel code '0000', which
    then acts as a category of its own.

    Examples
    --------
    >>> soundex('mark'), soundex('marc'), soundex('michel')
    ('M620', 'M620', 'M240')
    """
    decomposed = unicodedata.normalize('NFKD', str(name)).upper()
    letters = ''.join(c for c in decomposed if 'A' <= c <= 'Z')
    if not letters:
        return SOUNDEX_EMPTY
    return jellyfish.soundex(letters)


def _is_missing(values, missing):
    markers = {m.strip().upper() for m in missing}
    values = pd.Series(values, dtype=object)
    return (values.isna() |
            values.astype(str).str.strip().str.upper().isin(markers)).to_numpy()


def _prepare_column(raw, spec, missing):
    """
    Returns the raw column as an object array of cleaned values, with None for
    missing entries
    """
    raw = pd.Series(raw, dtype=object).reset_index(drop=True)
    is_missing = _is_missing(raw, missing)
    cleaned = raw.astype(str).str.strip()
    if spec.soundex_encoded:
        cleaned = cleaned.map(soundex)
    cleaned = cleaned.to_numpy(dtype=object)
    cleaned[is_missing] = None
    return cleaned


def build_support(raw_a, raw_b, spec, missing=MISSING_MARKERS):
    """
    Build the shared categorical support of a PIV across both files

    Parameters
    ----------
    raw_a, raw_b : sequence of str
        Raw column of the PIV in file A and file B.
    spec : PivSpec
        Metadata of the PIV; if `spec.soundex_encoded`, values are replaced by
        their soundex code first.
    missing : sequence of str, optional
        Markers of missing values, compared case-insensitively after stripping
        whitespace.

    Returns
    -------
    support : SupportMap
        Codes assigned by order of first appearance, scanning A then B.

    Raises
    ------
    ConfigurationError
        If neither file has any non-missing value for this PIV.
    """
    combined = np.concatenate([_prepare_column(raw_a, spec, missing),
                               _prepare_column(raw_b, spec, missing)])
    observed = combined[np.array([v is not None for v in combined],
                                 dtype=bool)]
    if not len(observed):
        raise ConfigurationError('PIV %r has no observed value in either file'
                                 % spec.name)
    return SupportMap(pd.unique(pd.Series(observed, dtype=object)))


def encode_table(raw_rows, specs, supports, times=None,
                 missing=MISSING_MARKERS):
    """
    Encode raw rows as a RecordTable

    Parameters
    ----------
    raw_rows : pandas.DataFrame or array_like, shape (n_records, K)
        Raw values; DataFrame columns are selected by PIV name, other inputs by
        position.
    specs : list of PivSpec
    supports : list of SupportMap
        Shared supports, one per PIV, as returned by `build_support`.
    times : array_like of float, optional
        Registration times, one per record.
    missing : sequence of str, optional
        Markers of missing values.

    Returns
    -------
    table : RecordTable

    Raises
    ------
    DataError
        If a non-missing value is absent from its support; the message names
        the row, column and value.
    """
    if len(specs) != len(supports):
        raise ValueError('one support is required per PIV')
    if isinstance(raw_rows, pd.DataFrame):
        columns = [raw_rows[spec.name] for spec in specs]
    else:
        raw_rows = np.asarray(raw_rows, dtype=object)
        if raw_rows.ndim != 2 or raw_rows.shape[1] != len(specs):
            raise ValueError('raw rows must have one column per PIV')
        columns = [raw_rows[:, k] for k in range(len(specs))]
    n_records = len(columns[0]) if columns else 0
    values = np.zeros((n_records, len(specs)), dtype=np.int64)
    for k, (raw, spec, support) in enumerate(zip(columns, specs, supports)):
        cleaned = _prepare_column(raw, spec, missing)
        for i, v in enumerate(cleaned):
            if v is None:
                continue
            try:
                values[i, k] = support.forward[v]
            except KeyError:
                raise DataError('row %d, column %r: value %r is not in the '
                                'support of this PIV' % (i, spec.name, v))
    return RecordTable(values, times, [spec.name for spec in specs],
                       [support.support_size for support in supports])


def decode_table(table, supports, missing_marker=''):
    """
    Map the codes of a RecordTable back to raw values

    Returns
    -------
    frame : pandas.DataFrame
        One column per PIV named after `table.names`; missing codes become
        `missing_marker`.
    """
    columns = {}
    for k, (name, support) in enumerate(zip(table.names, supports)):
        reverse = support.reverse.copy()
        reverse[0] = missing_marker
        columns[name] = reverse[table.values[:, k]]
    return pd.DataFrame(columns, columns=list(table.names))


def combined_support(tables, k1, k2):
    """
    Returns the observed (v1, v2) code pairs of columns k1 and k2 across the
    given tables, in order of first appearance
    """
    if k1 == k2:
        raise ValueError('cannot merge a PIV with itself')
    pairs = []
    seen = set()
    for table in tables:
        both = table.values[:, [k1, k2]]
        observed = both[(both != 0).all(axis=1)]
        for pair in map(tuple, observed.tolist()):
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    return pairs


def merge_pivs(table, k1, k2, pair_support=None):
    """
    Combine two PIV columns into a single PIV

    The combined column replaces column k1 (column k2 is removed). Its codes
    number the observed (v1, v2) pairs; a pair with either component missing
    is coded 0.

    Parameters
    ----------
    table : RecordTable
    k1, k2 : int
        Column indices of the PIVs to merge.
    pair_support : list of tuple, optional
        Pairs in code order. Pass the output of `combined_support` over both
        files to keep the merged support shared; defaults to the pairs
        observed in `table` alone.

    Returns
    -------
    merged : RecordTable
    """
    if k1 == k2:
        raise ValueError('cannot merge a PIV with itself')
    if pair_support is None:
        pair_support = combined_support([table], k1, k2)
    codes = {pair: code for code, pair in enumerate(pair_support, start=1)}
    merged_column = np.zeros(table.n_records, dtype=np.int64)
    for i, pair in enumerate(map(tuple, table.values[:, [k1, k2]].tolist())):
        if pair[0] and pair[1]:
            try:
                merged_column[i] = codes[pair]
            except KeyError:
                raise DataError('row %d: pair %r of columns %r and %r is not '
                                'in the merged support'
                                % (i, pair, table.names[k1], table.names[k2]))
    values = table.values.copy()
    values[:, k1] = merged_column
    keep = [k for k in range(table.n_pivs) if k != k2]
    names = list(table.names)
    names[k1] = '%s+%s' % (table.names[k1], table.names[k2])
    sizes = table.support_sizes.copy()
    sizes[k1] = max(len(pair_support), 1)
    return RecordTable(values[:, keep], table.times, [names[k] for k in keep],
                       sizes[keep])


def merge_specs(specs, k1, k2, support_size):
    """
    Returns the PIV metadata list after merging PIVs k1 and k2

    The merged PIV is stable only when both parts are, and may be mistaken
    when either part is.
    """
    s1, s2 = specs[k1], specs[k2]
    merged = PivSpec('%s+%s' % (s1.name, s2.name), support_size,
                     stable=s1.stable and s2.stable,
                     mistake_bound=1 - (1 - s1.mistake_bound)
                                     * (1 - s2.mistake_bound))
    out = list(specs)
    out[k1] = merged
    del out[k2]
    return out


def missing_rates(table):
    """
    Proportion of missing values in each PIV column of a table

    These rates are the (fixed) probabilities of a missing registration for
    the file, and are never re-estimated. A column with no observed value is
    reported with a warning.
    """
    if not table.n_records:
        return np.zeros(table.n_pivs)
    rates = table.missing.mean(axis=0)
    for name in np.asarray(table.names, dtype=object)[rates == 1]:
        message = 'PIV %r is missing in every record' % name
        logger.warning(message)
        warnings.warn(message, DegenerateParameterWarning)
    return rates


def read_csv(path):
    """
    Read a CSV file with a header row, keeping every cell as a string
    """
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False,
                           encoding='utf-8')
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError('could not read {}: {}'.format(path, e))


def _parse_times(frame, column, path):
    if column not in frame.columns:
        raise DataError('{}: time column {!r} not found'.format(path, column))
    try:
        return pd.to_numeric(frame[column], errors='raise').to_numpy(float)
    except (ValueError, TypeError) as e:
        raise DataError('{}: time column {!r} is not numeric: {}'
                        .format(path, column, e))


def read_tables(config):
    """
    Read and encode both files declared in a run configuration

    Parameters
    ----------
    config : config.LinkConfig

    Returns
    -------
    a, b : RecordTable
        Encoded files, after merging the configured PIV groups.
    specs : list of PivSpec
        PIV metadata with support sizes filled in, one per column of `a`/`b`.
    supports : list of SupportMap
        Supports of the PIVs before merging, one per configured PIV.

    Raises
    ------
    ConfigurationError
        If a PIV is declared unstable but no time column is configured or
        present in a file, or a support is empty.
    DataError
        If a file cannot be read or lacks a configured column.
    """
    specs = list(config.pivs)
    unstable = ', '.join(repr(spec.name) for spec in specs if not spec.stable)
    if unstable and config.time_column is None:
        raise ConfigurationError('PIV(s) %s declared unstable but no time '
                                 'column is configured' % unstable)
    frames = []
    for path in (config.path_a, config.path_b):
        frame = read_csv(path)
        absent = [spec.name for spec in specs if spec.name not in frame.columns]
        if absent:
            raise DataError('{}: missing PIV column(s) {}'.format(
                path, ', '.join(repr(name) for name in absent)))
        if unstable and config.time_column not in frame.columns:
            raise ConfigurationError(
                'PIV(s) {} declared unstable but {} has no time column {!r}'
                .format(unstable, path, config.time_column))
        frames.append(frame)
    frame_a, frame_b = frames

    supports = [build_support(frame_a[spec.name], frame_b[spec.name], spec,
                              config.missing)
                for spec in specs]
    specs = [spec.with_support_size(support.support_size)
             for spec, support in zip(specs, supports)]
    tables = []
    for frame, path in zip(frames, (config.path_a, config.path_b)):
        times = (None if config.time_column is None
                 else _parse_times(frame, config.time_column, path))
        tables.append(encode_table(frame, specs, supports, times,
                                   config.missing))
        logger.info('encoded %d records with %d PIVs from %s',
                    len(frame), len(specs), os.path.basename(str(path)))
    a, b = tables

    for group in config.merge_groups:
        names = [spec.name for spec in specs]
        try:
            k1, k2 = (names.index(name) for name in group)
        except ValueError:
            raise ConfigurationError('merge group %r names an unknown PIV'
                                     % (group,))
        pairs = combined_support([a, b], k1, k2)
        a = merge_pivs(a, k1, k2, pairs)
        b = merge_pivs(b, k1, k2, pairs)
        specs = merge_specs(specs, k1, k2, max(len(pairs), 1))
        logger.info('merged PIVs %r and %r into %d combined values',
                    group[0], group[1], len(pairs))
    return a, b, specs, supports
