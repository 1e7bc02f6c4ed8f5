from copy import copy
import functools
import inspect
import os
import tempfile

import numpy as np

from .exceptions import DataError, NumericalError


class ZeroArray(object):
    """
    Additive identity for running sums of unknown shape

    `x += y` on a ZeroArray rebinds x to y (and `x -= y` to -y), so a sum of
    parameter vectors can start before the length of the vectors is known.

    Example
    -------
    >>> total = ZeroArray()
    >>> total += np.array([0.5, 0.5])
    >>> total
    array([0.5, 0.5])
    """
    def __iadd__(self, other):
        return other

    def __isub__(self, other):
        return -other


class memoized_property(functools.cached_property):
    """Property computed on first access and stored on the instance"""


def copy_with_new_cache(obj):
    """
    Shallow copy of obj without the values stored by its memoized properties
    """
    new_obj = copy(obj)
    for cls in type(obj).__mro__:
        for name, attr in vars(cls).items():
            if isinstance(attr, memoized_property):
                new_obj.__dict__.pop(name, None)
    return new_obj


def check_random_state(seed):
    """
    Returns a np.random.Generator: Generators pass through, anything else
    (None, an int or a SeedSequence) seeds a new one
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def substream(seed, *key):
    """
    Returns an independent Generator for the stream labelled by `key`

    Streams with different keys derived from the same integer seed are
    statistically independent, and a given (seed, key) always reproduces the
    same stream, whatever order the streams are requested in.
    """
    if seed is None:
        seed = 0
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def sample_categorical(weights, random_state=None):
    """
    Draw one category per row of a nonnegative weight matrix

    Parameters
    ----------
    weights : np.ndarray, shape (n, m)
        Unnormalised weights; row i is the distribution of the i-th draw over
        the categories 0..m-1.
    random_state : None, int or np.random.Generator, optional

    Returns
    -------
    out : np.ndarray of int, shape (n,)
        Zero-based category indices.

    Raises
    ------
    NumericalError
        If any row has zero (or non-finite) total weight.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 2:
        raise ValueError('weights must be two dimensional')
    cdf = np.cumsum(weights, axis=1)
    total = cdf[:, -1] if weights.shape[1] else np.zeros(len(weights))
    if not np.all(np.isfinite(total) & (total > 0)):
        bad = np.flatnonzero(~(np.isfinite(total) & (total > 0)))
        raise NumericalError('categorical weights sum to zero in %s row(s), '
                             'first at row %d' % (len(bad), bad[0]))
    u = check_random_state(random_state).random(len(weights)) * total
    out = (cdf <= u[:, np.newaxis]).sum(axis=1)
    # guard against u landing exactly on the total through round-off
    return np.minimum(out, weights.shape[1] - 1)


def write_csv_atomic(frame, path, **kwargs):
    """
    Write a pandas DataFrame to CSV by writing a temporary file in the same
    directory and renaming it over `path`

    Raises
    ------
    DataError
        If the file cannot be written, naming the path.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    kwargs.setdefault('index', False)
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=directory, suffix='.tmp')
        try:
            with os.fdopen(fd, 'w', newline='') as f:
                frame.to_csv(f, **kwargs)
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
    except OSError as e:
        raise DataError('could not write {}: {}'.format(path, e))
    return path


def _hanging_indent(text, prefix, width=None):
    pad = '\n' + ' ' * (len(prefix) if width is None else width)
    return prefix + pad.join(text.splitlines())


def inspect_repr(obj):
    """
    repr listing the arguments of `type(obj).__init__`, each read back from
    the attribute of the same name

    Nested reprs are indented under their argument name, and an attribute
    pointing back at obj is abbreviated.
    """
    name = type(obj).__name__
    params = inspect.signature(type(obj).__init__).parameters
    fields = []
    for key, p in params.items():
        if key == 'self' or p.kind in (p.VAR_POSITIONAL, p.VAR_KEYWORD):
            continue
        value = getattr(obj, key)
        text = '%s(...)' % name if value is obj else repr(value)
        fields.append(_hanging_indent(text, key + '='))
    return _hanging_indent(',\n'.join(fields), name + '(\n    ', 4) + ')'
