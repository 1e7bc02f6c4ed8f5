"""
Run configuration, read from a TOML file

Example
-------
::

    [files]
    a = "A.csv"
    b = "B.csv"
    time_column = "t"

    [pivs.surname]
    soundex = true

    [pivs.postcode]
    stable = false

    [stem]
    seed = 7

    [posterior]
    fdr = 0.10
"""
import os
import tomllib

from .constants import (MISSING_MARKERS, MISTAKE_BOUND, N_SIM, POSTERIOR_Z0,
                        V0, V1, XI, Z0, Z1)
from .exceptions import ConfigurationError
from .ingest import PivSpec
from .inference.stem import StemConfig
from .utils import copy_with_new_cache, inspect_repr

_SECTIONS = {
    'files': {'a', 'b', 'time_column', 'missing'},
    'pivs': None,
    'merge': {'groups'},
    'stem': {'v0', 'v1', 'z0', 'z1', 'seed'},
    'posterior': {'n_sim', 'z0', 'threshold', 'fdr', 'chains'},
}
_PIV_KEYS = {'stable', 'soundex', 'mistake_bound'}


def _check_keys(table, allowed, where):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigurationError('unknown key(s) %s in %s'
                                 % (', '.join(repr(k) for k in unknown), where))


def _typed(table, key, types, where, default=None):
    value = table.get(key, default)
    if value is None:
        return value
    types = types if isinstance(types, tuple) else (types,)
    # TOML booleans are ints to isinstance
    if (not isinstance(value, types) or
            isinstance(value, bool) and bool not in types):
        raise ConfigurationError('%s.%s has the wrong type' % (where, key))
    return value


class LinkConfig(object):
    """
    Settings of a linkage run

    Parameters
    ----------
    path_a, path_b : str
        CSV files to link.
    pivs : list of PivSpec
        PIVs, in column order.
    time_column : str, optional
        Column of registration times, required for unstable PIVs.
    missing : sequence of str, optional
        Raw values read as missing.
    merge_groups : list of pair of str, optional
        PIVs combined into one before fitting.
    stem : StemConfig, optional
    n_sim : int, default 1000
    posterior_z0 : int, default 100
    threshold : float, optional
        Fixed threshold on link probabilities; default 0.5 unless `fdr` is set.
    fdr : float, optional
        Target estimated false discovery rate.
    chains : int, default 1
        Number of posterior chains.
    """
    def __init__(self, path_a, path_b, pivs, time_column=None,
                 missing=MISSING_MARKERS, merge_groups=(), stem=None,
                 n_sim=N_SIM, posterior_z0=POSTERIOR_Z0, threshold=None,
                 fdr=None, chains=1):
        if not pivs:
            raise ConfigurationError('at least one PIV must be configured')
        if threshold is not None and fdr is not None:
            raise ConfigurationError('set either a threshold or an fdr target, '
                                     'not both')
        if threshold is not None and not 0 <= threshold <= 1:
            raise ConfigurationError('threshold must lie in [0, 1]')
        if fdr is not None and not 0 < fdr < 1:
            raise ConfigurationError('fdr must lie in (0, 1)')
        if n_sim < 1 or posterior_z0 < 0 or not 1 <= chains <= n_sim:
            raise ConfigurationError('invalid posterior sampling settings')
        for group in merge_groups:
            if len(group) != 2 or group[0] == group[1]:
                raise ConfigurationError('merge groups must name two different '
                                         'PIVs: %r' % (group,))
        self.path_a = path_a
        self.path_b = path_b
        self.pivs = list(pivs)
        self.time_column = time_column
        self.missing = tuple(missing)
        self.merge_groups = [tuple(g) for g in merge_groups]
        self.stem = stem or StemConfig()
        self.n_sim = int(n_sim)
        self.posterior_z0 = int(posterior_z0)
        self.threshold = threshold
        self.fdr = fdr
        self.chains = int(chains)

    def __repr__(self):
        return inspect_repr(self)

    @property
    def xi(self):
        """Fixed threshold in effect when no fdr target is set"""
        return XI if self.threshold is None else self.threshold

    def all_stable(self):
        """Returns a copy of this configuration with every PIV stable"""
        out = copy_with_new_cache(self)
        out.pivs = [spec.as_stable() for spec in self.pivs]
        return out

    def with_overrides(self, seed=None, threshold=None, fdr=None):
        """
        Returns a copy with command-line overrides applied; a threshold
        replaces a configured fdr target and vice versa
        """
        out = copy_with_new_cache(self)
        if seed is not None:
            stem = copy_with_new_cache(self.stem)
            stem.seed = int(seed)
            out.stem = stem
        if threshold is not None:
            if not 0 <= threshold <= 1:
                raise ConfigurationError('threshold must lie in [0, 1]')
            out.threshold, out.fdr = threshold, None
        if fdr is not None:
            if not 0 < fdr < 1:
                raise ConfigurationError('fdr must lie in (0, 1)')
            out.threshold, out.fdr = None, fdr
        return out

    def as_dict(self):
        """Plain-data view, as recorded in run manifests"""
        return {
            'files': {'a': os.fspath(self.path_a), 'b': os.fspath(self.path_b),
                      'time_column': self.time_column,
                      'missing': list(self.missing)},
            'pivs': {spec.name: {'stable': spec.stable,
                                 'soundex': spec.soundex_encoded,
                                 'mistake_bound': spec.mistake_bound}
                     for spec in self.pivs},
            'merge': {'groups': [list(g) for g in self.merge_groups]},
            'stem': {'v0': self.stem.v0, 'v1': self.stem.v1,
                     'z0': self.stem.z0, 'z1': self.stem.z1,
                     'seed': self.stem.seed},
            'posterior': {'n_sim': self.n_sim, 'z0': self.posterior_z0,
                          'threshold': self.threshold, 'fdr': self.fdr,
                          'chains': self.chains},
        }

    @classmethod
    def from_dict(cls, data, base_dir='.'):
        """
        Build a configuration from parsed TOML; file paths are resolved
        relative to `base_dir`

        Raises
        ------
        ConfigurationError
            On unknown keys, missing required keys or values of the wrong type.
        """
        _check_keys(data, _SECTIONS, 'the configuration')
        files = data.get('files')
        if not isinstance(files, dict) or 'a' not in files or 'b' not in files:
            raise ConfigurationError('[files] must name the files a and b')
        _check_keys(files, _SECTIONS['files'], '[files]')
        paths = [os.path.join(base_dir, _typed(files, key, str, 'files'))
                 for key in ('a', 'b')]
        missing = files.get('missing', list(MISSING_MARKERS))
        if (not isinstance(missing, list) or
                not all(isinstance(m, str) for m in missing)):
            raise ConfigurationError('files.missing must be a list of strings')

        pivs_table = data.get('pivs')
        if not isinstance(pivs_table, dict) or not pivs_table:
            raise ConfigurationError('at least one [pivs.NAME] table is '
                                     'required')
        pivs = []
        for name, piv in pivs_table.items():
            where = 'pivs.%s' % name
            if not isinstance(piv, dict):
                raise ConfigurationError('[%s] must be a table' % where)
            _check_keys(piv, _PIV_KEYS, '[%s]' % where)
            bound = _typed(piv, 'mistake_bound', (int, float), where,
                           MISTAKE_BOUND)
            if not 0 <= bound <= 1:
                raise ConfigurationError('%s.mistake_bound must lie in [0, 1]'
                                         % where)
            pivs.append(PivSpec(name,
                                stable=_typed(piv, 'stable', bool, where, True),
                                mistake_bound=float(bound),
                                soundex_encoded=_typed(piv, 'soundex', bool,
                                                       where, False)))

        merge = data.get('merge', {})
        _check_keys(merge, _SECTIONS['merge'], '[merge]')
        groups = merge.get('groups', [])
        if not isinstance(groups, list):
            raise ConfigurationError('merge.groups must be a list of pairs')

        stem = data.get('stem', {})
        _check_keys(stem, _SECTIONS['stem'], '[stem]')
        stem_cfg = StemConfig(**{key: _typed(stem, key, int, 'stem', default)
                                 for key, default in [('v0', V0), ('v1', V1),
                                                      ('z0', Z0), ('z1', Z1),
                                                      ('seed', 0)]})

        posterior = data.get('posterior', {})
        _check_keys(posterior, _SECTIONS['posterior'], '[posterior]')
        return cls(paths[0], paths[1], pivs,
                   time_column=_typed(files, 'time_column', str, 'files'),
                   missing=missing, merge_groups=groups, stem=stem_cfg,
                   n_sim=_typed(posterior, 'n_sim', int, 'posterior', N_SIM),
                   posterior_z0=_typed(posterior, 'z0', int, 'posterior',
                                       POSTERIOR_Z0),
                   threshold=_typed(posterior, 'threshold', (int, float),
                                    'posterior'),
                   fdr=_typed(posterior, 'fdr', (int, float), 'posterior'),
                   chains=_typed(posterior, 'chains', int, 'posterior', 1))

    @classmethod
    def from_file(cls, path):
        """
        Read a TOML configuration file

        Raises
        ------
        ConfigurationError
            If the file cannot be read or parsed, or is invalid.
        """
        try:
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        except OSError as e:
            raise ConfigurationError('could not read {}: {}'.format(path, e))
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError('{}: invalid TOML: {}'.format(path, e))
        return cls.from_dict(data, os.path.dirname(os.path.abspath(path)))
