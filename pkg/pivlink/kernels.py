"""
Probability kernels of the linkage model

The model factorises, for each PIV k, into

- a prior on true values, P(H = h) = eta_k[h];
- for unstable PIVs, a survival model of the true value of a linked pair,
  S(t) = exp(-exp(alpha_k) t), the probability that the value has not changed
  after a time t between registrations;
- a registration model of the observed code g given the true value h, with a
  file-specific probability of a missing value and a probability of a mistake
  shared by both files. Mistakes are equiprobable among the other n_k - 1
  values.

Codes are 1-based as in `ingest.RecordTable`; eta vectors are stored as
0-based numpy arrays, so eta_k[h] is `eta[k][h - 1]`.
"""
import numpy as np

from .utils import ZeroArray, inspect_repr


class ModelParams(object):
    """
    Parameters theta = {gamma, eta, alpha, phi} of the linkage model

    Parameters
    ----------
    gamma : float
        Proportion of records of the smaller file that have a link.
    eta : list of np.ndarray
        Distribution of the true values of each PIV, a simplex of length n_k.
    alpha : dict
        Log baseline hazard, keyed by the index of each unstable PIV.
    phi_mistake : array_like, shape (K,)
        Probability of a registration mistake for each PIV, shared by files.
    phi_missing_a, phi_missing_b : array_like, shape (K,)
        Probability of a missing registration for each PIV in file A and file
        B; fixed by the data.
    """
    def __init__(self, gamma, eta, alpha, phi_mistake, phi_missing_a,
                 phi_missing_b):
        self.gamma = float(gamma)
        self.eta = [np.asarray(e, dtype=float) for e in eta]
        self.alpha = {int(k): float(v) for k, v in dict(alpha).items()}
        self.phi_mistake = np.asarray(phi_mistake, dtype=float)
        self.phi_missing_a = np.asarray(phi_missing_a, dtype=float)
        self.phi_missing_b = np.asarray(phi_missing_b, dtype=float)

    def __repr__(self):
        return inspect_repr(self)

    @property
    def n_pivs(self):
        return len(self.eta)

    def copy(self):
        return ModelParams(self.gamma, [e.copy() for e in self.eta],
                           dict(self.alpha), self.phi_mistake.copy(),
                           self.phi_missing_a.copy(), self.phi_missing_b.copy())

    def check(self, specs, atol=1e-9):
        """
        Raise ValueError unless these parameters are valid for the given PIVs
        """
        if len(specs) != self.n_pivs:
            raise ValueError('parameters describe %d PIVs, specs %d'
                             % (self.n_pivs, len(specs)))
        if not 0 <= self.gamma <= 1:
            raise ValueError('gamma must lie in [0, 1]')
        for k, (spec, eta) in enumerate(zip(specs, self.eta)):
            if spec.support_size is not None and len(eta) != spec.support_size:
                raise ValueError('eta of PIV %r has length %d, expected %d'
                                 % (spec.name, len(eta), spec.support_size))
            if np.any(eta < 0) or abs(eta.sum() - 1) > atol:
                raise ValueError('eta of PIV %r is not a simplex' % spec.name)
            if not 0 <= self.phi_mistake[k] <= spec.mistake_bound + atol:
                raise ValueError('phi_mistake of PIV %r must lie in [0, %s]'
                                 % (spec.name, spec.mistake_bound))
        unstable = {k for k, spec in enumerate(specs) if not spec.stable}
        if set(self.alpha) != unstable:
            raise ValueError('alpha must be given exactly for the unstable '
                             'PIVs %s' % sorted(unstable))
        return self

    @classmethod
    def mean(cls, params_list):
        """
        Coordinate-wise average of a sequence of ModelParams
        """
        params_list = list(params_list)
        if not params_list:
            raise ValueError('cannot average an empty sequence of parameters')
        n = float(len(params_list))
        gamma, phi = ZeroArray(), ZeroArray()
        eta = [ZeroArray() for _ in params_list[0].eta]
        alpha = {k: ZeroArray() for k in params_list[0].alpha}
        # accumulators take over the first operand; copy so inputs stay intact
        for params in params_list:
            gamma += params.gamma
            phi += params.phi_mistake.copy()
            for k, e in enumerate(params.eta):
                eta[k] += e.copy()
            for k, a in params.alpha.items():
                alpha[k] += a
        first = params_list[0]
        # renormalise to absorb round-off in the averaged simplices
        eta = [e / n for e in eta]
        return cls(gamma / n, [e / e.sum() for e in eta],
                   {k: a / n for k, a in alpha.items()}, phi / n,
                   first.phi_missing_a, first.phi_missing_b)


def survival_prob(alpha_k, t):
    """
    Probability that the true value of an unstable PIV is unchanged after a
    time t, under a constant hazard exp(alpha_k)

    Parameters
    ----------
    alpha_k : float
        Log baseline hazard.
    t : float or np.ndarray
        Nonnegative time(s) between the two registrations.

    Returns
    -------
    out : float or np.ndarray
        exp(-exp(alpha_k) * t), in (0, 1].
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError('time differences must be nonnegative')
    out = np.exp(-np.exp(alpha_k) * t)
    return out if out.ndim else float(out)


def _check_code(code, n_k, lowest):
    if not lowest <= code <= n_k:
        raise ValueError('code %s outside {%d..%d}' % (code, lowest, n_k))


def obs_given_truth(spec, g, h, phi_missing, phi_mistake):
    """
    Probability of registering code g for a PIV whose true value is h

    Returns phi_missing when g is missing (0), (1 - phi_missing) *
    (1 - phi_mistake) when g equals h, and (1 - phi_missing) * phi_mistake /
    (n_k - 1) otherwise.
    """
    n_k = spec.support_size
    _check_code(h, n_k, 1)
    _check_code(g, n_k, 0)
    if g == 0:
        return float(phi_missing)
    if g == h:
        return (1 - phi_missing) * (1 - phi_mistake)
    if n_k == 1:
        raise ValueError('PIV %r has a single value; g=%s cannot differ from '
                         'h=%s' % (spec.name, g, h))
    return (1 - phi_missing) * phi_mistake / (n_k - 1)


def truth_prior(eta_k, h):
    """
    Prior probability eta_k[h] of the true value h (1-based)
    """
    eta_k = np.asarray(eta_k)
    _check_code(h, len(eta_k), 1)
    return float(eta_k[h - 1])


def linked_truth_joint(spec, h_a, h_b, t, params, k):
    """
    Joint probability of the true values (h_a, h_b) of PIV k for a linked pair

    For a stable PIV this is eta_k[h_a] when h_a == h_b and 0 otherwise. For an
    unstable PIV the value survives with probability S = survival_prob(alpha_k,
    t) and otherwise moves uniformly to one of the n_k - 1 other values.

    Parameters
    ----------
    spec : ingest.PivSpec
    h_a, h_b : int
        True values (1-based) in file A and file B.
    t : float or None
        Time between the two registrations; required for unstable PIVs.
    params : ModelParams
    k : int
        Index of the PIV in `params`.
    """
    eta_k = params.eta[k]
    prior = truth_prior(eta_k, h_a)
    _check_code(h_b, len(eta_k), 1)
    if spec.stable:
        return prior if h_a == h_b else 0.0
    if t is None:
        raise ValueError('unstable PIV %r requires a registration time '
                         'difference' % spec.name)
    survival = survival_prob(params.alpha[k], t)
    if h_a == h_b:
        return prior * survival
    return prior * (1 - survival) / (len(eta_k) - 1)


def obs_likelihood_matrix(g, n_k, phi_missing, phi_mistake):
    """
    Matrix of obs_given_truth(g_i, h) for a column of codes

    Parameters
    ----------
    g : np.ndarray of int, shape (n,)
        Registered codes in {0..n_k}.
    n_k : int
    phi_missing, phi_mistake : float

    Returns
    -------
    out : np.ndarray, shape (n, n_k)
        Entry [i, h - 1] is the probability of registering g[i] when the true
        value is h.
    """
    g = np.asarray(g)
    off = (1 - phi_missing) * phi_mistake / (n_k - 1) if n_k > 1 else 0.0
    out = np.full((len(g), n_k), off)
    observed = np.flatnonzero(g > 0)
    out[observed, g[observed] - 1] = (1 - phi_missing) * (1 - phi_mistake)
    out[g == 0] = phi_missing
    return out


def log_linked_ratio(spec, h_a, h_b, t, params, k):
    """
    Vectorised log of linked_truth_joint / (eta[h_a] * eta[h_b])

    This is the contribution of PIV k to the log odds of a link between
    records with true values h_a and h_b: the registration terms are the same
    whether or not the pair is linked and cancel.

    Parameters
    ----------
    h_a, h_b : np.ndarray of int
        True values (1-based) of the candidate pairs.
    t : np.ndarray of float or None
        Registration time differences of the pairs.

    Returns
    -------
    out : np.ndarray
        -inf where the pair is impossible (a stable PIV that disagrees).
    """
    log_eta = _log(params.eta[k])
    h_a = np.asarray(h_a)
    h_b = np.asarray(h_b)
    agree = h_a == h_b
    if spec.stable:
        return np.where(agree, -log_eta[h_b - 1], -np.inf)
    n_k = len(log_eta)
    rate = np.exp(params.alpha[k])
    t = np.asarray(t, dtype=float)
    log_survival = -rate * t
    with np.errstate(divide='ignore'):
        # log(1 - S) with S = exp(-rate * t)
        log_change = np.log(-np.expm1(-rate * t))
        if n_k > 1:
            log_change = log_change - np.log(n_k - 1)
        else:
            log_change = np.full_like(log_change, -np.inf)
    return np.where(agree, log_survival, log_change) - log_eta[h_b - 1]


def _log(x):
    with np.errstate(divide='ignore'):
        return np.log(x)
