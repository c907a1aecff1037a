"""
Subsampling distributions
"""

from __future__ import division, absolute_import

import numpy as np
import pandas as pd

from pysgld.core import Core
from pysgld.utils import check_param
from pysgld.utils import check_random_state
from pysgld.utils import check_theta
from pysgld.utils import cholesky
from pysgld.utils import warn
from pysgld.utils import DimensionGuardError


# above this dimension the Laplace-based weights cost O(N d^2) per datum batch
# and are refused unless explicitly allowed
D_MAX_CV_APPROX = 60

# scores below ZERO_SCORE_TOL * mean(scores) are raised to that floor
ZERO_SCORE_TOL = 1e-12


class SubsampleDistribution(Core):
    """
    discrete distribution over data indices with O(1) draws

    draws use Vose's alias method: a table of thresholds and aliases is built
    once in O(N), then each draw costs one uniform integer and one uniform real.

    Parameters
    ----------
    probs : array-like of shape (N,)
        strictly positive weights. they are normalized to sum to one.
    scheme : str, default: 'custom'
        name of the weight scheme that produced probs

    Attributes
    ----------
    threshold_ : np.array of shape (N,)
        probability of keeping the drawn column rather than its alias
    alias_ : np.array of int, shape (N,)
    """
    def __init__(self, probs, scheme='custom'):
        probs = np.asarray(probs, dtype='float').ravel()
        if len(probs) < 1:
            raise ValueError('probs must have at least 1 element')
        if not np.isfinite(probs).all():
            raise ValueError('probs must not contain Inf nor NaN')
        if (probs <= 0).any():
            raise ValueError('probs must be strictly positive')
        self.probs = probs / probs.sum()
        self.scheme = scheme
        super(SubsampleDistribution, self).__init__(name=scheme)
        self._lipschitz_key = None
        self._lipschitz_sum = None
        self._build_alias()

    def _build_alias(self):
        N = len(self.probs)
        scaled = self.probs * N
        threshold = np.ones(N)
        alias = np.arange(N)

        small = [i for i in range(N) if scaled[i] < 1.]
        large = [i for i in range(N) if scaled[i] >= 1.]
        while small and large:
            s = small.pop()
            l = large.pop()
            threshold[s] = scaled[s]
            alias[s] = l
            scaled[l] = (scaled[l] + scaled[s]) - 1.
            if scaled[l] < 1.:
                small.append(l)
            else:
                large.append(l)

        # leftovers are 1 up to rounding
        for i in small + large:
            threshold[i] = 1.
            alias[i] = i

        self.threshold_ = threshold
        self.alias_ = alias

    @property
    def n_data(self):
        return len(self.probs)

    @property
    def is_uniform(self):
        """whether every index has probability 1/N"""
        return self.scheme == 'uniform' or np.ptp(self.probs) == 0

    def reconstruct(self):
        """
        probabilities implied by the alias table

        Returns
        -------
        np.array of shape (N,)
        """
        N = self.n_data
        out = self.threshold_.copy()
        np.add.at(out, self.alias_, 1. - self.threshold_)
        return out / N

    def draw(self, n, random_state=None):
        """
        n independent draws with replacement

        Parameters
        ----------
        n : int
        random_state : int or np.random.Generator, default: None

        Returns
        -------
        np.array of int, shape (n,)
        """
        rng = check_random_state(random_state)
        cols = rng.integers(0, self.n_data, size=n)
        keep = rng.random(n) < self.threshold_[cols]
        return np.where(keep, cols, self.alias_[cols])

    def lipschitz_sum(self, lipschitz):
        """
        sum_i L_i^2 / p_i, cached for repeated calls with the same array

        Parameters
        ----------
        lipschitz : np.array of shape (N,)

        Returns
        -------
        float
        """
        if self._lipschitz_key is not lipschitz:
            L = np.asarray(lipschitz, dtype='float')
            if L.shape != self.probs.shape:
                raise ValueError('lipschitz must have shape {}, but found {}'\
                                 .format(self.probs.shape, L.shape))
            self._lipschitz_sum = float(np.sum(L**2 / self.probs))
            self._lipschitz_key = lipschitz
        return self._lipschitz_sum

    def to_frame(self):
        """
        weights as a DataFrame with columns 'index' and 'weight'

        Returns
        -------
        pandas.DataFrame
        """
        return pd.DataFrame({'index': np.arange(self.n_data),
                             'weight': self.probs})

    @classmethod
    def uniform(cls, n_data):
        return cls(np.ones(n_data), scheme='uniform')


def normalize_scores(scores):
    """
    turn non-negative scores into strictly positive probabilities

    each score is raised to at least ZERO_SCORE_TOL times the mean score.
    all-zero scores give the uniform distribution.

    Parameters
    ----------
    scores : array-like of shape (N,)

    Returns
    -------
    np.array of shape (N,) summing to one
    """
    scores = np.asarray(scores, dtype='float')
    if not np.isfinite(scores).all():
        raise ValueError('weight scores must be finite')
    if (scores < 0).any():
        raise ValueError('weight scores must be non-negative')
    mean = scores.mean()
    if mean == 0:
        return np.full(len(scores), 1. / len(scores))
    scores = np.maximum(scores, ZERO_SCORE_TOL * mean)
    return scores / scores.sum()


def _grads_at(model, theta, cache):
    if cache is not None:
        return cache.grads(theta)
    return model.grads(theta)


def _require(value, name, scheme):
    if value is None:
        raise ValueError('weight scheme {} requires {}'.format(repr(scheme), name))


def _uniform_scores(model, theta, mode, cache):
    return np.ones(model.n_data)

def _ps_exact_scores(model, theta, mode, cache):
    _require(theta, 'theta', 'ps_exact')
    return np.linalg.norm(_grads_at(model, theta, cache), axis=1)

def _ps_approx_scores(model, theta, mode, cache):
    _require(mode, 'mode', 'ps_approx')
    return np.linalg.norm(mode.grads_at_mode, axis=1)

def _cv_exact_scores(model, theta, mode, cache):
    _require(theta, 'theta', 'cv_exact')
    _require(mode, 'mode', 'cv_exact')
    diffs = _grads_at(model, theta, cache) - mode.grads_at_mode
    return np.linalg.norm(diffs, axis=1)

def _cv_approx_scores(model, theta, mode, cache):
    _require(mode, 'mode', 'cv_approx')
    if mode.laplace_cov is None:
        raise ValueError('weight scheme \'cv_approx\' requires mode.laplace_cov')
    # tr(H S H^T) = ||H C||_F^2 with S = C C^T
    factor = cholesky(mode.laplace_cov, name='laplace_cov')
    return model.hessian_norms(mode.mode, factor)


WEIGHT_SCHEMES = {'uniform': _uniform_scores,
                  'ps_exact': _ps_exact_scores,
                  'ps_approx': _ps_approx_scores,
                  'cv_exact': _cv_exact_scores,
                  'cv_approx': _cv_approx_scores,
                  }

EXACT_SCHEMES = ['ps_exact', 'cv_exact']


def compute_weights(scheme, model, theta=None, mode=None, allow_large=False,
                    cache=None, verbose=True):
    """
    build the subsampling distribution of a weight scheme

    Parameters
    ----------
    scheme : {'uniform', 'ps_exact', 'ps_approx', 'cv_exact', 'cv_approx'}
        'uniform'   : p_i = 1/N
        'ps_exact'  : p_i proportional to ||grad f_i(theta)||
        'ps_approx' : p_i proportional to ||grad f_i(mode)||
        'cv_exact'  : p_i proportional to ||grad f_i(theta) - grad f_i(mode)||
        'cv_approx' : p_i proportional to sqrt(tr(H_i S H_i^T)), with H_i the
                      Hessian of f_i at the mode and S the Laplace covariance
    model : Model
    theta : array-like of shape (d,), default: None
        current state. required by the exact schemes
    mode : ModeInfo, default: None
        required by every scheme except 'uniform' and 'ps_exact'.
        'cv_approx' also needs mode.laplace_cov
    allow_large : bool, default: False
        whether to compute 'cv_approx' weights when d > D_MAX_CV_APPROX
    cache : GradientCache, default: None
        per-iteration store of grad f_i(theta) shared with the estimator
    verbose : bool, default: True
        whether to show pysgld warnings

    Returns
    -------
    SubsampleDistribution
    """
    if scheme not in WEIGHT_SCHEMES:
        raise ValueError('scheme must be one of {}, but found {}'\
                         .format(sorted(WEIGHT_SCHEMES), repr(scheme)))
    if theta is not None:
        theta = check_theta(theta, model.n_params)

    if scheme == 'cv_approx' and model.n_params > D_MAX_CV_APPROX:
        msg = 'cv_approx weights are not supported for models with more than '\
              '{} parameters (found d = {})'.format(D_MAX_CV_APPROX, model.n_params)
        if not allow_large:
            raise DimensionGuardError(msg + '. Set allow_large=True to override.')
        warn(msg + '. Proceeding because allow_large=True.', verbose)

    if scheme == 'uniform':
        return SubsampleDistribution.uniform(model.n_data)
    scores = WEIGHT_SCHEMES[scheme](model, theta, mode, cache)
    return SubsampleDistribution(normalize_scores(scores), scheme=scheme)


def sample_indices(dist, n, with_replacement=True, random_state=None):
    """
    draw a subsample of data indices

    Parameters
    ----------
    dist : SubsampleDistribution
    n : int
        subsample size, at least 1
    with_replacement : bool, default: True
        without replacement, a simple random sample of n distinct indices is
        drawn. this is only offered for uniform distributions.
    random_state : int or np.random.Generator, default: None

    Returns
    -------
    np.array of int, shape (n,)
    """
    n = check_param(n, param_name='n', dtype='int', constraint='>= 1')
    rng = check_random_state(random_state)
    if with_replacement:
        return dist.draw(n, rng)

    if not dist.is_uniform:
        raise ValueError('sampling without replacement requires uniform weights, '\
                         'but found scheme {}'.format(repr(dist.scheme)))
    if n > dist.n_data:
        raise ValueError('cannot draw {} distinct indices from {} data'\
                         .format(n, dist.n_data))
    return rng.choice(dist.n_data, size=n, replace=False)
