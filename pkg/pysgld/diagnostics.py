"""
Sample quality and predictive metrics
"""

from __future__ import division, absolute_import

import numpy as np
import scipy as sp
from scipy import linalg

from pysgld.core import Core
from pysgld.models import Model
from pysgld.estimators import estimate_gradient
from pysgld.utils import check_array
from pysgld.utils import check_param
from pysgld.utils import check_random_state
from pysgld.utils import cholesky
from pysgld.utils import even_thin
from pysgld.utils import log1pexp
from pysgld.utils import logdet_from_cholesky
from pysgld.utils import warn


def kl_gaussian(mu_a, cov_a, mu_b, cov_b):
    """
    KL(N(mu_a, cov_a) || N(mu_b, cov_b))

    Parameters
    ----------
    mu_a, mu_b : array-like of shape (d,)
    cov_a, cov_b : array-like of shape (d, d)
        symmetric positive definite

    Returns
    -------
    float, non-negative
    """
    mu_a = np.atleast_1d(np.asarray(mu_a, dtype='float'))
    mu_b = np.atleast_1d(np.asarray(mu_b, dtype='float'))
    La = cholesky(cov_a, name='cov_a')
    Lb = cholesky(cov_b, name='cov_b')
    d = len(mu_a)
    if not (len(mu_b) == d and La.shape == (d, d) and Lb.shape == (d, d)):
        raise ValueError('inconsistent dimensions: mu_a {}, cov_a {}, mu_b {}, cov_b {}'\
                         .format(mu_a.shape, La.shape, mu_b.shape, Lb.shape))

    # tr(cov_b^-1 cov_a) = ||Lb^-1 La||_F^2
    M = sp.linalg.solve_triangular(Lb, La, lower=True)
    z = sp.linalg.solve_triangular(Lb, mu_b - mu_a, lower=True)
    kl = 0.5 * (np.sum(M**2) + z.dot(z) - d
                + logdet_from_cholesky(Lb) - logdet_from_cholesky(La))
    return max(float(kl), 0.)


def gaussian_kl_trace(samples, mu, cov, n_windows=4):
    """
    KL between the moment-matched Gaussian of consecutive windows of a chain
    and a reference Gaussian

    Parameters
    ----------
    samples : np.array of shape (K, d) or ChainTrace
    mu : array-like of shape (d,)
    cov : array-like of shape (d, d)
    n_windows : int, default: 4

    Returns
    -------
    np.array of shape (n_windows,)
    """
    samples = getattr(samples, 'samples', samples)
    samples = check_array(samples, ndim=2, min_samples=2 * n_windows,
                          name='samples')
    out = []
    for window in np.array_split(samples, n_windows):
        cov_w = np.atleast_2d(np.cov(window, rowvar=False))
        out.append(kl_gaussian(window.mean(axis=0), cov_w, mu, cov))
    return np.array(out)


def log_loss(theta, test):
    """
    mean negative log predictive probability of a logistic model

    Parameters
    ----------
    theta : array-like of shape (d,)
    test : Dataset
        features and {0, 1} responses

    Returns
    -------
    float
    """
    if test.n_data == 0:
        raise ValueError('log-loss requires a non-empty test set')
    theta = np.asarray(theta, dtype='float')
    z = test.X.dot(theta)
    # -log sigmoid(z) = log1pexp(-z), -log(1 - sigmoid(z)) = log1pexp(z)
    return float(np.mean(log1pexp(np.where(test.y == 1, -z, z))))


def imq_kernel(x, y, c=1., beta=-0.5):
    """
    inverse multi-quadratic kernel (c^2 + ||x - y||^2)^beta

    Parameters
    ----------
    x, y : array-like of shape (d,)
    c : float, default: 1
    beta : float, default: -0.5

    Returns
    -------
    float
    """
    diff = np.asarray(x, dtype='float') - np.asarray(y, dtype='float')
    return float((c**2 + diff.dot(diff))**beta)


def _stein_terms(diff, s_x, s_y, c, beta):
    """
    per-dimension Stein kernel with the IMQ base kernel.

    with u = c^2 + r^2 and diff = x - y:
        K            = u^b
        dK/dx_j      =  2 b diff_j u^(b-1)
        dK/dy_j      = -2 b diff_j u^(b-1)
        d2K/dx_j dy_j = -2 b u^(b-1) - 4 b (b-1) diff_j^2 u^(b-2)

    leading axes of the inputs broadcast.
    """
    u = c**2 + np.sum(diff**2, axis=-1, keepdims=True)
    K = u**beta
    grad = 2. * beta * diff * u**(beta - 1.)
    mixed = -2. * beta * u**(beta - 1.) \
            - 4. * beta * (beta - 1.) * diff**2 * u**(beta - 2.)
    return s_x * s_y * K - s_x * grad + s_y * grad + mixed


def stein_kernel(x, y, score_x, score_y, c=1., beta=-0.5):
    """
    per-dimension Stein kernel k_j(x, y) built on the IMQ kernel

    Parameters
    ----------
    x, y : array-like of shape (d,)
    score_x, score_y : array-like of shape (d,)
        gradient of the log target at x and at y
    c : float, default: 1
    beta : float, default: -0.5

    Returns
    -------
    np.array of shape (d,)
    """
    x = np.asarray(x, dtype='float')
    y = np.asarray(y, dtype='float')
    return _stein_terms(x - y, np.asarray(score_x, dtype='float'),
                        np.asarray(score_y, dtype='float'), c, beta)


class KsdConfig(Core):
    """
    settings of the kernel Stein discrepancy

    Parameters
    ----------
    c : float, default: 1
        IMQ kernel offset, > 0
    beta : float, default: -0.5
        IMQ kernel exponent, in (-1, 0)
    gradient : {'exact', 'stochastic'}, default: 'exact'
        'exact' uses full-data scores, 'stochastic' unbiased estimates from
        uniform subsamples of batch_size
    batch_size : int, default: None
        required for 'stochastic'
    max_samples : int, default: 1000
        samples are thinned with an even stride to at most this many
    seed : int, default: None
        seed of the stochastic scores
    verbose : bool, default: True
        whether to warn when a per-dimension sum is clamped
    """
    def __init__(self, c=1., beta=-0.5, gradient='exact', batch_size=None,
                 max_samples=1000, seed=None, verbose=True):
        self.c = c
        self.beta = beta
        self.gradient = gradient
        self.batch_size = batch_size
        self.max_samples = max_samples
        self.seed = seed
        self.verbose = verbose
        super(KsdConfig, self).__init__(name='ksd')

    def _validate_params(self):
        self.c = check_param(self.c, param_name='c', dtype='float',
                             constraint='> 0')
        self.beta = check_param(self.beta, param_name='beta', dtype='float',
                                constraint=['> -1', '< 0'])
        self.max_samples = check_param(self.max_samples, param_name='max_samples',
                                       dtype='int', constraint='>= 2')
        if self.gradient not in ['exact', 'stochastic']:
            raise ValueError('gradient must be \'exact\' or \'stochastic\', '\
                             'but found {}'.format(repr(self.gradient)))
        if self.gradient == 'stochastic':
            self.batch_size = check_param(self.batch_size, param_name='batch_size',
                                          dtype='int', constraint='>= 1')


class KsdResult(Core):
    """
    kernel Stein discrepancy with its per-dimension terms

    Parameters
    ----------
    value : float
    per_dim : np.array of shape (d,)
        square roots of the per-dimension double sums
    clamped : bool
        whether any per-dimension sum was negative and set to 0
    n_samples : int
        number of samples after thinning
    """
    def __init__(self, value, per_dim, clamped, n_samples):
        self.value = value
        self.per_dim = per_dim
        self.clamped = clamped
        self.n_samples = n_samples
        super(KsdResult, self).__init__(name='ksd')

    def __float__(self):
        return float(self.value)


def _scores(samples, score, config):
    if isinstance(score, Model):
        if config.gradient == 'exact':
            return np.stack([score.score(s) for s in samples])
        rng = check_random_state(config.seed)
        n = min(config.batch_size, score.n_data)
        return np.stack([-estimate_gradient('naive', score, s, n=n,
                                            random_state=rng).vector
                         for s in samples])
    if not callable(score):
        raise ValueError('score must be a Model or a callable')
    return np.stack([np.atleast_1d(score(s)) for s in samples]).astype('float')


def ksd(samples, score, config=None, block_size=None):
    """
    kernel Stein discrepancy of samples against a target

        sum_j sqrt( sum_{k, k'} k_j(theta_k, theta_k') / K^2 )

    Parameters
    ----------
    samples : np.array of shape (K, d) or ChainTrace
    score : Model or callable
        a Model supplies the gradient of its log posterior. a callable maps a
        state of shape (d,) to the gradient of the log target
    config : KsdConfig, default: None
    block_size : int, default: None
        rows of the pair sum computed at once. chosen from K and d if None

    Returns
    -------
    KsdResult
    """
    config = KsdConfig() if config is None else config
    config._validate_params()
    samples = getattr(samples, 'samples', samples)
    samples = np.asarray(samples, dtype='float')
    if samples.ndim == 1:
        samples = samples[:, None]
    samples = check_array(samples, ndim=2, min_samples=1, name='samples')
    samples = samples[even_thin(len(samples), config.max_samples)]
    K, d = samples.shape

    S = _scores(samples, score, config)
    if S.shape != samples.shape or not np.isfinite(S).all():
        raise ValueError('score must be finite with shape {}'.format(samples.shape))

    if block_size is None:
        block_size = max(1, 2000000 // (K * d))
    totals = np.zeros(d)
    # blocks are reduced in a fixed order so results are reproducible
    for start in range(0, K, block_size):
        rows = slice(start, min(start + block_size, K))
        diff = samples[rows, None, :] - samples[None, :, :]
        terms = _stein_terms(diff, S[rows, None, :], S[None, :, :],
                             config.c, config.beta)
        totals += terms.sum(axis=(0, 1))
    totals /= K**2

    clamped = bool((totals < 0).any())
    if clamped:
        warn('negative per-dimension Stein sums {} clamped to 0'\
             .format(totals[totals < 0]), config.verbose)
    per_dim = np.sqrt(np.maximum(totals, 0.))
    return KsdResult(float(per_dim.sum()), per_dim, clamped, K)
