"""
synthetic benchmark data
"""

from __future__ import division, absolute_import

import numpy as np

from pysgld.models import Dataset
from pysgld.models import GaussianModel
from pysgld.models import LogisticModel
from pysgld.models import LinearModel
from pysgld.models import GAUSSIAN_TRUE_MEAN
from pysgld.models import GAUSSIAN_OBS_COV
from pysgld.models import gaussian_prior
from pysgld.utils import check_param
from pysgld.utils import check_random_state
from pysgld.utils import sigmoid


SYNTHETIC_KINDS = ['gaussian', 'logistic_balanced', 'logistic_imbalanced', 'linear']

POSITIVE_FRACTION = {'logistic_balanced': 0.5,
                     'logistic_imbalanced': 0.95}


def _intercept_shift(eta, u, n_positive, n_steps=200):
    """
    smallest intercept shift b such that #{u_i < sigmoid(eta_i + b)} >= n_positive

    the label count is non-decreasing in b, so bisection applies.
    """
    def count(b):
        return np.sum(u < sigmoid(eta + b))

    lo, hi = -1., 1.
    while count(lo) > n_positive:
        lo *= 2
    while count(hi) < n_positive:
        hi *= 2
    for _ in range(n_steps):
        mid = (lo + hi) / 2.
        if count(mid) >= n_positive:
            hi = mid
        else:
            lo = mid
    return hi


def _with_intercept(Z):
    return np.hstack([np.ones((len(Z), 1)), Z])


def _n_test(n_data):
    return max(1, int(np.floor(0.5 * n_data + 0.5)))


def _gaussian(n_data, rng, prior='flat'):
    L = np.linalg.cholesky(GAUSSIAN_OBS_COV)
    X = GAUSSIAN_TRUE_MEAN + rng.standard_normal((n_data, 2)).dot(L.T)
    train = Dataset(X, name='gaussian')
    prior_mean, prior_cov = gaussian_prior(prior)
    model = GaussianModel(train, obs_cov=GAUSSIAN_OBS_COV,
                          prior_mean=prior_mean, prior_cov=prior_cov)
    return model, train, None


def _logistic(kind, n_data, rng, n_features=4):
    frac = POSITIVE_FRACTION[kind]
    n_test = _n_test(n_data)
    n_total = n_data + n_test
    d = n_features + 1

    coef = rng.standard_normal(d)
    X = _with_intercept(rng.standard_normal((n_total, n_features)))
    u = rng.random(n_total)
    eta = X.dot(coef)

    # calibrate the intercept on the training rows only
    b = _intercept_shift(eta[:n_data], u[:n_data],
                         int(np.floor(frac * n_data + 0.5)))
    y = (u < sigmoid(eta + b)).astype('float')

    train = Dataset(X[:n_data], y[:n_data], name=kind)
    test = Dataset(X[n_data:], y[n_data:], name=kind + '_test')
    model = LogisticModel(train, prior_cov=10. * np.eye(d))
    return model, train, test


def _linear(n_data, rng, n_features=9):
    n_test = _n_test(n_data)
    n_total = n_data + n_test
    d = n_features + 1

    coef = rng.standard_normal(d)
    X = _with_intercept(rng.standard_normal((n_total, n_features)))
    y = X.dot(coef) + rng.standard_normal(n_total)

    train = Dataset(X[:n_data], y[:n_data], name='linear')
    test = Dataset(X[n_data:], y[n_data:], name='linear_test')
    model = LinearModel(train, prior_cov=10. * np.eye(d))
    return model, train, test


def generate_synthetic(kind, n_data, seed=None, **kwargs):
    """
    draw a synthetic benchmark dataset and its target posterior

    Parameters
    ----------
    kind : {'gaussian', 'logistic_balanced', 'logistic_imbalanced', 'linear'}
    n_data : int
        number of training observations N, at least 2
    seed : int or np.random.Generator, default: None
    **kwargs :
        'gaussian' accepts prior={'flat', 'informative'}.
        regression kinds accept n_features, the number of non-intercept
        columns (4 for logistic, 9 for linear by default).

    Returns
    -------
    model : Model
        posterior over the training data
    train : Dataset
    test : Dataset or None
        held out data of size round(N / 2); None for 'gaussian'

    Notes
    -----
    Gaussian observations are drawn from N((0, 1), [[1e5, 6e4], [6e4, 2e5]]).

    Logistic features are standard normal plus an intercept, coefficients are
    standard normal, and labels are y = 1{u < sigmoid(x^T beta + b)} with uniform u.
    The intercept shift b is chosen by bisection so that exactly round(f N)
    training labels are positive, with f = 0.5 (balanced) or 0.95 (imbalanced).
    """
    if kind not in SYNTHETIC_KINDS:
        raise ValueError('kind must be one of {}, but found {}'\
                         .format(SYNTHETIC_KINDS, repr(kind)))
    n_data = check_param(n_data, param_name='n_data', dtype='int',
                         constraint='>= 2')
    rng = check_random_state(seed)

    if kind == 'gaussian':
        return _gaussian(n_data, rng, **kwargs)
    if kind == 'linear':
        return _linear(n_data, rng, **kwargs)
    return _logistic(kind, n_data, rng, **kwargs)
