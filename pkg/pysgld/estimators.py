"""
Stochastic gradient estimators and their pseudo-variance
"""

from __future__ import division, absolute_import
import itertools

import numpy as np

from pysgld.core import Core
from pysgld.subsampling import SubsampleDistribution
from pysgld.subsampling import sample_indices
from pysgld.utils import check_param
from pysgld.utils import check_random_state
from pysgld.utils import check_theta
from pysgld.utils import warn


ESTIMATORS = {'naive': 'uniform subsample scaled by N / n',
              'ps': 'weighted subsample, each term scaled by 1 / (n p_i)',
              'cv': 'control variate around the mode, uniform subsample',
              'cv_ps': 'control variate around the mode, weighted subsample',
              }

CV_KINDS = ['cv', 'cv_ps']


class GradientCache(object):
    """
    scratch store of the per-datum gradients at one theta

    an iteration that needs grad f_i(theta) both for exact weights and for
    the estimator computes them once through this object.

    Parameters
    ----------
    model : Model
    """
    def __init__(self, model):
        self.model = model
        self.theta_ = None
        self.grads_ = None
        self.n_evals_ = 0

    def grads(self, theta):
        """
        per-datum gradients at theta, recomputed only when theta changes

        Parameters
        ----------
        theta : np.array of shape (d,)

        Returns
        -------
        np.array of shape (N, d)
        """
        if self.theta_ is None or not np.array_equal(theta, self.theta_):
            self.grads_ = self.model.grads(theta)
            self.theta_ = np.array(theta, copy=True)
            self.n_evals_ += 1
        return self.grads_

    def clear(self):
        self.theta_ = None
        self.grads_ = None


class GradientEstimate(Core):
    """
    a stochastic gradient with the subsample that produced it

    Parameters
    ----------
    vector : np.array of shape (d,)
    indices : np.array of int
    kind : str
    batch_size : int
    """
    def __init__(self, vector, indices, kind, batch_size):
        self.vector = vector
        self.indices = indices
        self.kind = kind
        self.batch_size = batch_size
        super(GradientEstimate, self).__init__(name=kind)


def _validate_kind(kind, dist, mode):
    if kind not in ESTIMATORS:
        raise ValueError('estimator kind must be one of {}, but found {}'\
                         .format(sorted(ESTIMATORS), repr(kind)))
    if kind in CV_KINDS and mode is None:
        raise ValueError('estimator {} requires a ModeInfo'.format(repr(kind)))
    if kind in ['naive', 'cv'] and not dist.is_uniform:
        raise ValueError('estimator {} requires uniform weights, '\
                         'but found scheme {}'.format(repr(kind), repr(dist.scheme)))


def _as_dist(dist, model):
    if dist is None:
        return SubsampleDistribution.uniform(model.n_data)
    if dist.n_data != model.n_data:
        raise ValueError('distribution has {} weights but the model has {} data'\
                         .format(dist.n_data, model.n_data))
    return dist


def _reweight(terms, idx, dist, n):
    """
    subsample sum rescaled to be unbiased for the full-data sum.

    terms has the subsample on axis -2. uniform weights take the N / n path
    so that weighted kinds coincide with their uniform counterparts.
    """
    if dist.is_uniform:
        return (dist.n_data / n) * terms.sum(axis=-2)
    w = 1. / dist.probs[idx]
    return (w[..., None] * terms).sum(axis=-2) / n


def _anchor(kind, model, theta, mode):
    """part of the estimate that does not depend on the subsample"""
    if kind in CV_KINDS:
        return mode.grad_sum + (model.grad_prior(theta) - model.grad_prior(mode.mode))
    return model.grad_prior(theta)


def estimate_gradient(kind, model, theta, dist=None, n=1, mode=None,
                      random_state=None, indices=None, with_replacement=True,
                      cache=None):
    """
    stochastic estimate of the full gradient of the negative log posterior

        naive : grad f_0 + (N / n) sum_S grad f_i
        ps    : grad f_0 + (1 / n) sum_S grad f_i / p_i
        cv    : grad f(mode) + grad f_0 - grad f_0(mode)
                + (N / n) sum_S [grad f_i - grad f_i(mode)]
        cv_ps : as cv, with each bracket scaled by 1 / (n p_i)

    Parameters
    ----------
    kind : {'naive', 'ps', 'cv', 'cv_ps'}
    model : Model
    theta : array-like of shape (d,)
    dist : SubsampleDistribution, default: None
        uniform if None
    n : int, default: 1
        subsample size. ignored if indices are given
    mode : ModeInfo, default: None
        required for 'cv' and 'cv_ps'
    random_state : int or np.random.Generator, default: None
    indices : array-like of int, default: None
        use this subsample instead of drawing one
    with_replacement : bool, default: True
    cache : GradientCache, default: None
        reuse per-datum gradients already computed at theta

    Returns
    -------
    GradientEstimate
    """
    theta = check_theta(theta, model.n_params)
    dist = _as_dist(dist, model)
    _validate_kind(kind, dist, mode)

    if indices is None:
        indices = sample_indices(dist, n, with_replacement=with_replacement,
                                 random_state=random_state)
    else:
        indices = np.asarray(indices, dtype='int')
    n = len(indices)

    if cache is not None:
        terms = cache.grads(theta)[indices]
    else:
        terms = model.grads(theta, indices)
    if kind in CV_KINDS:
        terms = terms - mode.grads_at_mode[indices]

    vector = _anchor(kind, model, theta, mode) + _reweight(terms, indices, dist, n)
    return GradientEstimate(vector, indices, kind, n)


def draw_gradient_estimates(kind, model, theta, dist=None, n=1, n_reps=1,
                            mode=None, random_state=None, with_replacement=True,
                            max_block=1000000):
    """
    many independent estimates at a single theta

    per-datum gradients are computed once and indexed for every replication.

    Parameters
    ----------
    kind : {'naive', 'ps', 'cv', 'cv_ps'}
    model : Model
    theta : array-like of shape (d,)
    dist : SubsampleDistribution, default: None
    n : int, default: 1
    n_reps : int, default: 1
    mode : ModeInfo, default: None
    random_state : int or np.random.Generator, default: None
    with_replacement : bool, default: True
    max_block : int, default: 1000000
        maximum number of sampled indices held in memory at once

    Returns
    -------
    np.array of shape (n_reps, d)
    """
    theta = check_theta(theta, model.n_params)
    dist = _as_dist(dist, model)
    _validate_kind(kind, dist, mode)
    n = check_param(n, param_name='n', dtype='int', constraint='>= 1')
    n_reps = check_param(n_reps, param_name='n_reps', dtype='int', constraint='>= 1')
    rng = check_random_state(random_state)

    G = model.grads(theta)
    if kind in CV_KINDS:
        G = G - mode.grads_at_mode
    anchor = _anchor(kind, model, theta, mode)

    if not with_replacement and n > dist.n_data:
        raise ValueError('cannot draw {} distinct indices from {} data'\
                         .format(n, dist.n_data))

    out = np.empty((n_reps, model.n_params))
    block = max(1, max_block // n)
    for start in range(0, n_reps, block):
        stop = min(start + block, n_reps)
        if with_replacement:
            idx = dist.draw((stop - start) * n, rng).reshape(stop - start, n)
        else:
            idx = np.stack([sample_indices(dist, n, with_replacement=False,
                                           random_state=rng)
                            for _ in range(stop - start)])
        out[start:stop] = anchor + _reweight(G[idx], idx, dist, n)
    return out


def _pseudo_variance_terms(kind, model, theta, dist, mode):
    theta = check_theta(theta, model.n_params)
    dist = _as_dist(dist, model)
    _validate_kind(kind, dist, mode)
    G = model.grads(theta)
    if kind in CV_KINDS:
        G = G - mode.grads_at_mode
    return G, dist


def pseudo_variance_closed_form(kind, model, theta, dist=None, n=1, mode=None,
                                verbose=True):
    """
    exact trace of the covariance of an estimator

        (1 / n) [ sum_i ||a_i||^2 / p_i - ||sum_i a_i||^2 ]

    with a_i = grad f_i(theta) for 'naive'/'ps' and
    a_i = grad f_i(theta) - grad f_i(mode) for 'cv'/'cv_ps'.

    Parameters
    ----------
    kind : {'naive', 'ps', 'cv', 'cv_ps'}
    model : Model
    theta : array-like of shape (d,)
    dist : SubsampleDistribution, default: None
    n : int, default: 1
    mode : ModeInfo, default: None
    verbose : bool, default: True
        whether to warn when cancellation produced a clearly negative value

    Returns
    -------
    float, non-negative
    """
    n = check_param(n, param_name='n', dtype='int', constraint='>= 1')
    G, dist = _pseudo_variance_terms(kind, model, theta, dist, mode)
    first = np.sum(np.sum(G**2, axis=1) / dist.probs)
    total = G.sum(axis=0)
    value = (first - total.dot(total)) / n
    if value < 0:
        if value < -1e-10 * first:
            warn('closed form pseudo-variance is {:.3e} '\
                 'beyond rounding tolerance; clamping to 0'.format(value), verbose)
        value = 0.
    return float(value)


def pseudo_variance_empirical(kind, model, theta, dist=None, n=1, mode=None,
                              n_reps=1000, random_state=None,
                              with_replacement=True):
    """
    Monte Carlo estimate of E||g_hat - grad f(theta)||^2 over n_reps draws

    Parameters
    ----------
    kind : {'naive', 'ps', 'cv', 'cv_ps'}
    model : Model
    theta : array-like of shape (d,)
    dist : SubsampleDistribution, default: None
    n : int, default: 1
    mode : ModeInfo, default: None
    n_reps : int, default: 1000
    random_state : int or np.random.Generator, default: None
    with_replacement : bool, default: True

    Returns
    -------
    float
    """
    est = draw_gradient_estimates(kind, model, theta, dist=dist, n=n,
                                  n_reps=n_reps, mode=mode,
                                  random_state=random_state,
                                  with_replacement=with_replacement)
    if kind in CV_KINDS:
        # same reduction as ModeInfo.grad_sum, so the mode gives exactly 0
        exact = model.grad_prior(theta) + model.grads(theta).sum(axis=0)
    else:
        exact = model.full_grad(theta)
    return float(np.mean(np.sum((est - exact)**2, axis=1)))


def pseudo_variance_bound(model, theta, mode, dist=None, n=1):
    """
    upper bound on the control-variate pseudo-variance

        (1 / n) ||theta - mode||^2 sum_i L_i^2 / p_i

    Parameters
    ----------
    model : Model
    theta : array-like of shape (d,)
    mode : ModeInfo
    dist : SubsampleDistribution, default: None
    n : int, default: 1

    Returns
    -------
    float
    """
    theta = check_theta(theta, model.n_params)
    dist = _as_dist(dist, model)
    n = check_param(n, param_name='n', dtype='int', constraint='>= 1')
    sq_dist = np.sum((theta - mode.mode)**2)
    return float(sq_dist * dist.lipschitz_sum(model.lipschitz_constants()) / n)


def exact_pseudo_variance(kind, model, theta, dist=None, n=1, mode=None):
    """
    trace of the estimator covariance by enumeration of all N^n ordered
    with-replacement subsamples. only practical for tiny N and n.

    Parameters
    ----------
    kind : {'naive', 'ps', 'cv', 'cv_ps'}
    model : Model
    theta : array-like of shape (d,)
    dist : SubsampleDistribution, default: None
    n : int, default: 1
    mode : ModeInfo, default: None

    Returns
    -------
    float
    """
    theta = check_theta(theta, model.n_params)
    dist = _as_dist(dist, model)
    _validate_kind(kind, dist, mode)
    n = check_param(n, param_name='n', dtype='int', constraint='>= 1')

    outcomes = np.array(list(itertools.product(range(dist.n_data), repeat=n)))
    probs = np.prod(dist.probs[outcomes], axis=1)
    est = np.stack([estimate_gradient(kind, model, theta, dist, mode=mode,
                                      indices=idx).vector
                    for idx in outcomes])
    mean = probs.dot(est)
    return float(probs.dot(np.sum((est - mean)**2, axis=1)))
