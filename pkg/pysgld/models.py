"""
Target posteriors
"""

from __future__ import division, absolute_import
from abc import ABCMeta
from abc import abstractmethod

import numpy as np

from pysgld.core import Core
from pysgld.utils import check_array
from pysgld.utils import check_theta
from pysgld.utils import check_random_state
from pysgld.utils import cholesky
from pysgld.utils import spd_inverse
from pysgld.utils import sigmoid
from pysgld.utils import log1pexp
from pysgld.utils import UnsupportedModelError


def _rowdot(X, theta):
    """
    row-wise inner products X @ theta.

    each row is reduced on its own, so the result for a row does not depend
    on which other rows are present.
    """
    return np.sum(X * theta, axis=1)


class Dataset(Core):
    """
    observations for a target posterior

    Parameters
    ----------
    X : array-like of shape (n_data, n_features)
        features. for regression models the first column is the intercept.
        for the Gaussian model these are the observations themselves.
    y : array-like of shape (n_data,) or None, default: None
        responses
    name : str, default: None
    allow_empty : bool, default: False
        whether a dataset with no rows is acceptable
    """
    def __init__(self, X, y=None, name=None, allow_empty=False):
        min_samples = 0 if allow_empty else 1
        X = np.asarray(X, dtype='float')
        if X.ndim == 1:
            X = X[:, None]
        self.X = check_array(X, ndim=2, min_samples=min_samples, name='features')
        if y is not None:
            y = check_array(np.ravel(y), ndim=1, min_samples=min_samples,
                            name='responses')
            if len(y) != len(self.X):
                raise ValueError('Inconsistent features and responses. '\
                                 'found X: {} and y: {}'.format(self.X.shape, y.shape))
        self.y = y
        super(Dataset, self).__init__(name=name)

    @property
    def n_data(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def __len__(self):
        return self.n_data

    def subset(self, idx):
        """
        dataset restricted to the rows in idx

        Parameters
        ----------
        idx : array-like of int or bool

        Returns
        -------
        Dataset
        """
        y = None if self.y is None else self.y[idx]
        return Dataset(self.X[idx], y, name=self._name, allow_empty=True)


class Model(Core):
    __metaclass__ = ABCMeta
    """
    base target posterior

    the negative log posterior is written as
        f(theta) = f_0(theta) + sum_i f_i(theta)
    with a Gaussian prior term f_0 and one term per datum.
    """
    kind = None

    def __init__(self, data, prior_mean=None, prior_cov=None, name=None,
                 verbose=False):
        """
        creates an instance of the Model class

        Parameters
        ----------
        data : Dataset
        prior_mean : array-like of shape (d,), default: None
            defaults to zeros
        prior_cov : array-like of shape (d, d), default: None
            must be symmetric positive definite.
            defaults to 10 * I
        name : str, default: None
        verbose : bool, default: False
            whether to show pysgld warnings

        Returns
        -------
        self
        """
        if not isinstance(data, Dataset):
            raise TypeError('data must be a Dataset, but found {}'\
                            .format(data.__class__))
        self.data = data
        d = data.n_features
        if prior_mean is None:
            prior_mean = np.zeros(d)
        if prior_cov is None:
            prior_cov = 10. * np.eye(d)
        self.prior_mean = check_theta(prior_mean, d, name='prior_mean')
        self.prior_cov = np.asarray(prior_cov, dtype='float')
        if self.prior_cov.shape != (d, d):
            raise ValueError('prior_cov must have shape ({0}, {0}), but found {1}'\
                             .format(d, self.prior_cov.shape))
        self.verbose = verbose
        self._prior_precision = spd_inverse(self.prior_cov, name='prior_cov')
        self._lipschitz = None
        super(Model, self).__init__(name=name if name is not None else self.kind)

    @property
    def n_params(self):
        """model dimension d"""
        return self.data.n_features

    @property
    def n_data(self):
        """number of data N"""
        return self.data.n_data

    def _check_index(self, i):
        if not (0 <= i < self.n_data):
            raise IndexError('datum index must be in [0, {}), but found {}'\
                             .format(self.n_data, i))
        return int(i)

    def _check_indices(self, idx):
        if idx is None:
            return slice(None)
        idx = np.asarray(idx, dtype='int')
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_data):
            raise IndexError('datum indices must be in [0, {})'.format(self.n_data))
        return idx

    def grad_prior(self, theta):
        """
        gradient of the negative log prior

        Parameters
        ----------
        theta : array-like of shape (d,)

        Returns
        -------
        np.array of shape (d,) equal to prior_cov^-1 (theta - prior_mean)
        """
        theta = check_theta(theta, self.n_params)
        return self._prior_precision.dot(theta - self.prior_mean)

    def hessian_prior(self):
        """Hessian of the negative log prior, ie the prior precision"""
        return self._prior_precision.copy()

    def neg_log_prior(self, theta):
        """negative log prior up to an additive constant"""
        diff = check_theta(theta, self.n_params) - self.prior_mean
        return 0.5 * diff.dot(self._prior_precision).dot(diff)

    @abstractmethod
    def grads(self, theta, idx=None):
        """
        per-datum gradients of f_i

        Parameters
        ----------
        theta : array-like of shape (d,)
        idx : array-like of int, default: None
            datum indices. all data if None

        Returns
        -------
        np.array of shape (len(idx), d)
        """
        pass

    @abstractmethod
    def hessians(self, theta, idx=None):
        """
        per-datum Hessians of f_i

        Parameters
        ----------
        theta : array-like of shape (d,)
        idx : array-like of int, default: None

        Returns
        -------
        np.array of shape (len(idx), d, d)
        """
        pass

    @abstractmethod
    def lipschitz_constants(self):
        """
        gradient Lipschitz constants L_i of every f_i

        Returns
        -------
        np.array of shape (N,)
        """
        pass

    @abstractmethod
    def neg_log_likelihood(self, theta):
        """sum_i f_i(theta) up to an additive constant"""
        pass

    def grad_datum(self, theta, i):
        """
        gradient of a single f_i

        Parameters
        ----------
        theta : array-like of shape (d,)
        i : int
            0-based datum index

        Returns
        -------
        np.array of shape (d,)
        """
        return self.grads(theta, [self._check_index(i)])[0]

    def hessian_datum(self, theta, i):
        """
        Hessian of a single f_i

        Parameters
        ----------
        theta : array-like of shape (d,)
        i : int
            0-based datum index

        Returns
        -------
        np.array of shape (d, d), symmetric positive semidefinite
        """
        return self.hessians(theta, [self._check_index(i)])[0]

    def lipschitz_constant(self, i):
        """
        gradient Lipschitz constant of a single f_i

        Parameters
        ----------
        i : int
            0-based datum index

        Returns
        -------
        float
        """
        return float(self.lipschitz_constants()[self._check_index(i)])

    def full_grad(self, theta):
        """
        exact gradient of the negative log posterior
            grad f_0(theta) + sum_i grad f_i(theta)

        Parameters
        ----------
        theta : array-like of shape (d,)

        Returns
        -------
        np.array of shape (d,)
        """
        return self.grad_prior(theta) + self.grads(theta).sum(axis=0)

    def neg_log_posterior(self, theta):
        """negative log posterior up to an additive constant"""
        return self.neg_log_prior(theta) + self.neg_log_likelihood(theta)

    def score(self, theta):
        """gradient of the log posterior, ie -full_grad"""
        return -self.full_grad(theta)

    def information(self, theta):
        """
        Hessian of the negative log posterior
            prior precision + sum_i Hessian of f_i

        Parameters
        ----------
        theta : array-like of shape (d,)

        Returns
        -------
        np.array of shape (d, d)
        """
        return self._prior_precision + self.hessians(theta).sum(axis=0)

    def hessian_norms(self, theta, factor, chunk_size=2048):
        """
        Frobenius norms ||H_i C|| for every datum, where H_i is the Hessian of f_i
        at theta and C a square matrix, usually a Cholesky factor of a covariance.

        since C C^T = S, ||H_i C||^2 = tr(H_i S H_i^T).

        Parameters
        ----------
        theta : array-like of shape (d,)
        factor : np.array of shape (d, d)
        chunk_size : int, default: 2048
            number of Hessians held in memory at once

        Returns
        -------
        np.array of shape (N,)
        """
        out = np.empty(self.n_data)
        for start in range(0, self.n_data, chunk_size):
            idx = np.arange(start, min(start + chunk_size, self.n_data))
            HC = np.matmul(self.hessians(theta, idx), factor)
            out[idx] = np.sqrt(np.sum(HC**2, axis=(1, 2)))
        return out

    def laplace_covariance(self, theta_hat):
        """
        covariance of the Gaussian approximation to the posterior at theta_hat,
        the inverse of the negative log posterior Hessian.

        theta_hat is assumed to be a stationary point.

        Parameters
        ----------
        theta_hat : array-like of shape (d,)

        Returns
        -------
        np.array of shape (d, d), symmetric positive definite

        Raises
        ------
        NotPositiveDefiniteError if the information matrix is singular
        """
        theta_hat = check_theta(theta_hat, self.n_params, name='theta_hat')
        info = self.information(theta_hat)
        info = (info + info.T) / 2.
        return spd_inverse(info, name='information matrix')

    def conjugate_posterior(self):
        """
        analytic posterior mean and covariance

        Raises
        ------
        UnsupportedModelError for models without a conjugate posterior
        """
        raise UnsupportedModelError('{} model has no conjugate posterior'\
                                    .format(self.kind))

    def initial_theta(self, random_state=None):
        """
        default chain initialisation: zeros

        Parameters
        ----------
        random_state : int or np.random.Generator, default: None
            unused for regression models

        Returns
        -------
        np.array of shape (d,)
        """
        return np.zeros(self.n_params)


class GaussianModel(Model):
    """
    Gaussian observations with unknown mean and known covariance

        x_i | theta ~ N(theta, obs_cov)

    Parameters
    ----------
    data : Dataset
        observations as rows of data.X
    obs_cov : array-like of shape (d, d)
        known observation covariance, symmetric positive definite
    prior_mean : array-like of shape (d,), default: None
    prior_cov : array-like of shape (d, d), default: None
    """
    kind = 'gaussian'

    def __init__(self, data, obs_cov, prior_mean=None, prior_cov=None,
                 name=None, verbose=False):
        super(GaussianModel, self).__init__(data, prior_mean=prior_mean,
                                            prior_cov=prior_cov, name=name,
                                            verbose=verbose)
        d = self.n_params
        self.obs_cov = np.asarray(obs_cov, dtype='float')
        if self.obs_cov.shape != (d, d):
            raise ValueError('obs_cov must have shape ({0}, {0}), but found {1}'\
                             .format(d, self.obs_cov.shape))
        self._obs_precision = spd_inverse(self.obs_cov, name='obs_cov')

    def grads(self, theta, idx=None):
        theta = check_theta(theta, self.n_params)
        diff = theta - self.data.X[self._check_indices(idx)]
        # obs precision is symmetric, so each row is P (theta - x_i)
        return np.sum(diff[:, None, :] * self._obs_precision[None, :, :], axis=2)

    def hessians(self, theta, idx=None):
        check_theta(theta, self.n_params)
        n = len(self.data.X[self._check_indices(idx)])
        return np.broadcast_to(self._obs_precision,
                               (n, self.n_params, self.n_params)).copy()

    def information(self, theta):
        check_theta(theta, self.n_params)
        return self._prior_precision + self.n_data * self._obs_precision

    def hessian_norms(self, theta, factor, chunk_size=2048):
        # every datum shares the same Hessian
        norm = np.sqrt(np.sum(self._obs_precision.dot(factor)**2))
        return np.full(self.n_data, norm)

    def lipschitz_constants(self):
        if self._lipschitz is None:
            L = np.max(np.linalg.eigvalsh(self._obs_precision))
            self._lipschitz = np.full(self.n_data, L)
        return self._lipschitz

    def neg_log_likelihood(self, theta):
        theta = check_theta(theta, self.n_params)
        diff = self.data.X - theta
        return 0.5 * np.sum(diff.dot(self._obs_precision) * diff)

    def conjugate_posterior(self):
        """
        analytic posterior of the Gaussian mean

            cov^-1 = prior_cov^-1 + N obs_cov^-1
            mean   = cov (prior_cov^-1 prior_mean + N obs_cov^-1 xbar)

        with no data the posterior is the prior.

        Returns
        -------
        mean : np.array of shape (d,)
        cov : np.array of shape (d, d)
        """
        N = self.n_data
        if N == 0:
            return self.prior_mean.copy(), self.prior_cov.copy()
        xbar = self.data.X.mean(axis=0)
        precision = self._prior_precision + N * self._obs_precision
        cov = spd_inverse(precision, name='posterior precision')
        mean = cov.dot(self._prior_precision.dot(self.prior_mean)
                       + N * self._obs_precision.dot(xbar))
        return mean, cov

    def initial_theta(self, random_state=None):
        """
        draw the chain initialisation from the prior

        Parameters
        ----------
        random_state : int or np.random.Generator, default: None

        Returns
        -------
        np.array of shape (d,)
        """
        rng = check_random_state(random_state)
        L = cholesky(self.prior_cov, name='prior_cov')
        return self.prior_mean + L.dot(rng.standard_normal(self.n_params))


class LogisticModel(Model):
    """
    binary logistic regression

        p(y_i = 1 | x_i, theta) = sigmoid(theta^T x_i)

    Parameters
    ----------
    data : Dataset
        features with an intercept column and responses in {0, 1}
    prior_mean : array-like of shape (d,), default: None
    prior_cov : array-like of shape (d, d), default: None
    """
    kind = 'logistic'

    def __init__(self, data, prior_mean=None, prior_cov=None, name=None,
                 verbose=False):
        super(LogisticModel, self).__init__(data, prior_mean=prior_mean,
                                            prior_cov=prior_cov, name=name,
                                            verbose=verbose)
        if data.y is None:
            raise ValueError('logistic regression requires responses')
        if not np.isin(data.y, [0., 1.]).all():
            raise ValueError('logistic responses must be in {0, 1}')

    def grads(self, theta, idx=None):
        theta = check_theta(theta, self.n_params)
        idx = self._check_indices(idx)
        X = self.data.X[idx]
        resid = sigmoid(_rowdot(X, theta)) - self.data.y[idx]
        return resid[:, None] * X

    def hessians(self, theta, idx=None):
        theta = check_theta(theta, self.n_params)
        X = self.data.X[self._check_indices(idx)]
        mu = sigmoid(_rowdot(X, theta))
        w = mu * (1. - mu)
        return w[:, None, None] * X[:, :, None] * X[:, None, :]

    def information(self, theta):
        theta = check_theta(theta, self.n_params)
        X = self.data.X
        mu = sigmoid(_rowdot(X, theta))
        return self._prior_precision + X.T.dot((mu * (1. - mu))[:, None] * X)

    def hessian_norms(self, theta, factor, chunk_size=None):
        # rank one Hessians: ||w x x^T C|| = w ||x|| ||C^T x||
        theta = check_theta(theta, self.n_params)
        X = self.data.X
        mu = sigmoid(_rowdot(X, theta))
        w = mu * (1. - mu)
        return w * np.linalg.norm(X, axis=1) * np.linalg.norm(X.dot(factor), axis=1)

    def lipschitz_constants(self):
        if self._lipschitz is None:
            self._lipschitz = 0.25 * np.sum(self.data.X**2, axis=1)
        return self._lipschitz

    def neg_log_likelihood(self, theta):
        theta = check_theta(theta, self.n_params)
        z = self.data.X.dot(theta)
        return np.sum(log1pexp(z) - self.data.y * z)


class LinearModel(Model):
    """
    linear regression with unit noise variance

        y_i = theta^T x_i + eta_i,  eta_i ~ N(0, 1)

    Parameters
    ----------
    data : Dataset
        features with an intercept column and real responses
    prior_mean : array-like of shape (d,), default: None
    prior_cov : array-like of shape (d, d), default: None
    """
    kind = 'linear'

    def __init__(self, data, prior_mean=None, prior_cov=None, name=None,
                 verbose=False):
        super(LinearModel, self).__init__(data, prior_mean=prior_mean,
                                          prior_cov=prior_cov, name=name,
                                          verbose=verbose)
        if data.y is None:
            raise ValueError('linear regression requires responses')

    def grads(self, theta, idx=None):
        theta = check_theta(theta, self.n_params)
        idx = self._check_indices(idx)
        X = self.data.X[idx]
        resid = self.data.y[idx] - _rowdot(X, theta)
        return -resid[:, None] * X

    def hessians(self, theta, idx=None):
        check_theta(theta, self.n_params)
        X = self.data.X[self._check_indices(idx)]
        return X[:, :, None] * X[:, None, :]

    def information(self, theta):
        check_theta(theta, self.n_params)
        X = self.data.X
        return self._prior_precision + X.T.dot(X)

    def hessian_norms(self, theta, factor, chunk_size=None):
        check_theta(theta, self.n_params)
        X = self.data.X
        return np.linalg.norm(X, axis=1) * np.linalg.norm(X.dot(factor), axis=1)

    def lipschitz_constants(self):
        if self._lipschitz is None:
            self._lipschitz = np.sum(self.data.X**2, axis=1)
        return self._lipschitz

    def neg_log_likelihood(self, theta):
        theta = check_theta(theta, self.n_params)
        resid = self.data.y - self.data.X.dot(theta)
        return 0.5 * np.sum(resid**2)


class ModeInfo(Core):
    """
    posterior mode with the cached per-datum gradients used by control variates

    Parameters
    ----------
    mode : np.array of shape (d,)
    grads_at_mode : np.array of shape (N, d)
        per-datum gradients at the mode
    grad_sum : np.array of shape (d,)
        full gradient at the mode, including the prior term
    laplace_cov : np.array of shape (d, d) or None, default: None
        covariance of the Laplace approximation at the mode
    """
    def __init__(self, mode, grads_at_mode, grad_sum, laplace_cov=None):
        self.mode = np.asarray(mode, dtype='float')
        self.grads_at_mode = np.asarray(grads_at_mode, dtype='float')
        self.grad_sum = np.asarray(grad_sum, dtype='float')
        self.laplace_cov = laplace_cov
        super(ModeInfo, self).__init__(name='mode')

    @classmethod
    def from_model(cls, model, theta_hat, laplace=False):
        """
        cache everything control-variate estimators need, in one O(N) pass

        Parameters
        ----------
        model : Model
        theta_hat : array-like of shape (d,)
        laplace : bool, default: False
            whether to also compute the Laplace covariance

        Returns
        -------
        ModeInfo
        """
        theta_hat = check_theta(theta_hat, model.n_params, name='theta_hat')
        grads = model.grads(theta_hat)
        grad_sum = model.grad_prior(theta_hat) + grads.sum(axis=0)
        cov = model.laplace_covariance(theta_hat) if laplace else None
        return cls(theta_hat, grads, grad_sum, laplace_cov=cov)

    @property
    def n_data(self):
        return self.grads_at_mode.shape[0]

    @property
    def n_params(self):
        return self.mode.shape[0]

    def with_laplace(self, model):
        """
        return a copy with the Laplace covariance populated

        Parameters
        ----------
        model : Model

        Returns
        -------
        ModeInfo
        """
        return ModeInfo(self.mode, self.grads_at_mode, self.grad_sum,
                        laplace_cov=model.laplace_covariance(self.mode))

    def sample_laplace(self, n_draws, random_state=None):
        """
        draw from the Laplace approximation N(mode, laplace_cov)

        Parameters
        ----------
        n_draws : int
        random_state : int or np.random.Generator, default: None

        Returns
        -------
        np.array of shape (n_draws, d)
        """
        if self.laplace_cov is None:
            raise ValueError('laplace_cov is not populated. '\
                             'Use ModeInfo.from_model(..., laplace=True)')
        rng = check_random_state(random_state)
        L = cholesky(self.laplace_cov, name='laplace_cov')
        return self.mode + rng.standard_normal((n_draws, self.n_params)).dot(L.T)


GAUSSIAN_TRUE_MEAN = np.array([0., 1.])
GAUSSIAN_OBS_COV = np.array([[1e5, 6e4],
                             [6e4, 2e5]])

def gaussian_prior(preset='flat'):
    """
    prior hyperparameters for the bivariate Gaussian benchmark

    Parameters
    ----------
    preset : {'flat', 'informative'}, default: 'flat'
        'flat' gives prior_cov = diag(1e3, 1e3),
        'informative' gives prior_cov = diag(1e3, 2)

    Returns
    -------
    prior_mean : np.array of shape (2,)
    prior_cov : np.array of shape (2, 2)
    """
    presets = {'flat': [1e3, 1e3],
               'informative': [1e3, 2.]}
    if preset not in presets:
        raise ValueError('preset must be one of {}, but found {}'\
                         .format(sorted(presets), repr(preset)))
    return np.zeros(2), np.diag(presets[preset])


MODELS = {'gaussian': GaussianModel,
          'logistic': LogisticModel,
          'linear': LinearModel,
          }
