# -*- coding: utf-8 -*-

import pytest
import numpy as np

from pysgld.models import Dataset
from pysgld.models import LogisticModel
from pysgld.models import LinearModel
from pysgld.models import ModeInfo
from pysgld.datasets import generate_synthetic
from pysgld.utils import sigmoid


def make_logistic(n_data=50, n_features=4, seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    X = np.hstack([np.ones((n_data, 1)),
                   scale * rng.standard_normal((n_data, n_features))])
    coef = rng.standard_normal(n_features + 1)
    y = (rng.random(n_data) < sigmoid(X.dot(coef))).astype('float')
    return LogisticModel(Dataset(X, y), prior_cov=10. * np.eye(n_features + 1))


def make_linear(n_data=50, n_features=3, seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    X = np.hstack([np.ones((n_data, 1)),
                   scale * rng.standard_normal((n_data, n_features))])
    y = X.dot(rng.standard_normal(n_features + 1)) + rng.standard_normal(n_data)
    return LinearModel(Dataset(X, y), prior_cov=10. * np.eye(n_features + 1))


@pytest.fixture
def logistic_model():
    # N = 50, d = 5
    return make_logistic()

@pytest.fixture
def linear_model():
    # N = 50, d = 4
    return make_linear()

@pytest.fixture
def logistic_mode(logistic_model):
    # any anchor works for control variates; laplace needs the SPD information
    theta_hat = np.random.default_rng(1).normal(scale=0.1, size=5)
    return ModeInfo.from_model(logistic_model, theta_hat, laplace=True)

@pytest.fixture
def gaussian_model():
    # N = 1000 draws from the bivariate benchmark
    model, _, _ = generate_synthetic('gaussian', 1000, seed=0)
    return model

@pytest.fixture
def gaussian_mode(gaussian_model):
    mean, _ = gaussian_model.conjugate_posterior()
    return ModeInfo.from_model(gaussian_model, mean, laplace=True)

@pytest.fixture
def pm_one_model():
    # per-datum gradients (1, 0) and (-1, 0) at theta = 0
    X = np.array([[1., 0.], [1., 0.]])
    y = np.array([-1., 1.])
    return LinearModel(Dataset(X, y), prior_cov=np.eye(2))

