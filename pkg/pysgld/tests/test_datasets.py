# -*- coding: utf-8 -*-

import io

import numpy as np
import pytest

from pysgld.datasets import generate_synthetic
from pysgld.datasets import load_libsvm
from pysgld.datasets import load_csv
from pysgld.datasets import load_dataset
from pysgld.datasets import standardize_features
from pysgld.datasets import split_train_test
from pysgld.datasets import SYNTHETIC_KINDS
from pysgld.models import Dataset
from pysgld.models import GaussianModel
from pysgld.models import LogisticModel
from pysgld.models import LinearModel
from pysgld.utils import ParseError
from pysgld.utils import SchemaError


def test_synthetic_gaussian_mean():
    """the sample mean is within 5 standard errors of (0, 1)"""
    model, train, test = generate_synthetic('gaussian', 1000, seed=0)
    assert(isinstance(model, GaussianModel))
    assert(test is None)
    assert(train.X.shape == (1000, 2))

    se = np.sqrt(np.diag(model.obs_cov) / 1000)
    assert((np.abs(train.X.mean(axis=0) - [0., 1.]) < 5 * se).all())

def test_synthetic_gaussian_prior_preset():
    model, _, _ = generate_synthetic('gaussian', 10, seed=0, prior='informative')
    assert(np.array_equal(model.prior_cov, np.diag([1e3, 2.])))

def test_synthetic_logistic_balanced():
    """half of the training labels are positive"""
    model, train, test = generate_synthetic('logistic_balanced', 10000, seed=1)
    assert(isinstance(model, LogisticModel))
    assert(model.n_params == 5)
    assert(0.48 <= train.y.mean() <= 0.52)
    assert(test.n_data == 5000)
    assert(np.array_equal(train.X[:, 0], np.ones(10000)))

def test_synthetic_logistic_imbalanced():
    """95% of the training labels are positive"""
    _, train, test = generate_synthetic('logistic_imbalanced', 1000, seed=2)
    assert(0.93 <= train.y.mean() <= 0.97)
    assert(test.n_data == 500)

def test_synthetic_linear():
    model, train, test = generate_synthetic('linear', 101, seed=3)
    assert(isinstance(model, LinearModel))
    assert(model.n_params == 10)
    assert(test.n_data == 51)

def test_synthetic_is_deterministic():
    """the same seed gives the same data for every kind"""
    for kind in SYNTHETIC_KINDS:
        _, a, _ = generate_synthetic(kind, 50, seed=4)
        _, b, _ = generate_synthetic(kind, 50, seed=4)
        assert(np.array_equal(a.X, b.X))
        if a.y is not None:
            assert(np.array_equal(a.y, b.y))

def test_synthetic_bad_inputs():
    with pytest.raises(ValueError):
        generate_synthetic('poisson', 100)
    with pytest.raises(ValueError):
        generate_synthetic('gaussian', 1)

def test_load_libsvm_line():
    """'1 1:0.5 3:-2' with 3 declared features"""
    data = load_libsvm(io.StringIO('1 1:0.5 3:-2\n'), n_features=3)
    assert(np.array_equal(data.X, [[1., 0.5, 0., -2.]]))
    assert(np.array_equal(data.y, [1.]))

def test_load_libsvm_maps_labels():
    """class labels {1, 2} become {0, 1}; blank lines are skipped"""
    text = '2 1:1\n\n1 2:1\n2 1:3 2:4\n'
    data = load_libsvm(io.StringIO(text), intercept=False)
    assert(np.array_equal(data.y, [1., 0., 1.]))
    assert(np.array_equal(data.X, [[1., 0.], [0., 1.], [3., 4.]]))

    data = load_libsvm(io.StringIO('-1 1:1\n1 1:2\n'), labels='real')
    assert(np.array_equal(data.y, [-1., 1.]))

def test_load_libsvm_parse_error():
    """malformed lines report their line number"""
    with pytest.raises(ParseError) as excinfo:
        load_libsvm(io.StringIO('1 1:0.5\n0 2-0.5\n'))
    assert(excinfo.value.lineno == 2)

    with pytest.raises(ParseError):
        load_libsvm(io.StringIO('yes 1:0.5\n'))
    with pytest.raises(ParseError):
        load_libsvm(io.StringIO('1 0:0.5\n'))

def test_load_libsvm_schema_error():
    """indices beyond the declared feature count are rejected"""
    with pytest.raises(SchemaError):
        load_libsvm(io.StringIO('1 1:0.5 4:1\n'), n_features=3)
    with pytest.raises(SchemaError):
        load_libsvm(io.StringIO('1 1:1\n2 1:1\n3 1:1\n'))

def test_load_libsvm_file(tmp_path):
    path = tmp_path / 'toy.libsvm'
    path.write_text(u'1 1:0.5\n0 2:1.5\n')
    data = load_dataset(str(path), 'libsvm', n_features=2)
    assert(data.X.shape == (2, 3))

def test_load_csv():
    """'y,a,b / 3,1,2' gives y = 3 and x = (1, 1, 2)"""
    data = load_csv(io.StringIO(u'y,a,b\n3,1,2\n'), response='y')
    assert(np.array_equal(data.X, [[1., 1., 2.]]))
    assert(np.array_equal(data.y, [3.]))

def test_load_csv_schema_errors():
    with pytest.raises(SchemaError):
        load_csv(io.StringIO(u'y,a\n1,2\n'), response='RMSD')
    with pytest.raises(SchemaError):
        load_csv(io.StringIO(u'y,a\n1,x\n'), response='y')

def test_load_dataset_validates_format():
    with pytest.raises(ValueError):
        load_dataset(io.StringIO(u''), 'arff')
    with pytest.raises(ValueError):
        load_dataset(io.StringIO(u'y,a\n1,2\n'), 'csv')

def test_standardize_features():
    """columns get zero mean and unit variance; intercept and constants stay"""
    rng = np.random.default_rng(0)
    X = np.hstack([np.ones((100, 1)), 3 + 2 * rng.standard_normal((100, 2)),
                   np.full((100, 1), 7.)])
    data = standardize_features(Dataset(X, np.zeros(100)))
    assert(np.array_equal(data.X[:, 0], np.ones(100)))
    assert(np.allclose(data.X[:, 1:3].mean(axis=0), 0.))
    assert(np.allclose(data.X[:, 1:3].std(axis=0), 1.))
    assert(np.array_equal(data.X[:, 3], np.full(100, 7.)))

def test_split_train_test_sizes():
    """N = 100 and fraction 0.75 give 75 and 25 disjoint rows"""
    data = Dataset(np.arange(100.)[:, None], np.arange(100.))
    train, test = split_train_test(data, 0.75, seed=0)
    assert((train.n_data, test.n_data) == (75, 25))
    rows = np.concatenate([train.y, test.y])
    assert(np.array_equal(np.sort(rows), np.arange(100.)))

def test_split_train_test_half_up_rounding():
    """train size is floor(f N + 0.5)"""
    data = Dataset(np.arange(581012.)[:, None])
    train, test = split_train_test(data, 0.75, seed=0)
    assert((train.n_data, test.n_data) == (435759, 145253))

def test_split_train_test_deterministic():
    data = Dataset(np.arange(50.)[:, None], np.arange(50.))
    a, _ = split_train_test(data, 0.5, seed=3)
    b, _ = split_train_test(data, 0.5, seed=3)
    assert(np.array_equal(a.y, b.y))

def test_split_train_test_empty_partition():
    data = Dataset(np.arange(2.)[:, None])
    with pytest.raises(ValueError):
        split_train_test(data, 0.1)
    with pytest.raises(ValueError):
        split_train_test(data, 1.)
