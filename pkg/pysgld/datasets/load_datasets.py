"""
dataset ingestion
"""
# -*- coding: utf-8 -*-

from __future__ import division, absolute_import
import logging

import numpy as np
import pandas as pd
from scipy import sparse

from pysgld.models import Dataset
from pysgld.utils import check_param
from pysgld.utils import check_random_state
from pysgld.utils import ParseError
from pysgld.utils import SchemaError


logger = logging.getLogger(__name__)

FORMATS = ['libsvm', 'csv']


def _binary_labels(y):
    """map raw class labels onto {0, 1}"""
    values = np.unique(y)
    if len(values) > 2:
        raise SchemaError('binary labels expected, but found {} distinct values'\
                          .format(len(values)))
    if set(values) <= {0., 1.}:
        return y
    if len(values) == 1:
        return (y > 0).astype('float')
    # {-1, 1}, {1, 2}, ... : smaller label is the negative class
    return (y == values.max()).astype('float')


def _with_intercept(X, intercept):
    if not intercept:
        return X
    return np.hstack([np.ones((len(X), 1)), X])


def load_libsvm(path, n_features=None, intercept=True, labels='binary'):
    """
    read a file in LIBSVM format

    every line reads ``label idx:val idx:val ...`` with 1-based sparse indices.

    Parameters
    ----------
    path : str or file-like
    n_features : int, default: None
        declared number of features. inferred from the largest index if None
    intercept : bool, default: True
        whether to prepend a column of ones
    labels : {'binary', 'real'}, default: 'binary'
        'binary' maps the two class labels onto {0, 1}

    Returns
    -------
    Dataset
    """
    if labels not in ['binary', 'real']:
        raise ValueError('labels must be \'binary\' or \'real\', but found {}'\
                         .format(repr(labels)))
    handle = open(path, 'r') if isinstance(path, str) else path

    y, rows, cols, vals = [], [], [], []
    try:
        for lineno, line in enumerate(handle, start=1):
            tokens = line.split()
            if not tokens:
                continue
            try:
                label = float(tokens[0])
            except ValueError:
                raise ParseError('bad label {}'.format(repr(tokens[0])), lineno)
            row = len(y)
            for token in tokens[1:]:
                idx, sep, val = token.partition(':')
                try:
                    idx, val = int(idx), float(val)
                except ValueError:
                    sep = ''
                if not sep or idx < 1:
                    raise ParseError('bad feature {}'.format(repr(token)), lineno)
                rows.append(row)
                cols.append(idx - 1)
                vals.append(val)
            y.append(label)
            if len(y) % 100000 == 0:
                logger.info('read %d rows from %s', len(y), path)
    finally:
        if isinstance(path, str):
            handle.close()

    max_index = max(cols) + 1 if cols else 0
    if n_features is None:
        n_features = max_index
    elif max_index > n_features:
        raise SchemaError('feature index {} exceeds the declared {} features'\
                          .format(max_index, n_features))

    X = sparse.coo_matrix((vals, (rows, cols)),
                          shape=(len(y), n_features)).toarray()
    y = np.array(y)
    if labels == 'binary':
        y = _binary_labels(y)
    logger.info('loaded %d rows and %d features from %s', len(y), n_features, path)
    return Dataset(_with_intercept(X, intercept), y, name=str(path))


def load_csv(path, response, intercept=True):
    """
    read a CSV file with a header row

    Parameters
    ----------
    path : str or file-like
    response : str
        name of the response column. every other column is a feature
    intercept : bool, default: True
        whether to prepend a column of ones

    Returns
    -------
    Dataset
    """
    frame = pd.read_csv(path)
    if response not in frame.columns:
        raise SchemaError('response column {} not found in {}'\
                          .format(repr(response), list(frame.columns)))
    features = frame.drop(columns=[response])
    try:
        X = features.values.astype('float')
        y = frame[response].values.astype('float')
    except ValueError:
        raise SchemaError('non-numeric values in {}'.format(path))
    logger.info('loaded %d rows and %d features from %s', len(y), X.shape[1], path)
    return Dataset(_with_intercept(X, intercept), y, name=str(path))


def load_dataset(path, fmt, response=None, n_features=None, intercept=True,
                 labels='binary', standardize=False):
    """
    read a dataset file

    Parameters
    ----------
    path : str or file-like
    fmt : {'libsvm', 'csv'}
    response : str, default: None
        response column, required for 'csv'
    n_features : int, default: None
        declared feature count of 'libsvm' files
    intercept : bool, default: True
    labels : {'binary', 'real'}, default: 'binary'
        label handling of 'libsvm' files
    standardize : bool, default: False
        whether to scale non-intercept columns to zero mean and unit variance

    Returns
    -------
    Dataset
    """
    if fmt not in FORMATS:
        raise ValueError('fmt must be one of {}, but found {}'\
                         .format(FORMATS, repr(fmt)))
    if fmt == 'libsvm':
        data = load_libsvm(path, n_features=n_features, intercept=intercept,
                           labels=labels)
    else:
        if response is None:
            raise ValueError('csv datasets require a response column')
        data = load_csv(path, response, intercept=intercept)
    if standardize:
        data = standardize_features(data, intercept=intercept)
    return data


def standardize_features(data, intercept=True):
    """
    scale feature columns to zero mean and unit variance

    constant columns, and the intercept if present, are left unchanged.

    Parameters
    ----------
    data : Dataset
    intercept : bool, default: True
        whether the first column is the intercept

    Returns
    -------
    Dataset
    """
    X = data.X.copy()
    start = 1 if intercept else 0
    mean = X[:, start:].mean(axis=0)
    std = X[:, start:].std(axis=0)
    scalable = std > 0
    cols = np.arange(start, X.shape[1])[scalable]
    X[:, cols] = (X[:, cols] - mean[scalable]) / std[scalable]
    return Dataset(X, data.y, name=data._name)


def split_train_test(data, train_fraction=0.75, seed=None):
    """
    deterministic shuffled split into disjoint train and test sets

    the train set has floor(train_fraction * N + 0.5) rows.

    Parameters
    ----------
    data : Dataset
    train_fraction : float in (0, 1), default: 0.75
    seed : int or np.random.Generator, default: None

    Returns
    -------
    train : Dataset
    test : Dataset
    """
    train_fraction = check_param(train_fraction, param_name='train_fraction',
                                 dtype='float', constraint=['> 0', '< 1'])
    N = data.n_data
    n_train = int(np.floor(train_fraction * N + 0.5))
    if n_train == 0 or n_train == N:
        raise ValueError('train_fraction {} leaves an empty partition of {} rows'\
                         .format(train_fraction, N))
    perm = check_random_state(seed).permutation(N)
    return data.subset(np.sort(perm[:n_train])), data.subset(np.sort(perm[n_train:]))
