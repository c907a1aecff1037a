"""
pysgld utilities
"""

from __future__ import division
import numbers
import operator
import re
import warnings

import numpy as np
import scipy as sp
from scipy import linalg
from scipy import special
from numpy.linalg import LinAlgError


class NotPositiveDefiniteError(ValueError):
    """Exception class to raise if a matrix is not positive definite
    """

class DivergenceError(ValueError):
    """Exception class to raise if a chain or an optimizer produces
    non-finite values

    Parameters
    ----------
    msg : str
    step : int or None
        iteration at which the non-finite value appeared
    """
    def __init__(self, msg, step=None):
        super(DivergenceError, self).__init__(msg)
        self.step = step

class UnsupportedModelError(ValueError):
    """Exception class to raise if an operation is not defined for a model
    """

class DimensionGuardError(ValueError):
    """Exception class to raise if a weight scheme is too expensive
    for the model dimension
    """

class ParseError(ValueError):
    """Exception class to raise on a malformed line in a data file

    Parameters
    ----------
    msg : str
    lineno : int
        1-based line number in the file
    """
    def __init__(self, msg, lineno=None):
        if lineno is not None:
            msg = 'line {}: {}'.format(lineno, msg)
        super(ParseError, self).__init__(msg)
        self.lineno = lineno

class SchemaError(ValueError):
    """Exception class to raise if data columns or dimensions are inconsistent
    """

class ConfigError(ValueError):
    """Exception class to raise on an invalid experiment configuration
    """


def check_random_state(seed):
    """
    turn a seed into a numpy Generator

    Parameters
    ----------
    seed : None, int, np.random.SeedSequence or np.random.Generator

    Returns
    -------
    np.random.Generator
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise ValueError('seed must be None, an int or a numpy Generator, '\
                     'but found {}'.format(repr(seed)))


def check_array(array, ndim=None, n_feats=None, min_samples=1,
                name='Input data'):
    """
    tool to perform basic data validation.

    ensures that data:
    - is ndim dimensional
    - contains float-compatible data-types
    - has at least min_samples
    - has n_feats
    - is finite

    Parameters
    ----------
    array : array-like
    ndim : int default: None
        number of dimensions expected in the array
    n_feats : int, default: None
        number of columns the array should have.
        not enforced if n_feats is None.
    min_samples : int, default: 1
    name : str, default: 'Input data'
        name to use when referring to the array

    Returns
    -------
    array : validated float array
    """
    array = np.asarray(array)

    # cast to float
    if array.dtype.kind != 'f':
        try:
            array = array.astype('float')
        except (ValueError, TypeError):
            raise ValueError('{} must be type int or float, '\
                             'but found type: {}'.format(name, array.dtype.type))

    if not np.isfinite(array).all():
        raise ValueError('{} must not contain Inf nor NaN'.format(name))

    if ndim is not None and array.ndim != ndim:
        raise ValueError('{} must have {} dimensions. '\
                         'found shape {}'.format(name, ndim, array.shape))

    if n_feats is not None and array.shape[1] != n_feats:
        raise ValueError('{} must have {} features, '\
                         'but found {}'.format(name, n_feats, array.shape[1]))

    n = array.shape[0] if array.ndim > 0 else 1
    if n < min_samples:
        raise ValueError('{} should have at least {} samples, '\
                         'but found {}'.format(name, min_samples, n))
    return array


def check_theta(theta, n_params, name='theta'):
    """
    validate a parameter vector

    Parameters
    ----------
    theta : array-like of length n_params
    n_params : int
        model dimension d

    Returns
    -------
    theta : float np.array of shape (n_params,)
    """
    theta = np.asarray(theta, dtype='float')
    if theta.shape != (n_params,):
        raise ValueError('{} must have shape ({},), but found shape {}'\
                         .format(name, n_params, theta.shape))
    if not np.isfinite(theta).all():
        raise ValueError('{} must not contain Inf nor NaN'.format(name))
    return theta


_CONSTRAINT = re.compile(r'^\s*(>=|<=|>|<|==|!=)\s*(-?[0-9.eE+-]+)\s*$')
_OPS = {'>=': operator.ge, '<=': operator.le, '>': operator.gt,
        '<': operator.lt, '==': operator.eq, '!=': operator.ne}

def check_param(param, param_name, dtype, constraint=None, allow_none=False):
    """
    checks the dtype of a scalar parameter,
    and whether it satisfies one or more numerical constraints

    Parameters
    ---------
    param : object
    param_name : str, name of the parameter
    dtype : {'int', 'float'}, desired dtype of the parameter
    constraint : str or list of str, default: None
        numerical constraint(s) of the parameter, eg '>= 1' or ['> -1', '< 0'].
        if None, no constraint is enforced
    allow_none : bool, default: False
        whether None is an acceptable value

    Returns
    -------
    validated and converted parameter
    """
    if param is None and allow_none:
        return None

    constraints = [] if constraint is None else np.atleast_1d(constraint).tolist()
    msg = '{} must be {}{}, but found {} = {}'.format(
        param_name, dtype,
        ''.join(' ' + c for c in constraints) if constraints else '',
        param_name, repr(param))

    if isinstance(param, (bool, np.bool_)) or not isinstance(param, numbers.Real):
        raise TypeError(msg)
    if dtype == 'int':
        if not float(param).is_integer():
            raise TypeError(msg)
        param = int(param)
    else:
        param = float(param)

    if not np.isfinite(param):
        raise ValueError(msg)

    for c in constraints:
        match = _CONSTRAINT.match(c)
        if match is None:
            raise ValueError('unparseable constraint: {}'.format(c))
        op, bound = match.groups()
        if not _OPS[op](param, float(bound)):
            raise ValueError(msg)
    return param


def cholesky(A, name='matrix'):
    """
    lower-triangular Cholesky factor of a symmetric positive definite matrix

    Parameters
    ----------
    A : array-like of shape (d, d)
    name : str
        name to use in the error message

    Returns
    -------
    L : np.array of shape (d, d) with A = L L^T
    """
    A = np.atleast_2d(np.asarray(A, dtype='float'))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError('{} must be square, but found shape {}'\
                         .format(name, A.shape))
    if not np.isfinite(A).all():
        raise NotPositiveDefiniteError('{} contains Inf or NaN'.format(name))
    if not np.allclose(A, A.T, rtol=1e-10, atol=0):
        raise NotPositiveDefiniteError('{} is not symmetric'.format(name))
    try:
        return sp.linalg.cholesky(A, lower=True)
    except LinAlgError:
        raise NotPositiveDefiniteError('{} is not positive definite'.format(name))


def spd_inverse(A, name='matrix'):
    """
    inverse of a symmetric positive definite matrix via its Cholesky factor.

    the result is symmetrized exactly.

    Parameters
    ----------
    A : array-like of shape (d, d)
    name : str
        name to use in the error message

    Returns
    -------
    np.array of shape (d, d)
    """
    L = cholesky(A, name=name)
    inv = sp.linalg.cho_solve((L, True), np.eye(len(L)))
    return (inv + inv.T) / 2.


def logdet_from_cholesky(L):
    """log-determinant of L L^T"""
    return 2. * np.sum(np.log(np.diag(L)))


def sigmoid(z):
    """numerically stable logistic function"""
    return sp.special.expit(z)


def log1pexp(z):
    """
    log(1 + exp(z)) without overflow

    -log(sigmoid(z)) == log1pexp(-z)
    """
    return np.logaddexp(0., z)


def isiterable(obj, reject_string=True):
    """convenience tool to detect if something is iterable.
    in python3, strings count as iterables to we have the option to exclude them

    Parameters:
    -----------
    obj : object to analyse
    reject_string : bool, whether to ignore strings

    Returns:
    --------
    bool, if the object is itereable.
    """
    iterable = hasattr(obj, '__len__')
    if reject_string:
        iterable = iterable and not isinstance(obj, str)
    return iterable


def as_list(obj, sep=','):
    """
    coerce a comma-separated string, a scalar or an iterable to a list

    Parameters
    ----------
    obj : str, scalar or iterable
    sep : str, default: ','

    Returns
    -------
    list
    """
    if obj is None:
        return []
    if isinstance(obj, str):
        return [s.strip() for s in obj.split(sep) if s.strip()]
    if isiterable(obj):
        return list(obj)
    return [obj]


def even_thin(n_items, max_items):
    """
    indices of at most max_items evenly strided items out of n_items

    Parameters
    ----------
    n_items : int
    max_items : int

    Returns
    -------
    np.array of int indices
    """
    stride = max(1, int(np.ceil(n_items / max_items)))
    return np.arange(0, n_items, stride)


def warn(msg, verbose=True, stacklevel=2):
    """emit a warning if verbose"""
    if verbose:
        warnings.warn(msg, stacklevel=stacklevel + 1)
