"""
CallBacks
"""

from __future__ import absolute_import
from functools import wraps

import numpy as np

from pysgld.core import Core


def validate_callback_data(method):
    """
    wraps a callback's method to pull the desired arguments from the vars dict
    also checks to ensure the method's arguments are in the vars dict

    Parameters
    ----------
    method : callable

    Returns
    -------
    validated callable
    """
    @wraps(method)
    def method_wrapper(*args, **kwargs):
        expected = method.__code__.co_varnames[:method.__code__.co_argcount]

        # the running sampler is exposed as `sampler`
        if 'self' in kwargs:
            kwargs['sampler'] = kwargs.pop('self')

        missing = [e for e in expected if e != 'self' and e not in kwargs]
        if missing:
            raise ValueError('CallBack cannot reference: {}'\
                             .format(', '.join(missing)))

        kwargs_subset = dict((e, kwargs[e]) for e in expected if e != 'self')
        return method(*args, **kwargs_subset)

    return method_wrapper

def validate_callback(callback):
    """
    validates a callback's on_loop_end method

    Parameters
    ----------
    callback : Callback object

    Returns
    -------
    validated callback
    """
    if not(hasattr(callback, '_validated')) or callback._validated == False:
        if not hasattr(callback, 'on_loop_end'):
            raise ValueError('callback must have an `on_loop_end` method')
        setattr(callback, 'on_loop_end',
                validate_callback_data(callback.on_loop_end))
        setattr(callback, '_validated', True)
    return callback


class CallBack(Core):
    """CallBack class"""
    def __init__(self, name=None):
        """
        creates a CallBack instance

        Parameters
        ----------
        name : str
            key of the callback output in sampler.logs_

        Returns
        -------
        None
        """
        super(CallBack, self).__init__(name=name)


@validate_callback
class BatchSize(CallBack):
    """BatchSize CallBack class"""
    def __init__(self):
        """
        creates a BatchSize CallBack instance

        useful for tracking the subsample size chosen at each iteration

        Parameters
        ----------
        None

        Returns
        -------
        None
        """
        super(BatchSize, self).__init__(name='batch_size')

    def on_loop_end(self, batch_size):
        """
        runs the method at end of each sampling iteration

        Parameters
        ----------
        batch_size : int

        Returns
        -------
        batch_size : int
        """
        return int(batch_size)


@validate_callback
class Distance(CallBack):
    def __init__(self):
        """
        creates a Distance CallBack instance

        useful for capturing the squared distance of the chain to the mode,
        the quantity that drives adaptive subsample sizes

        Parameters
        ----------
        None

        Returns
        -------
        None
        """
        super(Distance, self).__init__(name='distance')

    def on_loop_end(self, theta, mode):
        """
        runs the method at end of each sampling iteration

        Parameters
        ----------
        theta : np.array of shape (d,)
            state after the update
        mode : ModeInfo or None

        Returns
        -------
        float, NaN if no mode is available
        """
        if mode is None:
            return np.nan
        return float(np.sum((theta - mode.mode)**2))


@validate_callback
class Theta(CallBack):
    def __init__(self):
        """
        creates a Theta CallBack instance

        useful for capturing every state of the chain, thinned or not

        Parameters
        ----------
        None

        Returns
        -------
        None
        """
        super(Theta, self).__init__(name='theta')

    def on_loop_end(self, theta):
        return theta.copy()


@validate_callback
class GradNorm(CallBack):
    def __init__(self):
        """
        creates a GradNorm CallBack instance

        Parameters
        ----------
        None

        Returns
        -------
        None
        """
        super(GradNorm, self).__init__(name='grad_norm')

    def on_loop_end(self, grad):
        """norm of the stochastic gradient used in the update"""
        return float(np.linalg.norm(grad))


CALLBACKS = {'batch_size': BatchSize,
             'distance': Distance,
             'theta': Theta,
             'grad_norm': GradNorm,
            }
