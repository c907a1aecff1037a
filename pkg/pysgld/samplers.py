"""
Langevin samplers
"""

from __future__ import division, absolute_import
from collections import defaultdict
import time

import numpy as np
import pandas as pd
from progressbar import ProgressBar

from pysgld.core import Core
from pysgld.models import ModeInfo
from pysgld.subsampling import SubsampleDistribution
from pysgld.subsampling import WEIGHT_SCHEMES
from pysgld.subsampling import EXACT_SCHEMES
from pysgld.subsampling import compute_weights
from pysgld.estimators import GradientCache
from pysgld.estimators import estimate_gradient
from pysgld.callbacks import CallBack
from pysgld.callbacks import CALLBACKS
from pysgld.callbacks import validate_callback
from pysgld.utils import check_param
from pysgld.utils import check_random_state
from pysgld.utils import check_theta
from pysgld.utils import isiterable
from pysgld.utils import warn
from pysgld.utils import DivergenceError


# smallest noise threshold handed out by calibration
V0_MIN = 1e-12

# sampler kind -> (estimator kind, default weight scheme, adaptive)
SAMPLER_KINDS = {'ula': ('naive', 'uniform', False),
                 'sgld': ('naive', 'uniform', False),
                 'sgld_cv': ('cv', 'uniform', False),
                 'sgld_ps': ('ps', 'ps_approx', False),
                 'sgld_cv_ps': ('cv_ps', 'cv_approx', False),
                 'asgld_cv': ('cv', 'uniform', True),
                 'asgld_cv_ps': ('cv_ps', 'cv_approx', True),
                 }

INITS = ['auto', 'prior', 'zeros', 'mode']


def sgld_update_step(theta, grad, step_size, random_state=None, noise=True):
    """
    one Langevin update

        theta - (step_size / 2) grad + xi,   xi ~ N(0, step_size I)

    Parameters
    ----------
    theta : np.array of shape (d,)
    grad : np.array of shape (d,)
        gradient of the negative log posterior, or an estimate of it
    step_size : float
    random_state : int or np.random.Generator, default: None
    noise : bool, default: True
        whether to inject the Gaussian noise. without it the update is a
        gradient descent step

    Returns
    -------
    np.array of shape (d,)
    """
    step_size = check_param(step_size, param_name='step_size', dtype='float',
                            constraint='> 0')
    theta = theta - (step_size / 2.) * grad
    if noise:
        rng = check_random_state(random_state)
        theta = theta + np.sqrt(step_size) * rng.standard_normal(len(theta))
    return theta


def adaptive_batch_size(theta, mode, lipschitz_sum, noise_threshold,
                        n_min=1, n_max=None):
    """
    smallest subsample size whose pseudo-variance bound is below noise_threshold

        n = floor(||theta - mode||^2 lipschitz_sum / noise_threshold) + 1

    clamped to [n_min, n_max].

    Parameters
    ----------
    theta : np.array of shape (d,)
    mode : ModeInfo or np.array of shape (d,)
    lipschitz_sum : float
        sum_i L_i^2 / p_i for the subsampling distribution
    noise_threshold : float
        V0 > 0
    n_min : int, default: 1
    n_max : int or None, default: None
        no upper clamp if None

    Returns
    -------
    int

    Raises
    ------
    DivergenceError if the bound is not finite, eg for a NaN state
    """
    noise_threshold = check_param(noise_threshold, param_name='noise_threshold',
                                  dtype='float', constraint='> 0')
    center = mode.mode if isinstance(mode, ModeInfo) else mode
    bound = np.sum((theta - center)**2) * lipschitz_sum / noise_threshold
    if not np.isfinite(bound):
        raise DivergenceError('adaptive batch size bound is not finite ({})'\
                              .format(bound))
    if n_max is not None and bound >= n_max:
        return int(n_max)
    n = int(np.floor(bound)) + 1
    n = max(n, n_min)
    if n_max is not None:
        n = min(n, n_max)
    return n


class ChainTrace(Core):
    """
    output of one sampler run

    Parameters
    ----------
    samples : np.array of shape (K, d)
        retained states, after thinning
    iterations : np.array of int, shape (K,)
        1-based iteration after which each sample was retained
    batch_sizes : np.array of int, shape (T,)
        subsample size used at every iteration
    theta0 : np.array of shape (d,)
        initial state
    seed : int or None
    n_data : int
    kind : str
    wall_time : float
        seconds spent in the sampling loop
    """
    def __init__(self, samples, iterations, batch_sizes, theta0, seed=None,
                 n_data=None, kind=None, wall_time=0.):
        self.samples = samples
        self.iterations = iterations
        self.batch_sizes = batch_sizes
        self.theta0 = theta0
        self.seed = seed
        self.n_data = n_data
        self.kind = kind
        self.wall_time = wall_time
        super(ChainTrace, self).__init__(name=kind)

    @property
    def n_samples(self):
        return len(self.samples)

    @property
    def cumulative_usage(self):
        """gradient-term evaluations up to and including each iteration"""
        return np.cumsum(self.batch_sizes)

    @property
    def data_usage(self):
        """total number of gradient-term evaluations"""
        return int(np.sum(self.batch_sizes))

    @property
    def passes(self):
        """number of passes through the data"""
        return self.data_usage / self.n_data

    def burn_in(self, fraction=0.5):
        """
        drop the first fraction of retained samples

        Parameters
        ----------
        fraction : float in [0, 1), default: 0.5

        Returns
        -------
        ChainTrace
        """
        fraction = check_param(fraction, param_name='fraction', dtype='float',
                               constraint=['>= 0', '< 1'])
        start = int(np.floor(fraction * self.n_samples))
        return ChainTrace(self.samples[start:], self.iterations[start:],
                          self.batch_sizes, self.theta0, seed=self.seed,
                          n_data=self.n_data, kind=self.kind,
                          wall_time=self.wall_time)

    def moments(self, start=0, stop=None):
        """
        sample mean and covariance over retained samples [start, stop)

        Parameters
        ----------
        start : int, default: 0
        stop : int or None, default: None

        Returns
        -------
        mean : np.array of shape (d,)
        cov : np.array of shape (d, d)
        """
        window = self.samples[start:stop]
        if len(window) < 2:
            raise ValueError('need at least 2 samples to estimate moments, '\
                             'but found {}'.format(len(window)))
        return window.mean(axis=0), np.atleast_2d(np.cov(window, rowvar=False))

    def to_frame(self):
        """
        one row per retained sample with columns
        seed, iteration, theta_0 ... theta_{d-1}, batch_size, cumulative_data_usage

        Returns
        -------
        pandas.DataFrame
        """
        pos = self.iterations - 1
        frame = pd.DataFrame({'seed': np.full(self.n_samples, self.seed, dtype=object),
                              'iteration': self.iterations})
        for j in range(self.samples.shape[1]):
            frame['theta_{}'.format(j)] = self.samples[:, j]
        frame['batch_size'] = self.batch_sizes[pos]
        frame['cumulative_data_usage'] = self.cumulative_usage[pos]
        return frame

    def to_csv(self, path):
        """write to_frame() to path"""
        self.to_frame().to_csv(path, index=False)


class AdamState(Core):
    """
    moment estimates of the ADAM optimizer

    Parameters
    ----------
    n_params : int
    alpha : float, default: 1e-3
        learning rate
    beta1 : float, default: 0.9
    beta2 : float, default: 0.999
    delta : float, default: 1e-8
    """
    def __init__(self, n_params, alpha=1e-3, beta1=0.9, beta2=0.999, delta=1e-8):
        self.alpha = check_param(alpha, 'alpha', 'float', '> 0')
        self.beta1 = check_param(beta1, 'beta1', 'float', ['>= 0', '< 1'])
        self.beta2 = check_param(beta2, 'beta2', 'float', ['>= 0', '< 1'])
        self.delta = check_param(delta, 'delta', 'float', '> 0')
        self.m_ = np.zeros(n_params)
        self.v_ = np.zeros(n_params)
        self.t_ = 0
        super(AdamState, self).__init__(name='adam')

    def step(self, grad):
        """
        update the moments with a new gradient and return the parameter step

        Parameters
        ----------
        grad : np.array of shape (d,)

        Returns
        -------
        np.array of shape (d,), to be subtracted from the parameters
        """
        self.t_ += 1
        self.m_ = self.beta1 * self.m_ + (1. - self.beta1) * grad
        self.v_ = self.beta2 * self.v_ + (1. - self.beta2) * grad**2
        m_hat = self.m_ / (1. - self.beta1**self.t_)
        v_hat = self.v_ / (1. - self.beta2**self.t_)
        return self.alpha * m_hat / (np.sqrt(v_hat) + self.delta)


def find_mode_adam(model, theta0=None, batch_size=None, n_steps=10000,
                   alpha=1e-3, beta1=0.9, beta2=0.999, delta=1e-8,
                   laplace=False, random_state=None, progress=False,
                   verbose=False):
    """
    posterior mode by ADAM on (stochastic) gradients of the negative log posterior

    Parameters
    ----------
    model : Model
    theta0 : array-like of shape (d,), default: None
        starting point. model.initial_theta if None
    batch_size : int or None, default: None
        size of the uniform subsample behind each gradient estimate.
        exact full-data gradients if None
    n_steps : int, default: 10000
    alpha, beta1, beta2, delta : float
        ADAM rates
    laplace : bool, default: False
        whether to also populate the Laplace covariance at the mode
    random_state : int or np.random.Generator, default: None
    progress : bool, default: False
        whether to show a progress bar
    verbose : bool, default: False
        whether to warn if the gradient norm did not decrease

    Returns
    -------
    ModeInfo
    """
    n_steps = check_param(n_steps, param_name='n_steps', dtype='int',
                          constraint='>= 1')
    if batch_size is not None:
        batch_size = check_param(batch_size, param_name='batch_size', dtype='int',
                                 constraint=['>= 1', '<= {}'.format(model.n_data)])
    rng = check_random_state(random_state)
    if theta0 is None:
        theta0 = model.initial_theta(rng)
    theta = check_theta(theta0, model.n_params, name='theta0').copy()

    adam = AdamState(model.n_params, alpha=alpha, beta1=beta1, beta2=beta2,
                     delta=delta)
    if batch_size is not None:
        dist = SubsampleDistribution.uniform(model.n_data)
    start_norm = np.linalg.norm(model.full_grad(theta))

    pbar = ProgressBar() if progress else lambda x: x
    for t in pbar(range(n_steps)):
        if batch_size is None:
            grad = model.full_grad(theta)
        else:
            grad = estimate_gradient('naive', model, theta, dist, batch_size,
                                     random_state=rng).vector
        if not np.isfinite(grad).all():
            raise DivergenceError('non-finite gradient in ADAM at step {}'\
                                  .format(t), step=t)
        theta = theta - adam.step(grad)

    mode = ModeInfo.from_model(model, theta, laplace=laplace)
    if not np.linalg.norm(mode.grad_sum) < start_norm:
        warn('ADAM did not decrease the gradient norm ({:.3e} -> {:.3e}). '\
             'Consider more steps or a different alpha.'\
             .format(start_norm, np.linalg.norm(mode.grad_sum)), verbose)
    return mode


class Sampler(Core):
    """Stochastic gradient Langevin sampler

    Parameters
    ----------
    kind : str, default: 'sgld'
        one of 'ula', 'sgld', 'sgld_cv', 'sgld_ps', 'sgld_cv_ps',
        'asgld_cv', 'asgld_cv_ps'.

        'ula' uses the full data at every iteration. the '_cv' kinds anchor
        the gradient estimate at the posterior mode, the '_ps' kinds draw the
        subsample from non-uniform weights, and the 'asgld_' kinds choose the
        subsample size at every iteration from the distance to the mode.

    step_size : float, default: 1e-4
        epsilon > 0

    n_iter : int, default: 1000
        number of iterations T

    batch_size : int, default: None
        subsample size of the fixed-size kinds

    noise_threshold : float, default: None
        V0 > 0 of the adaptive kinds

    weights : str, default: None
        weight scheme, one of 'uniform', 'ps_exact', 'ps_approx', 'cv_exact',
        'cv_approx'. the default depends on kind: 'ps_approx' for 'sgld_ps',
        'cv_approx' for 'sgld_cv_ps' and 'asgld_cv_ps', else 'uniform'.
        exact schemes are recomputed at every iteration.

    with_replacement : bool, default: True

    seed : int, default: None

    thin : int, default: 1
        keep every thin-th state

    n_min, n_max : int, default: 1 and None
        clamps on the adaptive subsample size. n_max defaults to N

    noise : bool, default: True
        whether to inject Langevin noise

    init : str, default: 'auto'
        'auto' starts control-variate kinds at the mode and others from
        model.initial_theta (a prior draw for the Gaussian model, zeros for
        regressions). also 'prior', 'zeros', 'mode'.

    callbacks : list of str or list of CallBack objects, default: ['batch_size']
        Names of callback objects to call after every iteration.

    progress : bool, default: False
        whether to show a progress bar

    verbose : bool, default: False
        whether to show pysgld warnings

    Attributes
    ----------
    trace_ : ChainTrace
        output of the last run

    logs_ : dict
        Dictionary containing the outputs of any callbacks at each
        iteration.

        The logs are structured as ``{callback: [...]}``
    """
    def __init__(self, kind='sgld', step_size=1e-4, n_iter=1000, batch_size=None,
                 noise_threshold=None, weights=None, with_replacement=True,
                 seed=None, thin=1, n_min=1, n_max=None, noise=True, init='auto',
                 callbacks=['batch_size'], progress=False, verbose=False):
        self.kind = kind
        self.step_size = step_size
        self.n_iter = n_iter
        self.batch_size = batch_size
        self.noise_threshold = noise_threshold
        self.weights = weights
        self.with_replacement = with_replacement
        self.seed = seed
        self.thin = thin
        self.n_min = n_min
        self.n_max = n_max
        self.noise = noise
        self.init = init
        self.callbacks = callbacks
        self.progress = progress
        self.verbose = verbose
        super(Sampler, self).__init__(name=kind)

    @property
    def estimator(self):
        return SAMPLER_KINDS[self.kind][0]

    @property
    def is_adaptive(self):
        return SAMPLER_KINDS[self.kind][2]

    @property
    def uses_mode(self):
        return self.estimator in ['cv', 'cv_ps']

    def _validate_params(self, model):
        """method to sanitize sampler parameters against a model

        Parameters
        ---------
        model : Model

        Returns
        -------
        None
        """
        if self.kind not in SAMPLER_KINDS:
            raise ValueError('kind must be one of {}, but found {}'\
                             .format(sorted(SAMPLER_KINDS), repr(self.kind)))
        N = model.n_data
        self.step_size = check_param(self.step_size, param_name='step_size',
                                     dtype='float', constraint='> 0')
        self.n_iter = check_param(self.n_iter, param_name='n_iter',
                                  dtype='int', constraint='>= 1')
        self.thin = check_param(self.thin, param_name='thin',
                                dtype='int', constraint='>= 1')

        if self.weights is None:
            self.weights = SAMPLER_KINDS[self.kind][1]
        if self.weights not in WEIGHT_SCHEMES:
            raise ValueError('weights must be one of {}, but found {}'\
                             .format(sorted(WEIGHT_SCHEMES), repr(self.weights)))
        if self.estimator in ['naive', 'cv'] and self.weights != 'uniform':
            raise ValueError('sampler {} requires uniform weights, but found {}'\
                             .format(repr(self.kind), repr(self.weights)))

        if self.kind == 'ula':
            self.batch_size = N
        elif self.is_adaptive:
            self.noise_threshold = check_param(self.noise_threshold,
                                               param_name='noise_threshold',
                                               dtype='float', constraint='> 0')
            if self.n_max is None:
                self.n_max = N
            self.n_max = check_param(self.n_max, param_name='n_max', dtype='int',
                                     constraint=['>= 1', '<= {}'.format(N)])
            self.n_min = check_param(self.n_min, param_name='n_min', dtype='int',
                                     constraint=['>= 1', '<= {}'.format(self.n_max)])
        else:
            self.batch_size = check_param(self.batch_size, param_name='batch_size',
                                          dtype='int',
                                          constraint=['>= 1', '<= {}'.format(N)])

        if not isiterable(self.init) and self.init not in INITS:
            raise ValueError('init must be one of {} or an array, but found {}'\
                             .format(INITS, repr(self.init)))

        # callbacks
        if not isiterable(self.callbacks):
            raise ValueError('Callbacks must be iterable, but found {}'\
                             .format(self.callbacks))
        if not all([c in CALLBACKS or
                    isinstance(c, CallBack) for c in self.callbacks]):
            raise ValueError('unsupported callback(s) {}'.format(self.callbacks))
        callbacks = list(self.callbacks)
        for i, c in enumerate(self.callbacks):
            if c in CALLBACKS:
                callbacks[i] = CALLBACKS[c]()
        self.callbacks = [validate_callback(c) for c in callbacks]

    def _initial_theta(self, model, mode, rng):
        init = self.init
        if isiterable(init):
            return check_theta(init, model.n_params, name='init')
        if init == 'auto':
            init = 'mode' if (self.uses_mode or self.is_adaptive) else 'prior'
        if init == 'mode':
            if mode is None:
                raise ValueError('init=\'mode\' requires a ModeInfo')
            return mode.mode.copy()
        if init == 'zeros':
            return np.zeros(model.n_params)
        return model.initial_theta(rng)

    def _static_distribution(self, model, mode, dist):
        """weights fixed for the whole run, or None if recomputed per iteration"""
        if dist is not None:
            if dist.n_data != model.n_data:
                raise ValueError('distribution has {} weights but the model has {} data'\
                                 .format(dist.n_data, model.n_data))
            return dist
        if self.weights in EXACT_SCHEMES:
            return None
        if self.weights == 'cv_approx' and mode is not None and mode.laplace_cov is None:
            mode = mode.with_laplace(model)
        return compute_weights(self.weights, model, mode=mode,
                               verbose=self.verbose)

    def _on_loop_end(self, variables):
        """
        performs on-loop-end actions like callbacks

        variables contains local namespace variables.

        Parameters
        ---------
        variables : dict of available variables

        Returns
        -------
        None
        """
        for callback in self.callbacks:
            self.logs_[str(callback)].append(callback.on_loop_end(**variables))

    def run(self, model, mode=None, dist=None, theta0=None):
        """
        run one chain

        Parameters
        ----------
        model : Model
        mode : ModeInfo, default: None
            required by control-variate and adaptive kinds, and by the
            mode-based weight schemes
        dist : SubsampleDistribution, default: None
            overrides the weight scheme when given
        theta0 : array-like of shape (d,), default: None
            overrides init when given

        Returns
        -------
        ChainTrace
        """
        self._validate_params(model)
        if (self.uses_mode or self.is_adaptive) and mode is None:
            raise ValueError('sampler {} requires a ModeInfo'.format(repr(self.kind)))

        if not hasattr(self, 'logs_'):
            self.logs_ = defaultdict(list)

        rng = check_random_state(self.seed)
        if theta0 is None:
            theta0 = self._initial_theta(model, mode, rng)
        theta = check_theta(theta0, model.n_params, name='theta0').copy()
        theta_init = theta.copy()

        static = self._static_distribution(model, mode, dist)
        lipschitz = model.lipschitz_constants() if self.is_adaptive else None
        full = np.arange(model.n_data) if self.kind == 'ula' else None

        T = self.n_iter
        K = T // self.thin
        samples = np.empty((K, model.n_params))
        iterations = np.empty(K, dtype='int')
        batch_sizes = np.empty(T, dtype='int')

        tic = time.time()
        pbar = ProgressBar() if self.progress else lambda x: x
        k = 0
        for t in pbar(range(T)):
            cache = None
            current = static
            if current is None:
                cache = GradientCache(model)
                current = compute_weights(self.weights, model, theta=theta,
                                          mode=mode, cache=cache,
                                          verbose=self.verbose)

            if self.is_adaptive:
                batch_size = adaptive_batch_size(theta, mode,
                                                 current.lipschitz_sum(lipschitz),
                                                 self.noise_threshold,
                                                 n_min=self.n_min, n_max=self.n_max)
            else:
                batch_size = self.batch_size

            estimate = estimate_gradient(self.estimator, model, theta, current,
                                         batch_size, mode=mode, random_state=rng,
                                         indices=full,
                                         with_replacement=self.with_replacement,
                                         cache=cache)
            grad = estimate.vector
            theta = sgld_update_step(theta, grad, self.step_size,
                                     random_state=rng, noise=self.noise)
            if not np.isfinite(theta).all():
                raise DivergenceError('{} chain diverged at iteration {}'\
                                      .format(self.kind, t), step=t)

            batch_sizes[t] = batch_size
            if (t + 1) % self.thin == 0:
                samples[k] = theta
                iterations[k] = t + 1
                k += 1

            # log on-loop-end stats
            self._on_loop_end(vars())

        self.trace_ = ChainTrace(samples, iterations, batch_sizes, theta_init,
                                 seed=self.seed, n_data=model.n_data,
                                 kind=self.kind, wall_time=time.time() - tic)
        return self.trace_


class ULA(Sampler):
    """Unadjusted Langevin algorithm: full data at every iteration

    Parameters
    ----------
    see Sampler
    """
    def __init__(self, step_size=1e-4, n_iter=1000, seed=None, thin=1,
                 noise=True, init='auto', callbacks=['batch_size'],
                 progress=False, verbose=False):
        super(ULA, self).__init__(kind='ula', step_size=step_size,
                                  n_iter=n_iter, seed=seed, thin=thin,
                                  noise=noise, init=init, callbacks=callbacks,
                                  progress=progress, verbose=verbose)


class SGLD(Sampler):
    """SGLD with uniform subsampling

    Parameters
    ----------
    see Sampler
    """
    def __init__(self, step_size=1e-4, n_iter=1000, batch_size=None,
                 with_replacement=True, seed=None, thin=1, noise=True,
                 init='auto', callbacks=['batch_size'], progress=False,
                 verbose=False):
        super(SGLD, self).__init__(kind='sgld', step_size=step_size,
                                   n_iter=n_iter, batch_size=batch_size,
                                   with_replacement=with_replacement,
                                   seed=seed, thin=thin, noise=noise, init=init,
                                   callbacks=callbacks, progress=progress,
                                   verbose=verbose)


class SGLDCV(Sampler):
    """SGLD with control variates around the posterior mode

    Parameters
    ----------
    see Sampler
    """
    def __init__(self, step_size=1e-4, n_iter=1000, batch_size=None,
                 with_replacement=True, seed=None, thin=1, noise=True,
                 init='auto', callbacks=['batch_size'], progress=False,
                 verbose=False):
        super(SGLDCV, self).__init__(kind='sgld_cv', step_size=step_size,
                                     n_iter=n_iter, batch_size=batch_size,
                                     with_replacement=with_replacement,
                                     seed=seed, thin=thin, noise=noise,
                                     init=init, callbacks=callbacks,
                                     progress=progress, verbose=verbose)


class SGLDPS(Sampler):
    """SGLD with preferential subsampling

    Parameters
    ----------
    see Sampler
    """
    def __init__(self, step_size=1e-4, n_iter=1000, batch_size=None,
                 weights='ps_approx', seed=None, thin=1, noise=True,
                 init='auto', callbacks=['batch_size'], progress=False,
                 verbose=False):
        super(SGLDPS, self).__init__(kind='sgld_ps', step_size=step_size,
                                     n_iter=n_iter, batch_size=batch_size,
                                     weights=weights, seed=seed, thin=thin,
                                     noise=noise, init=init, callbacks=callbacks,
                                     progress=progress, verbose=verbose)


class SGLDCVPS(Sampler):
    """SGLD with control variates and preferential subsampling

    Parameters
    ----------
    see Sampler
    """
    def __init__(self, step_size=1e-4, n_iter=1000, batch_size=None,
                 weights='cv_approx', seed=None, thin=1, noise=True,
                 init='auto', callbacks=['batch_size'], progress=False,
                 verbose=False):
        super(SGLDCVPS, self).__init__(kind='sgld_cv_ps', step_size=step_size,
                                       n_iter=n_iter, batch_size=batch_size,
                                       weights=weights, seed=seed, thin=thin,
                                       noise=noise, init=init,
                                       callbacks=callbacks, progress=progress,
                                       verbose=verbose)


class ASGLDCV(Sampler):
    """SGLD with control variates and adaptive subsample sizes

    Parameters
    ----------
    see Sampler
    """
    def __init__(self, step_size=1e-4, n_iter=1000, noise_threshold=None,
                 weights='uniform', seed=None, thin=1, n_min=1, n_max=None,
                 noise=True, init='auto', callbacks=['batch_size'],
                 progress=False, verbose=False):
        super(ASGLDCV, self).__init__(kind='asgld_cv', step_size=step_size,
                                      n_iter=n_iter,
                                      noise_threshold=noise_threshold,
                                      weights=weights, seed=seed, thin=thin,
                                      n_min=n_min, n_max=n_max, noise=noise,
                                      init=init, callbacks=callbacks,
                                      progress=progress, verbose=verbose)


class ASGLDCVPS(Sampler):
    """SGLD with control variates, preferential subsampling and adaptive
    subsample sizes

    Parameters
    ----------
    see Sampler
    """
    def __init__(self, step_size=1e-4, n_iter=1000, noise_threshold=None,
                 weights='cv_approx', seed=None, thin=1, n_min=1, n_max=None,
                 noise=True, init='auto', callbacks=['batch_size'],
                 progress=False, verbose=False):
        super(ASGLDCVPS, self).__init__(kind='asgld_cv_ps', step_size=step_size,
                                        n_iter=n_iter,
                                        noise_threshold=noise_threshold,
                                        weights=weights, seed=seed, thin=thin,
                                        n_min=n_min, n_max=n_max, noise=noise,
                                        init=init, callbacks=callbacks,
                                        progress=progress, verbose=verbose)


SAMPLERS = {'ula': ULA,
            'sgld': SGLD,
            'sgld_cv': SGLDCV,
            'sgld_ps': SGLDPS,
            'sgld_cv_ps': SGLDCVPS,
            'asgld_cv': ASGLDCV,
            'asgld_cv_ps': ASGLDCVPS,
            }


def run_chain(model, config, mode=None, dist=None, theta0=None):
    """
    run one chain from a sampler configuration

    Parameters
    ----------
    model : Model
    config : Sampler or dict of Sampler parameters
    mode : ModeInfo, default: None
    dist : SubsampleDistribution, default: None
    theta0 : array-like of shape (d,), default: None

    Returns
    -------
    ChainTrace
    """
    if isinstance(config, Sampler):
        config = config.get_params()
    return Sampler(**config).run(model, mode=mode, dist=dist, theta0=theta0)


def propose_noise_threshold(sq_distances, batch_size, lipschitz_sum, percentile=95.):
    """
    noise threshold implied by one pilot chain

        q / n * sum_i L_i^2 / p_i

    with q the percentile of the squared distances to the mode, using linear
    interpolation between order statistics.

    Parameters
    ----------
    sq_distances : array-like
        ||theta - mode||^2 for every retained pilot sample
    batch_size : int
        pilot subsample size n
    lipschitz_sum : float
    percentile : float, default: 95

    Returns
    -------
    float
    """
    q = np.percentile(np.asarray(sq_distances, dtype='float'), percentile)
    return float(q * lipschitz_sum / batch_size)


def calibrate_noise_threshold(model, mode, step_size, dist=None, batch_size=None,
                              pilot_kinds=None, n_iter=1000, seed=None,
                              percentile=95., floor=V0_MIN,
                              return_proposals=False, progress=False,
                              verbose=False):
    """
    choose the noise threshold V0 from short fixed-size pilot chains

    every pilot chain proposes V0 from the percentile of its squared distances
    to the mode. the largest proposal wins.

    Parameters
    ----------
    model : Model
    mode : ModeInfo
    step_size : float
    dist : SubsampleDistribution, default: None
        weights of the preferential pilot chains. 'cv_approx' weights if None
    batch_size : int, default: None
        pilot subsample size. ceil(0.001 N) if None
    pilot_kinds : list of str, default: None
        sampler kind of every pilot chain.
        five 'sgld_cv' and five 'sgld_cv_ps' chains if None
    n_iter : int, default: 1000
        iterations per pilot chain
    seed : int, default: None
        master seed. pilot chain seeds are derived from it
    percentile : float, default: 95
    floor : float, default: V0_MIN
        smallest value returned
    return_proposals : bool, default: False
        whether to also return every chain's proposal
    progress : bool, default: False
    verbose : bool, default: False

    Returns
    -------
    V0 : float
    proposals : list of float, only if return_proposals
    """
    if pilot_kinds is None:
        pilot_kinds = ['sgld_cv'] * 5 + ['sgld_cv_ps'] * 5
    if batch_size is None:
        batch_size = int(np.ceil(0.001 * model.n_data))
    if dist is None and any(k.endswith('_ps') for k in pilot_kinds):
        if mode.laplace_cov is None:
            mode = mode.with_laplace(model)
        dist = compute_weights('cv_approx', model, mode=mode, verbose=verbose)
    uniform = SubsampleDistribution.uniform(model.n_data)
    lipschitz = model.lipschitz_constants()

    seeds = np.random.SeedSequence(seed).generate_state(len(pilot_kinds))
    proposals = []
    pbar = ProgressBar() if progress else lambda x: x
    for kind, chain_seed in pbar(list(zip(pilot_kinds, seeds))):
        pilot_dist = dist if kind.endswith('_ps') else uniform
        trace = Sampler(kind=kind, step_size=step_size, n_iter=n_iter,
                        batch_size=batch_size, seed=int(chain_seed),
                        callbacks=[], verbose=verbose)\
                .run(model, mode=mode, dist=pilot_dist)
        sq = np.sum((trace.samples - mode.mode)**2, axis=1)
        proposals.append(propose_noise_threshold(sq, batch_size,
                                                 pilot_dist.lipschitz_sum(lipschitz),
                                                 percentile=percentile))

    V0 = max(max(proposals), floor)
    if return_proposals:
        return V0, proposals
    return V0
