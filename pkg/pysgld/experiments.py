"""
Experiment harness
"""

from __future__ import division, absolute_import
from collections import OrderedDict
from collections import namedtuple
import hashlib
import json
import logging
import os

import numpy as np
import pandas as pd
import scipy
from progressbar import ProgressBar

from pysgld.core import Core
from pysgld.models import LogisticModel
from pysgld.models import LinearModel
from pysgld.models import ModeInfo
from pysgld.datasets import generate_synthetic
from pysgld.datasets import load_dataset
from pysgld.datasets import split_train_test
from pysgld.datasets import SYNTHETIC_KINDS
from pysgld.subsampling import compute_weights
from pysgld.estimators import pseudo_variance_empirical
from pysgld.samplers import Sampler
from pysgld.samplers import SAMPLER_KINDS
from pysgld.samplers import find_mode_adam
from pysgld.samplers import calibrate_noise_threshold
from pysgld.diagnostics import KsdConfig
from pysgld.diagnostics import ksd
from pysgld.diagnostics import kl_gaussian
from pysgld.diagnostics import log_loss
from pysgld.utils import as_list
from pysgld.utils import check_param
from pysgld.utils import check_random_state
from pysgld.utils import ConfigError
from pysgld.utils import DivergenceError
from pysgld.utils import UnsupportedModelError


logger = logging.getLogger(__name__)


DEFAULT_STEP_SIZES = {'gaussian': 1e-4,
                      'logistic_balanced': 1e-4,
                      'logistic_imbalanced': 1e-4,
                      'linear': 1e-4,
                      'covertype': 1e-6,
                      'casp': 1e-5,
                      }

# file-backed presets: (format, response column, declared features, model)
FILE_DATASETS = {'covertype': ('libsvm', None, 54, LogisticModel),
                 'casp': ('csv', 'RMSD', None, LinearModel),
                 }

DATASETS = SYNTHETIC_KINDS + sorted(FILE_DATASETS)

# estimator:weight scheme pairs compared by the variance sweep
SWEEP_SCHEMES = [('naive', 'uniform'),
                 ('ps', 'ps_approx'),
                 ('ps', 'ps_exact'),
                 ('cv', 'uniform'),
                 ('cv_ps', 'cv_approx'),
                 ('cv_ps', 'cv_exact'),
                 ]

DEFAULT_SAMPLERS = {'variance_sweep': [],
                    'fixed_batch': ['sgld', 'sgld_cv', 'sgld_ps', 'sgld_cv_ps'],
                    'adaptive': ['sgld_cv_ps', 'asgld_cv_ps'],
                    }

# key -> (type, default)
SCHEMA = OrderedDict([
    ('experiment', ('str', 'fixed_batch')),
    ('dataset', ('str', 'gaussian')),
    ('path', ('str', None)),
    ('n_data', ('int', 1000)),
    ('prior', ('str', 'flat')),
    ('max_rows', ('int', 50000)),
    ('allow_large', ('bool', False)),
    ('standardize', ('bool', False)),
    ('train_fraction', ('float', 0.75)),
    ('seed', ('int', 0)),
    ('samplers', ('list_str', None)),
    ('fractions', ('list_float', [0.01, 0.05, 0.1, 0.2])),
    ('with_wor', ('bool', False)),
    ('n_reps', ('int', 500)),
    ('n_candidates', ('int', 10)),
    ('n_chains', ('int', 1)),
    ('batch_fraction', ('float', 0.001)),
    ('passes', ('float', 10.)),
    ('n_iter', ('int', None)),
    ('step_size', ('float', None)),
    ('thin', ('int', 1)),
    ('n_windows', ('int', 10)),
    ('loss_every', ('int', 10)),
    ('ksd_max_samples', ('int', 1000)),
    ('mode_steps', ('int', 10000)),
    ('mode_alpha', ('float', 1e-3)),
    ('pilot_iter', ('int', 1000)),
    ('noise_threshold', ('float', None)),
    ('record_wall_time', ('bool', False)),
    ('out', ('str', None)),
    ('progress', ('bool', False)),
    ('verbose', ('bool', False)),
])

ResultRow = namedtuple('ResultRow', ['experiment', 'sampler', 'chain', 'seed',
                                     'step', 'metric', 'value', 'batch_size',
                                     'data_usage', 'wall_time'])


def _parse_value(key, text):
    """convert one raw config value to its schema type"""
    dtype = SCHEMA[key][0]
    text = text.strip()
    if text.lower() in ['', 'none']:
        return None
    try:
        if dtype == 'int':
            return int(text)
        if dtype == 'float':
            return float(text)
        if dtype == 'bool':
            if text.lower() not in ['true', 'false', '1', '0', 'yes', 'no']:
                raise ValueError(text)
            return text.lower() in ['true', '1', 'yes']
        if dtype == 'list_str':
            return as_list(text)
        if dtype == 'list_float':
            return [float(v) for v in as_list(text)]
    except ValueError:
        raise ConfigError('{} must be of type {}, but found {}'\
                          .format(key, dtype, repr(text)))
    return text


def _format_value(value):
    if value is None:
        return 'none'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (list, tuple)):
        return ','.join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_config(path):
    """
    read a flat ``key = value`` config file

    blank lines and text after ``#`` are ignored. lists are comma separated.

    Parameters
    ----------
    path : str

    Returns
    -------
    dict of typed values
    """
    params = {}
    with open(path, 'r') as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition('=')
            key = key.strip()
            if not sep:
                raise ConfigError('{} line {}: expected key = value'.format(path, lineno))
            if key not in SCHEMA:
                raise ConfigError('{} line {}: unknown key {}'\
                                  .format(path, lineno, repr(key)))
            params[key] = _parse_value(key, value)
    return params


class ExperimentConfig(Core):
    """
    typed experiment settings

    every key of SCHEMA is an attribute. unspecified keys take the schema
    default.

    Parameters
    ----------
    **params : schema keys and values
    """
    def __init__(self, **params):
        for key, (_, default) in SCHEMA.items():
            setattr(self, key, default)
        for key, value in params.items():
            if key not in SCHEMA:
                raise ConfigError('unknown config key {}'.format(repr(key)))
            setattr(self, key, value)
        super(ExperimentConfig, self).__init__(name=self.experiment)

    @classmethod
    def from_file(cls, path, /, **overrides):
        """
        config file values, with overrides taking precedence

        Parameters
        ----------
        path : str or None
        **overrides : schema keys and values. None values are ignored

        Returns
        -------
        ExperimentConfig
        """
        params = read_config(path) if path is not None else {}
        params.update(dict((k, v) for k, v in overrides.items() if v is not None))
        return cls(**params)

    def to_text(self):
        """canonical ``key = value`` text, one line per schema key"""
        return '\n'.join('{} = {}'.format(key, _format_value(getattr(self, key)))
                         for key in SCHEMA) + '\n'

    def config_hash(self):
        return hashlib.sha256(self.to_text().encode('utf-8')).hexdigest()

    def _validate_params(self):
        """
        check and fill in data-independent defaults

        Raises
        ------
        ConfigError
        """
        if self.experiment not in EXPERIMENTS:
            raise ConfigError('experiment must be one of {}, but found {}'\
                              .format(sorted(EXPERIMENTS), repr(self.experiment)))
        if self.dataset not in DATASETS:
            raise ConfigError('dataset must be one of {}, but found {}'\
                              .format(DATASETS, repr(self.dataset)))
        if self.dataset in FILE_DATASETS:
            if self.path is None:
                raise ConfigError('dataset {} requires a path'.format(repr(self.dataset)))
            if not os.path.exists(self.path):
                raise ConfigError('dataset file {} does not exist'.format(self.path))

        if self.samplers is None:
            self.samplers = list(DEFAULT_SAMPLERS[self.experiment])
        unknown = [s for s in self.samplers if s not in SAMPLER_KINDS]
        if unknown:
            raise ConfigError('unknown sampler(s) {}'.format(unknown))
        # only the adaptive experiment calibrates V0 itself
        adaptive = [s for s in self.samplers if SAMPLER_KINDS[s][2]]
        if (self.experiment == 'fixed_batch' and adaptive
                and self.noise_threshold is None):
            raise ConfigError('sampler(s) {} need a noise_threshold in a '\
                              'fixed_batch experiment. Set noise_threshold or '\
                              'use experiment = adaptive'.format(adaptive))
        if self.step_size is None:
            self.step_size = DEFAULT_STEP_SIZES[self.dataset]
        if not self.fractions:
            raise ConfigError('fractions must not be empty')

        try:
            for f in self.fractions:
                check_param(f, param_name='fraction', dtype='float',
                            constraint=['> 0', '<= 1'])
            check_param(self.batch_fraction, 'batch_fraction', 'float',
                        ['> 0', '<= 1'])
            check_param(self.train_fraction, 'train_fraction', 'float',
                        ['> 0', '< 1'])
            check_param(self.step_size, 'step_size', 'float', '> 0')
            check_param(self.passes, 'passes', 'float', '> 0')
            check_param(self.noise_threshold, 'noise_threshold', 'float', '> 0',
                        allow_none=True)
            check_param(self.n_iter, 'n_iter', 'int', '>= 1', allow_none=True)
            for key in ['n_data', 'n_reps', 'n_candidates', 'n_chains', 'thin',
                        'n_windows', 'loss_every', 'mode_steps', 'pilot_iter',
                        'max_rows']:
                check_param(getattr(self, key), key, 'int', '>= 1')
            check_param(self.ksd_max_samples, 'ksd_max_samples', 'int', '>= 2')
        except (TypeError, ValueError) as error:
            raise ConfigError(str(error))


def load_problem(config):
    """
    build the target posterior of a config

    Parameters
    ----------
    config : ExperimentConfig

    Returns
    -------
    model : Model
    train : Dataset
    test : Dataset or None
    """
    if config.dataset in SYNTHETIC_KINDS:
        kwargs = {'prior': config.prior} if config.dataset == 'gaussian' else {}
        return generate_synthetic(config.dataset, config.n_data, seed=config.seed,
                                  **kwargs)

    fmt, response, n_features, model_cls = FILE_DATASETS[config.dataset]
    labels = 'binary' if model_cls is LogisticModel else 'real'
    data = load_dataset(config.path, fmt, response=response,
                        n_features=n_features, labels=labels,
                        standardize=config.standardize)
    if data.n_data > config.max_rows and not config.allow_large:
        rng = check_random_state(config.seed)
        keep = np.sort(rng.choice(data.n_data, size=config.max_rows, replace=False))
        logger.info('subsampling %s from %d to %d rows (set allow_large to keep all)',
                    config.dataset, data.n_data, config.max_rows)
        data = data.subset(keep)
    train, test = split_train_test(data, config.train_fraction, seed=config.seed)
    model = model_cls(train, prior_cov=10. * np.eye(train.n_features))
    return model, train, test


def find_mode(model, config):
    """
    posterior mode with Laplace covariance.

    the Gaussian posterior is quadratic, so its mode is the conjugate mean.
    other models use full-batch ADAM from zeros.

    Parameters
    ----------
    model : Model
    config : ExperimentConfig

    Returns
    -------
    ModeInfo
    """
    try:
        mean, _ = model.conjugate_posterior()
        return ModeInfo.from_model(model, mean, laplace=True)
    except UnsupportedModelError:
        pass
    return find_mode_adam(model, theta0=np.zeros(model.n_params),
                          n_steps=config.mode_steps, alpha=config.mode_alpha,
                          laplace=True, random_state=config.seed,
                          progress=config.progress, verbose=config.verbose)


def _chain_seed(config, chain):
    return config.seed + chain


def _row(config, sampler, chain, step, metric, value, batch_size=None,
         data_usage=None, wall_time=None):
    return ResultRow(config.experiment, sampler, chain, _chain_seed(config, chain),
                     step, metric, float(value), batch_size, data_usage,
                     wall_time if config.record_wall_time else None)


def _candidate_thetas(model, mode, config):
    """draws from the analytic posterior, or from the Laplace approximation"""
    rng = check_random_state(np.random.SeedSequence([config.seed, 1]))
    try:
        mean, cov = model.conjugate_posterior()
        return rng.multivariate_normal(mean, cov, size=config.n_candidates,
                                       method='cholesky')
    except UnsupportedModelError:
        return mode.sample_laplace(config.n_candidates, rng)


def run_variance_sweep(model, mode, config, test=None):
    """
    mean empirical pseudo-variance per (estimator, weights, fraction)

    every scheme sees the same random numbers for a given fraction and
    candidate theta.
    """
    thetas = _candidate_thetas(model, mode, config)
    schemes = [(kind, weights, True) for kind, weights in SWEEP_SCHEMES]
    if config.with_wor:
        schemes += [('naive', 'uniform', False), ('cv', 'uniform', False)]

    rows = []
    pbar = ProgressBar() if config.progress else lambda x: x
    for i, fraction in enumerate(pbar(config.fractions)):
        n = max(1, int(np.floor(fraction * model.n_data + 0.5)))
        for kind, weights, wr in schemes:
            values = []
            for c, theta in enumerate(thetas):
                dist = compute_weights(weights, model, theta=theta, mode=mode,
                                       verbose=config.verbose)
                seed = np.random.SeedSequence([config.seed, 2, i, c])
                values.append(pseudo_variance_empirical(
                    kind, model, theta, dist, n, mode=mode, n_reps=config.n_reps,
                    random_state=check_random_state(seed), with_replacement=wr))
            label = '{}:{}'.format(kind, weights) + ('' if wr else ':wor')
            rows.append(_row(config, label, 0, fraction, 'pseudo_variance',
                             np.mean(values), batch_size=n))
        logger.info('variance sweep fraction %s done', fraction)
    return rows


def _window_rows(config, trace, model, test, chain):
    """KSD, Gaussian KL and log-loss rows of one chain"""
    rows = []
    usage = trace.cumulative_usage
    wall = trace.wall_time
    ksd_config = KsdConfig(max_samples=config.ksd_max_samples,
                           verbose=config.verbose)
    reference = None
    if model.kind == 'gaussian':
        reference = model.conjugate_posterior()

    n_windows = min(config.n_windows, trace.n_samples)
    for window in np.array_split(np.arange(trace.n_samples), n_windows):
        step = int(trace.iterations[window[-1]])
        meta = dict(batch_size=int(trace.batch_sizes[step - 1]),
                    data_usage=int(usage[step - 1]), wall_time=wall)
        samples = trace.samples[window]
        rows.append(_row(config, trace.kind, chain, step, 'ksd',
                         float(ksd(samples, model, ksd_config)), **meta))
        if reference is not None and len(samples) > model.n_params:
            cov = np.atleast_2d(np.cov(samples, rowvar=False))
            rows.append(_row(config, trace.kind, chain, step, 'kl',
                             kl_gaussian(samples.mean(axis=0), cov, *reference),
                             **meta))

    if model.kind == 'logistic' and test is not None:
        for k in np.flatnonzero(trace.iterations % config.loss_every == 0):
            step = int(trace.iterations[k])
            rows.append(_row(config, trace.kind, chain, step, 'log_loss',
                             log_loss(trace.samples[k], test),
                             batch_size=int(trace.batch_sizes[step - 1]),
                             data_usage=int(usage[step - 1]), wall_time=wall))
    return rows


def _run_chains(model, mode, config, test, make_sampler, extra_rows=None):
    rows = []
    for chain in range(config.n_chains):
        for kind in config.samplers:
            sampler = make_sampler(kind, _chain_seed(config, chain))
            try:
                trace = sampler.run(model, mode=mode)
            except DivergenceError as error:
                logger.warning('%s chain %d diverged at iteration %s',
                               kind, chain, error.step)
                rows.append(_row(config, kind, chain, error.step, 'diverged',
                                 error.step))
                continue
            logger.info('%s chain %d: %d samples, %.3f passes',
                        kind, chain, trace.n_samples, trace.passes)
            rows.extend(_window_rows(config, trace, model, test, chain))
            if extra_rows is not None:
                rows.extend(extra_rows(trace, chain))
    return rows


def _n_iter(config):
    if config.n_iter is not None:
        return config.n_iter
    return max(1, int(np.floor(config.passes / config.batch_fraction + 0.5)))


def _batch_size(model, config):
    return max(1, int(np.ceil(config.batch_fraction * model.n_data)))


def run_fixed_batch(model, mode, config, test=None):
    """multi-chain runs of fixed subsample size samplers"""
    n = _batch_size(model, config)
    T = _n_iter(config)
    logger.info('fixed batch: n = %d, T = %d', n, T)

    def make_sampler(kind, seed):
        return Sampler(kind=kind, step_size=config.step_size, n_iter=T,
                       batch_size=n, noise_threshold=config.noise_threshold,
                       seed=seed, thin=config.thin, callbacks=[],
                       progress=config.progress, verbose=config.verbose)

    return _run_chains(model, mode, config, test, make_sampler)


def run_adaptive(model, mode, config, test=None):
    """fixed against adaptive subsample sizes, with a calibrated noise threshold"""
    n = _batch_size(model, config)
    T = _n_iter(config)
    V0 = config.noise_threshold
    if V0 is None:
        V0 = calibrate_noise_threshold(model, mode, config.step_size,
                                       batch_size=n, n_iter=config.pilot_iter,
                                       seed=config.seed, progress=config.progress,
                                       verbose=config.verbose)
    logger.info('adaptive: n = %d, T = %d, V0 = %r', n, T, V0)
    rows = [_row(config, 'calibration', 0, 0, 'noise_threshold', V0)]

    def make_sampler(kind, seed):
        return Sampler(kind=kind, step_size=config.step_size, n_iter=T,
                       batch_size=n, noise_threshold=V0, seed=seed,
                       thin=config.thin, callbacks=[],
                       progress=config.progress, verbose=config.verbose)

    def usage_rows(trace, chain):
        usage = trace.cumulative_usage
        return [_row(config, trace.kind, chain, t + 1, 'passes',
                     usage[t] / model.n_data,
                     batch_size=int(trace.batch_sizes[t]),
                     data_usage=int(usage[t]), wall_time=trace.wall_time)
                for t in range(len(usage))]

    return rows + _run_chains(model, mode, config, test, make_sampler,
                              extra_rows=usage_rows)


EXPERIMENTS = {'variance_sweep': run_variance_sweep,
               'fixed_batch': run_fixed_batch,
               'adaptive': run_adaptive,
               }


def results_frame(rows):
    """
    rows as a DataFrame, ordered by chain then step

    Parameters
    ----------
    rows : list of ResultRow

    Returns
    -------
    pandas.DataFrame
    """
    frame = pd.DataFrame(rows, columns=ResultRow._fields)
    return frame.sort_values(['chain', 'step'], kind='mergesort')\
                .reset_index(drop=True)


def write_results(frame, config, path):
    """
    write the results CSV and the run metadata JSON next to it

    Parameters
    ----------
    frame : pandas.DataFrame
    config : ExperimentConfig
    path : str
        CSV path. the metadata goes to the same path with a .json suffix

    Returns
    -------
    None
    """
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    frame.to_csv(path, index=False, encoding='utf-8')

    from pysgld import __version__
    meta = {'config': config.to_text(),
            'config_hash': config.config_hash(),
            'seeds': [_chain_seed(config, c) for c in range(config.n_chains)],
            'n_rows': int(len(frame)),
            'versions': {'pysgld': __version__,
                         'numpy': np.__version__,
                         'scipy': scipy.__version__,
                         'pandas': pd.__version__},
            }
    with open(os.path.splitext(path)[0] + '.json', 'w') as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    logger.info('wrote %d rows to %s', len(frame), path)


def run_experiment(config):
    """
    run one experiment family end to end

    Parameters
    ----------
    config : ExperimentConfig

    Returns
    -------
    pandas.DataFrame of ResultRow records. also written to
    <config.out>/<experiment>.csv when config.out is set
    """
    config._validate_params()
    logger.info('experiment %s on %s (config %s)', config.experiment,
                config.dataset, config.config_hash()[:12])
    model, train, test = load_problem(config)
    mode = find_mode(model, config)
    rows = EXPERIMENTS[config.experiment](model, mode, config, test=test)
    frame = results_frame(rows)
    if config.out is not None:
        write_results(frame, config,
                      os.path.join(config.out, config.experiment + '.csv'))
    return frame
