"""
command line interface
"""

from __future__ import absolute_import, print_function
import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

from pysgld.experiments import ExperimentConfig
from pysgld.experiments import load_problem
from pysgld.experiments import find_mode
from pysgld.experiments import run_experiment
from pysgld.experiments import _batch_size
from pysgld.experiments import _n_iter
from pysgld.experiments import _parse_value
from pysgld.subsampling import WEIGHT_SCHEMES
from pysgld.subsampling import compute_weights
from pysgld.samplers import Sampler
from pysgld.samplers import SAMPLER_KINDS
from pysgld.samplers import calibrate_noise_threshold
from pysgld.diagnostics import KsdConfig
from pysgld.diagnostics import ksd
from pysgld.utils import DivergenceError


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2

# command line flag -> config key
OVERRIDES = [('--dataset', 'dataset', str),
             ('--path', 'path', str),
             ('--n-data', 'n_data', int),
             ('--step-size', 'step_size', float),
             ('--n-iter', 'n_iter', int),
             ('--passes', 'passes', float),
             ('--batch-fraction', 'batch_fraction', float),
             ('--n-chains', 'n_chains', int),
             ('--n-reps', 'n_reps', int),
             ('--samplers', 'samplers', str),
             ('--fractions', 'fractions', str),
             ('--noise-threshold', 'noise_threshold', float),
             ('--pilot-iter', 'pilot_iter', int),
             ('--mode-steps', 'mode_steps', int),
             ]


def _add_common(parser):
    parser.add_argument('--config', default=None,
                        help='flat key = value config file')
    parser.add_argument('--seed', type=int, default=None, help='master seed')
    parser.add_argument('--out', default=None, help='output directory')
    parser.add_argument('--verbose', action='store_true', default=None,
                        help='log progress and show warnings')
    parser.add_argument('--allow-large', action='store_true', default=None,
                        help='use file datasets at full size')
    for flag, key, dtype in OVERRIDES:
        parser.add_argument(flag, dest=key, type=dtype, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='pysgld',
        description='SGLD with preferential subsampling and adaptive batch sizes')
    sub = parser.add_subparsers(dest='command')

    for name, help_text in [('generate', 'write a synthetic dataset as CSV'),
                            ('mode', 'find the posterior mode'),
                            ('weights', 'write a subsampling distribution'),
                            ('variance-sweep', 'pseudo-variance against subsample size'),
                            ('fixed-batch', 'compare fixed subsample size samplers'),
                            ('sample', 'run one chain'),
                            ('calibrate', 'choose the adaptive noise threshold'),
                            ('adaptive', 'compare fixed and adaptive subsample sizes'),
                            ('ksd', 'kernel Stein discrepancy of a chain CSV')]:
        command = sub.add_parser(name, help=help_text)
        _add_common(command)
        if name == 'weights':
            command.add_argument('--scheme', choices=sorted(WEIGHT_SCHEMES),
                                 default='cv_approx')
        if name == 'sample':
            command.add_argument('--sampler', choices=sorted(SAMPLER_KINDS),
                                 default='sgld')
        if name == 'ksd':
            command.add_argument('--chain', required=True, help='chain CSV')
            command.add_argument('--burn-in', type=float, default=0.,
                                 help='fraction of rows to drop')
    return parser


def _config(args, **fixed):
    overrides = dict((key, getattr(args, key)) for _, key, _ in OVERRIDES)
    for key in ['samplers', 'fractions']:
        if overrides[key] is not None:
            overrides[key] = _parse_value(key, overrides[key])
    overrides.update(seed=args.seed, out=args.out, verbose=args.verbose,
                     allow_large=args.allow_large)
    overrides.update(fixed)
    config = ExperimentConfig.from_file(args.config, **overrides)
    config._validate_params()
    return config


def _out_path(config, filename):
    out = config.out if config.out is not None else '.'
    if not os.path.exists(out):
        os.makedirs(out)
    return os.path.join(out, filename)


def _data_frame(data, intercept):
    X = data.X[:, 1:] if intercept else data.X
    frame = pd.DataFrame(X, columns=['x{}'.format(j + 1) for j in range(X.shape[1])])
    if data.y is not None:
        frame['y'] = data.y
    return frame


def cmd_generate(config, args):
    model, train, test = load_problem(config)
    intercept = model.kind != 'gaussian'
    _data_frame(train, intercept).to_csv(_out_path(config, 'train.csv'), index=False)
    if test is not None:
        _data_frame(test, intercept).to_csv(_out_path(config, 'test.csv'), index=False)
    print('wrote {} training rows'.format(train.n_data))


def cmd_mode(config, args):
    model, _, _ = load_problem(config)
    mode = find_mode(model, config)
    result = {'mode': mode.mode.tolist(),
              'grad_norm': float(np.linalg.norm(mode.grad_sum)),
              'laplace_cov': mode.laplace_cov.tolist()}
    with open(_out_path(config, 'mode.json'), 'w') as f:
        json.dump(result, f, indent=2)
    print('mode: {}'.format(result['mode']))


def cmd_weights(config, args):
    model, _, _ = load_problem(config)
    mode = find_mode(model, config)
    dist = compute_weights(args.scheme, model, theta=mode.mode, mode=mode,
                           allow_large=config.allow_large, verbose=config.verbose)
    path = _out_path(config, 'weights_{}.csv'.format(args.scheme))
    dist.to_frame().to_csv(path, index=False)
    print('wrote {} weights to {}'.format(dist.n_data, path))


def _noise_threshold(model, mode, config):
    if config.noise_threshold is not None:
        return config.noise_threshold
    return calibrate_noise_threshold(model, mode, config.step_size,
                                     batch_size=_batch_size(model, config),
                                     n_iter=config.pilot_iter, seed=config.seed,
                                     verbose=config.verbose)


def cmd_sample(config, args):
    model, _, _ = load_problem(config)
    mode = find_mode(model, config)
    V0 = None
    if SAMPLER_KINDS[args.sampler][2]:
        V0 = _noise_threshold(model, mode, config)
    trace = Sampler(kind=args.sampler, step_size=config.step_size,
                    n_iter=_n_iter(config), batch_size=_batch_size(model, config),
                    noise_threshold=V0, seed=config.seed, thin=config.thin,
                    progress=config.progress, verbose=config.verbose)\
            .run(model, mode=mode)
    path = _out_path(config, 'chain_{}.csv'.format(args.sampler))
    trace.to_csv(path)
    print('wrote {} samples, {:.4f} passes, to {}'\
          .format(trace.n_samples, trace.passes, path))


def cmd_calibrate(config, args):
    model, _, _ = load_problem(config)
    mode = find_mode(model, config)
    V0, proposals = calibrate_noise_threshold(
        model, mode, config.step_size, batch_size=_batch_size(model, config),
        n_iter=config.pilot_iter, seed=config.seed, return_proposals=True,
        verbose=config.verbose)
    pd.DataFrame({'chain': np.arange(len(proposals)), 'proposal': proposals})\
      .to_csv(_out_path(config, 'calibration.csv'), index=False)
    print('noise threshold: {!r}'.format(V0))


def cmd_ksd(config, args):
    model, _, _ = load_problem(config)
    frame = pd.read_csv(args.chain)
    columns = [c for c in frame.columns if c.startswith('theta_')]
    if len(columns) != model.n_params:
        raise ValueError('chain has {} parameters but the model has {}'\
                         .format(len(columns), model.n_params))
    samples = frame[columns].values
    samples = samples[int(np.floor(args.burn_in * len(samples))):]
    result = ksd(samples, model,
                 KsdConfig(max_samples=config.ksd_max_samples,
                           verbose=config.verbose))
    print('ksd: {!r} ({} samples{})'.format(result.value, result.n_samples,
                                            ', clamped' if result.clamped else ''))


def _experiment(name):
    def command(config, args):
        frame = run_experiment(config)
        print('{}: {} rows'.format(name, len(frame)))
    return command


COMMANDS = {'generate': (cmd_generate, None),
            'mode': (cmd_mode, None),
            'weights': (cmd_weights, None),
            'variance-sweep': (_experiment('variance_sweep'), 'variance_sweep'),
            'fixed-batch': (_experiment('fixed_batch'), 'fixed_batch'),
            'sample': (cmd_sample, None),
            'calibrate': (cmd_calibrate, None),
            'adaptive': (_experiment('adaptive'), 'adaptive'),
            'ksd': (cmd_ksd, None),
            }


def main(argv=None):
    """
    entry point of the pysgld command

    Parameters
    ----------
    argv : list of str, default: None
        arguments after the program name. sys.argv[1:] if None

    Returns
    -------
    int exit code: 0 on success, 1 on configuration or input errors,
    2 on numerical divergence
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')
    command, experiment = COMMANDS[args.command]
    try:
        fixed = {'experiment': experiment} if experiment is not None else {}
        config = _config(args, **fixed)
        command(config, args)
    except DivergenceError as error:
        logger.error('diverged: %s', error)
        return EXIT_DIVERGED
    except (ValueError, TypeError, IOError) as error:
        logger.error('%s', error)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
