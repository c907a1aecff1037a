# -*- coding: utf-8 -*-

import json
import os

import numpy as np
import pandas as pd
import pytest

from pysgld.cli import main
from pysgld.cli import build_parser
from pysgld.cli import EXIT_OK
from pysgld.cli import EXIT_CONFIG
from pysgld.cli import EXIT_DIVERGED


@pytest.fixture
def out(tmp_path):
    return str(tmp_path / 'out')

def _gaussian(out, *extra):
    return ['--dataset', 'gaussian', '--n-data', '200', '--seed', '1',
            '--out', out] + list(extra)


def test_no_command_prints_help(capsys):
    assert(main([]) == EXIT_CONFIG)
    assert('usage' in capsys.readouterr().out)

def test_generate(out):
    """logistic data comes out with features, response and a test split"""
    argv = ['generate', '--dataset', 'logistic_balanced', '--n-data', '100',
            '--out', out]
    assert(main(argv) == EXIT_OK)
    train = pd.read_csv(os.path.join(out, 'train.csv'))
    test = pd.read_csv(os.path.join(out, 'test.csv'))
    assert(list(train.columns) == ['x1', 'x2', 'x3', 'x4', 'y'])
    assert((len(train), len(test)) == (100, 50))

def test_generate_gaussian_has_no_test_split(out):
    assert(main(['generate'] + _gaussian(out)) == EXIT_OK)
    assert(list(pd.read_csv(os.path.join(out, 'train.csv')).columns) == ['x1', 'x2'])
    assert(not os.path.exists(os.path.join(out, 'test.csv')))

def test_mode(out):
    assert(main(['mode'] + _gaussian(out)) == EXIT_OK)
    with open(os.path.join(out, 'mode.json')) as f:
        result = json.load(f)
    assert(len(result['mode']) == 2)
    assert(np.array(result['laplace_cov']).shape == (2, 2))

def test_weights(out):
    argv = ['weights', '--scheme', 'ps_approx'] + _gaussian(out)
    assert(main(argv) == EXIT_OK)
    frame = pd.read_csv(os.path.join(out, 'weights_ps_approx.csv'))
    assert(len(frame) == 200)
    assert(np.isclose(frame['weight'].sum(), 1.))

def test_sample_then_ksd(out, capsys):
    """a sampled chain can be scored from its CSV"""
    argv = ['sample', '--sampler', 'sgld_cv', '--n-iter', '50'] + _gaussian(out)
    assert(main(argv) == EXIT_OK)
    chain = os.path.join(out, 'chain_sgld_cv.csv')
    frame = pd.read_csv(chain)
    assert(len(frame) == 50)
    assert('theta_1' in frame.columns)

    argv = ['ksd', '--chain', chain, '--burn-in', '0.5'] + _gaussian(out)
    assert(main(argv) == EXIT_OK)
    assert('ksd:' in capsys.readouterr().out)

def test_ksd_rejects_mismatched_chain(out, tmp_path):
    chain = str(tmp_path / 'chain.csv')
    pd.DataFrame({'theta_0': [0., 1.]}).to_csv(chain, index=False)
    argv = ['ksd', '--chain', chain] + _gaussian(out)
    assert(main(argv) == EXIT_CONFIG)

def test_sample_adaptive_calibrates(out):
    argv = ['sample', '--sampler', 'asgld_cv', '--n-iter', '30',
            '--pilot-iter', '20'] + _gaussian(out)
    assert(main(argv) == EXIT_OK)
    frame = pd.read_csv(os.path.join(out, 'chain_asgld_cv.csv'))
    assert((frame['batch_size'] >= 1).all())

def test_calibrate(out, capsys):
    argv = ['calibrate', '--pilot-iter', '20'] + _gaussian(out)
    assert(main(argv) == EXIT_OK)
    frame = pd.read_csv(os.path.join(out, 'calibration.csv'))
    assert(len(frame) == 10)
    assert('noise threshold' in capsys.readouterr().out)

def test_variance_sweep_from_config_file(out, tmp_path):
    """config file values are used and flags override them"""
    config = tmp_path / 'sweep.cfg'
    config.write_text(u'dataset = gaussian\nn_data = 100\nfractions = 0.1\n'
                      u'n_reps = 10\nn_candidates = 2\nseed = 9\n')
    argv = ['variance-sweep', '--config', str(config), '--n-data', '150',
            '--out', out]
    assert(main(argv) == EXIT_OK)
    frame = pd.read_csv(os.path.join(out, 'variance_sweep.csv'))
    assert(set(frame['batch_size']) == {15})
    with open(os.path.join(out, 'variance_sweep.json')) as f:
        assert('seed = 9' in json.load(f)['config'])

def test_fixed_batch(out):
    argv = ['fixed-batch', '--samplers', 'sgld,sgld_cv', '--n-iter', '20',
            '--batch-fraction', '0.05'] + _gaussian(out)
    assert(main(argv) == EXIT_OK)
    frame = pd.read_csv(os.path.join(out, 'fixed_batch.csv'))
    assert(set(frame['sampler']) == {'sgld', 'sgld_cv'})

def test_fixed_batch_adaptive_needs_threshold(out):
    argv = ['fixed-batch', '--samplers', 'sgld,asgld_cv', '--n-iter', '20']
    assert(main(argv + _gaussian(out)) == EXIT_CONFIG)
    assert(not os.path.exists(os.path.join(out, 'fixed_batch.csv')))

def test_bad_dataset_is_a_config_error(out):
    argv = ['sample', '--dataset', 'mnist', '--out', out]
    assert(main(argv) == EXIT_CONFIG)

def test_missing_config_file_is_a_config_error(out, tmp_path):
    argv = ['mode', '--config', str(tmp_path / 'missing.cfg'), '--out', out]
    assert(main(argv) == EXIT_CONFIG)

def test_divergence_exit_code(out):
    argv = ['sample', '--dataset', 'linear', '--n-data', '100',
            '--step-size', '10', '--n-iter', '2000', '--batch-fraction', '0.1',
            '--mode-steps', '100', '--out', out]
    assert(main(argv) == EXIT_DIVERGED)

def test_parser_rejects_unknown_choices():
    with pytest.raises(SystemExit):
        build_parser().parse_args(['weights', '--scheme', 'importance'])
