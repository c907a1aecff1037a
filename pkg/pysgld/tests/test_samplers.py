# -*- coding: utf-8 -*-

import numpy as np
import pytest

from pysgld import samplers
from pysgld.samplers import *
from pysgld.datasets import generate_synthetic
from pysgld.diagnostics import gaussian_kl_trace
from pysgld.diagnostics import ksd
from pysgld.models import Dataset
from pysgld.models import LinearModel
from pysgld.models import LogisticModel
from pysgld.models import ModeInfo
from pysgld.subsampling import compute_weights
from pysgld.tests.conftest import make_logistic
from pysgld.utils import DivergenceError


class ZeroGradientModel(LinearModel):
    def grads(self, theta, idx=None):
        idx = self._check_indices(idx)
        return np.zeros_like(self.data.X[idx])

    def grad_prior(self, theta):
        return np.zeros(self.n_params)


class NanGradientModel(LinearModel):
    def grads(self, theta, idx=None):
        idx = self._check_indices(idx)
        return np.full_like(self.data.X[idx], np.nan)


@pytest.fixture(scope='module')
def large_gaussian():
    model, _, _ = generate_synthetic('gaussian', 10000, seed=5)
    mean, cov = model.conjugate_posterior()
    return model, ModeInfo.from_model(model, mean, laplace=True), mean, cov


def test_update_step_without_noise():
    """(1, 1) - (1 / 2) (2, 2) = (0, 0)"""
    out = sgld_update_step(np.ones(2), np.full(2, 2.), 1., noise=False)
    assert(np.array_equal(out, np.zeros(2)))
    out = sgld_update_step(np.ones(2), np.zeros(2), 0.3, noise=False)
    assert(np.array_equal(out, np.ones(2)))

def test_update_step_noise_variance():
    """injected noise has variance step_size per coordinate"""
    n = 100000
    out = sgld_update_step(np.zeros(n), np.zeros(n), 0.01, random_state=0)
    # standard error of a sample variance is about sqrt(2 / n) of its value
    assert(abs(out.var() - 0.01) < 4 * np.sqrt(2. / n) * 0.01)
    with pytest.raises(ValueError):
        sgld_update_step(np.zeros(2), np.zeros(2), 0.)

def test_adaptive_batch_size_examples():
    """n = floor(||theta - mode||^2 sum L^2/p / V0) + 1, clamped"""
    mode = np.zeros(2)
    assert(adaptive_batch_size(np.zeros(2), mode, 10., 1.) == 1)
    assert(adaptive_batch_size(np.zeros(2), mode, 10., 1., n_min=3) == 3)
    assert(adaptive_batch_size(np.array([1., 0.]), mode, 10., 10.) == 2)
    assert(adaptive_batch_size(np.array([1., 0.]), mode, 10., 0.15) == 67)
    assert(adaptive_batch_size(np.array([1e3, 0.]), mode, 10., 1e-12,
                               n_max=50) == 50)
    with pytest.raises(ValueError):
        adaptive_batch_size(np.zeros(2), mode, 10., 0.)

def test_adaptive_batch_size_monotone_in_threshold():
    """a larger noise threshold never asks for more data"""
    theta = np.array([0.3, -0.2])
    sizes = [adaptive_batch_size(theta, np.zeros(2), 50., v0)
             for v0 in np.logspace(-4, 2, 30)]
    assert((np.diff(sizes) <= 0).all())

def test_adaptive_batch_size_non_finite_state():
    """a NaN state is a divergence, not a request for all the data"""
    theta = np.array([np.nan, 0.])
    with pytest.raises(DivergenceError):
        adaptive_batch_size(theta, np.zeros(2), 16., 16., n_max=50)
    with pytest.raises(DivergenceError):
        adaptive_batch_size(np.array([np.inf, 0.]), np.zeros(2), 16., 16.)

def test_ula_single_step(linear_model):
    """one noise-free full-data step is gradient descent with rate step / 2"""
    theta0 = np.full(4, 0.2)
    trace = ULA(step_size=0.01, n_iter=1, noise=False, callbacks=[])\
            .run(linear_model, theta0=theta0)
    expected = theta0 - 0.005 * linear_model.full_grad(theta0)
    assert(np.allclose(trace.samples[0], expected))
    assert(trace.batch_sizes.tolist() == [linear_model.n_data])

def test_chains_are_reproducible(logistic_model, logistic_mode):
    """a fixed seed gives bitwise identical chains"""
    for kind in ['sgld', 'sgld_cv', 'sgld_ps', 'sgld_cv_ps']:
        a = Sampler(kind=kind, step_size=1e-3, n_iter=50, batch_size=3,
                    seed=11).run(logistic_model, mode=logistic_mode)
        b = Sampler(kind=kind, step_size=1e-3, n_iter=50, batch_size=3,
                    seed=11).run(logistic_model, mode=logistic_mode)
        assert(np.array_equal(a.samples, b.samples))

def test_uniform_weights_reduce_to_uniform_samplers(logistic_model, logistic_mode):
    """with uniform weights the weighted kinds follow the same chain bitwise"""
    pairs = [('sgld_ps', 'sgld'), ('sgld_cv_ps', 'sgld_cv')]
    for weighted, plain in pairs:
        a = Sampler(kind=weighted, weights='uniform', step_size=1e-3, n_iter=50,
                    batch_size=3, seed=7).run(logistic_model, mode=logistic_mode)
        b = Sampler(kind=plain, step_size=1e-3, n_iter=50, batch_size=3,
                    seed=7).run(logistic_model, mode=logistic_mode)
        assert(np.array_equal(a.samples, b.samples))

def test_fixed_batch_usage(logistic_model, logistic_mode):
    """fixed-size kinds use T n gradient terms"""
    trace = SGLDCVPS(step_size=1e-3, n_iter=40, batch_size=3, seed=0)\
            .run(logistic_model, mode=logistic_mode)
    assert(trace.data_usage == 120)
    assert(np.isclose(trace.passes, 120. / 50))
    assert(trace.cumulative_usage[-1] == 120)

def test_exact_weights_are_recomputed(logistic_model, logistic_mode):
    """exact schemes run and stay reproducible"""
    kwargs = dict(kind='sgld_cv_ps', weights='cv_exact', step_size=1e-3,
                  n_iter=20, batch_size=2, seed=3, init=np.ones(5))
    a = Sampler(**kwargs).run(logistic_model, mode=logistic_mode)
    b = Sampler(**kwargs).run(logistic_model, mode=logistic_mode)
    assert(np.array_equal(a.samples, b.samples))

def test_thinning():
    model, _, _ = generate_synthetic('gaussian', 20, seed=0)
    trace = SGLD(step_size=1e-3, n_iter=10, batch_size=2, thin=3, seed=0)\
            .run(model)
    assert(trace.iterations.tolist() == [3, 6, 9])
    assert(trace.n_samples == 3)
    assert(len(trace.batch_sizes) == 10)

def test_trace_frame(logistic_model, logistic_mode):
    trace = SGLDCV(step_size=1e-3, n_iter=6, batch_size=2, seed=9)\
            .run(logistic_model, mode=logistic_mode)
    frame = trace.to_frame()
    assert(list(frame.columns) == ['seed', 'iteration'] + \
           ['theta_{}'.format(j) for j in range(5)] + \
           ['batch_size', 'cumulative_data_usage'])
    assert(frame['cumulative_data_usage'].tolist() == [2, 4, 6, 8, 10, 12])
    assert(trace.burn_in(0.5).n_samples == 3)

def test_adaptive_batch_sizes_replay(logistic_model, logistic_mode):
    """every adaptive size is reproduced from the state before the update"""
    dist = compute_weights('cv_approx', logistic_model, mode=logistic_mode)
    theta0 = logistic_mode.mode + 0.5
    trace = ASGLDCVPS(step_size=1e-3, n_iter=200, noise_threshold=5., seed=2)\
            .run(logistic_model, mode=logistic_mode, dist=dist, theta0=theta0)

    states = np.vstack([trace.theta0, trace.samples[:-1]])
    lsum = dist.lipschitz_sum(logistic_model.lipschitz_constants())
    replay = [adaptive_batch_size(s, logistic_mode, lsum, 5., n_min=1, n_max=50)
              for s in states]
    assert(trace.batch_sizes.tolist() == replay)
    assert(trace.batch_sizes.max() > 1)

def test_sampler_validation(logistic_model, logistic_mode):
    with pytest.raises(ValueError):
        Sampler(kind='hmc').run(logistic_model)
    with pytest.raises(ValueError):
        Sampler(kind='sgld', batch_size=51).run(logistic_model)
    with pytest.raises(ValueError):
        Sampler(kind='sgld', batch_size=2, weights='ps_approx')\
            .run(logistic_model, mode=logistic_mode)
    with pytest.raises(ValueError):
        Sampler(kind='sgld_cv', batch_size=2).run(logistic_model)
    with pytest.raises((TypeError, ValueError)):
        Sampler(kind='asgld_cv').run(logistic_model, mode=logistic_mode)
    with pytest.raises(ValueError):
        Sampler(kind='sgld', batch_size=2, init='random').run(logistic_model)

def test_divergence_is_reported(linear_model):
    """a step far beyond the stability limit diverges"""
    with pytest.raises(DivergenceError) as excinfo:
        ULA(step_size=10., n_iter=2000, seed=0).run(linear_model)
    assert(excinfo.value.step is not None)

def test_run_chain_from_dict(logistic_model, logistic_mode):
    params = dict(kind='sgld_ps', step_size=1e-3, n_iter=5, batch_size=2, seed=1)
    a = run_chain(logistic_model, params, mode=logistic_mode)
    b = run_chain(logistic_model, Sampler(**params), mode=logistic_mode)
    assert(np.array_equal(a.samples, b.samples))

def test_sampler_classes_match_kinds():
    for kind, cls in SAMPLERS.items():
        assert(cls().kind == kind)

def test_adam_zero_gradient():
    """a zero gradient leaves theta where it started"""
    model = ZeroGradientModel(Dataset(np.ones((3, 2)), np.zeros(3)))
    mode = find_mode_adam(model, theta0=[0.3, -0.1], n_steps=50)
    assert(np.array_equal(mode.mode, [0.3, -0.1]))

def _two_stage_adam(model, theta0):
    # a coarse rate covers the distance, a fine rate settles within its
    # oscillation, which scales with alpha
    coarse = find_mode_adam(model, theta0=theta0, n_steps=5000, alpha=1e-2)
    fine = find_mode_adam(model, theta0=coarse.mode, n_steps=10000, alpha=1e-4)
    return coarse, fine

def test_adam_finds_gaussian_mean(gaussian_model, gaussian_mode):
    """from 10 units out, ADAM reaches the conjugate posterior mean"""
    theta0 = gaussian_mode.mode + 10.
    coarse, fine = _two_stage_adam(gaussian_model, theta0)
    assert(np.linalg.norm(coarse.mode - gaussian_mode.mode) < 0.1)
    assert(np.linalg.norm(fine.mode - gaussian_mode.mode) < 1e-3)

def test_adam_matches_newton_on_logistic():
    """ADAM agrees with a Newton solve of the full-data mode"""
    model = make_logistic(n_data=100, n_features=2, seed=3)
    newton = np.zeros(model.n_params)
    for _ in range(50):
        newton = newton - np.linalg.solve(model.information(newton),
                                          model.full_grad(newton))
    assert(np.linalg.norm(model.full_grad(newton)) < 1e-10)

    coarse, fine = _two_stage_adam(model, newton + 10.)
    assert(np.linalg.norm(coarse.mode - newton) < 0.1)
    assert(np.linalg.norm(fine.mode - newton) < 1e-3)

def test_adam_logistic_gradient_norm():
    """the full gradient nearly vanishes at the returned mode"""
    rng = np.random.default_rng(0)
    X = 0.1 * rng.standard_normal((100, 3))
    y = (rng.random(100) < 0.5).astype('float')
    model = LogisticModel(Dataset(X, y))
    mode = find_mode_adam(model, n_steps=10000, alpha=1e-3, laplace=True)
    assert(np.linalg.norm(mode.grad_sum) <= 1e-2)
    assert(mode.laplace_cov.shape == (3, 3))

def test_adam_stochastic_gradients_are_reproducible(logistic_model):
    a = find_mode_adam(logistic_model, batch_size=5, n_steps=100, random_state=0)
    b = find_mode_adam(logistic_model, batch_size=5, n_steps=100, random_state=0)
    assert(np.array_equal(a.mode, b.mode))

def test_adam_divergence():
    model = NanGradientModel(Dataset(np.ones((3, 2)), np.zeros(3)))
    with pytest.raises(DivergenceError) as excinfo:
        find_mode_adam(model, theta0=np.zeros(2), n_steps=10)
    assert(excinfo.value.step == 0)

def test_propose_noise_threshold():
    """95th percentile of 1..100 with linear interpolation is 95.05"""
    value = propose_noise_threshold(np.arange(1., 101.), 10, 10.)
    assert(np.isclose(value, 95.05))

def test_calibration_takes_largest_proposal(logistic_model, logistic_mode):
    V0, proposals = calibrate_noise_threshold(
        logistic_model, logistic_mode, 1e-3, n_iter=50, seed=0,
        pilot_kinds=['sgld_cv', 'sgld_cv_ps', 'sgld_cv'], return_proposals=True)
    assert(len(proposals) == 3)
    assert(V0 == max(proposals))
    again = calibrate_noise_threshold(
        logistic_model, logistic_mode, 1e-3, n_iter=50, seed=0,
        pilot_kinds=['sgld_cv', 'sgld_cv_ps', 'sgld_cv'])
    assert(again == V0)

def test_calibration_floor(logistic_model, logistic_mode, monkeypatch):
    """a zero proposal is raised to the floor"""
    monkeypatch.setattr(samplers, 'propose_noise_threshold',
                        lambda *args, **kwargs: 0.)
    V0 = calibrate_noise_threshold(logistic_model, logistic_mode, 1e-3, n_iter=5,
                                   pilot_kinds=['sgld_cv'], seed=0)
    assert(V0 == V0_MIN)

def test_sgld_ps_recovers_gaussian_posterior(large_gaussian):
    """the second half of a long chain matches the conjugate posterior"""
    model, mode, mean, cov = large_gaussian
    trace = SGLDPS(step_size=0.5, n_iter=20000, batch_size=1000, seed=0,
                   init='mode', callbacks=[]).run(model, mode=mode)
    sample_mean, sample_cov = trace.burn_in(0.5).moments()
    sd = np.sqrt(np.diag(cov))
    assert((np.abs(sample_mean - mean) < 10 * sd).all())
    ratio = np.diag(sample_cov) / np.diag(cov)
    assert(((ratio > 0.5) & (ratio < 2.)).all())

def test_kl_decreases_with_preferential_subsampling(large_gaussian):
    """over 500 passes at step 1e-4, the last quarter of every chain is
    closer to the posterior than the first"""
    model, mode, mean, cov = large_gaussian
    # start 100 units out along the best determined posterior direction
    _, vecs = np.linalg.eigh(cov)
    theta0 = mean + 100. * vecs[:, 0]
    for seed in range(10):
        trace = SGLDPS(step_size=1e-4, n_iter=5000, batch_size=1000, seed=seed,
                       callbacks=[]).run(model, mode=mode, theta0=theta0)
        assert(np.isclose(trace.passes, 500.))
        kl = gaussian_kl_trace(trace, mean, cov, n_windows=4)
        assert(kl[-1] < kl[0])

def test_noise_free_full_batch_decreases_energy(logistic_model):
    """without noise, small full-data steps never increase -log posterior"""
    trace = ULA(step_size=0.01, n_iter=200, noise=False, callbacks=[])\
            .run(logistic_model, theta0=np.full(5, 2.))
    energy = [logistic_model.neg_log_posterior(s) for s in trace.samples]
    assert((np.diff(energy) <= 1e-12).all())
    assert(energy[-1] < logistic_model.neg_log_posterior(np.full(5, 2.)))

@pytest.fixture(scope='module')
def balanced_logistic():
    model, _, _ = generate_synthetic('logistic_balanced', 10000, seed=0)
    mode = find_mode_adam(model, n_steps=3000, alpha=5e-3, laplace=True)
    dist = compute_weights('cv_approx', model, mode=mode)
    V0 = calibrate_noise_threshold(model, mode, 1e-4, dist=dist, seed=0)
    return model, mode, dist, V0

def test_adaptive_chain_replays_batch_sizes(balanced_logistic):
    model, mode, dist, V0 = balanced_logistic
    trace = ASGLDCVPS(step_size=1e-4, n_iter=2000, noise_threshold=V0, seed=1,
                      callbacks=[]).run(model, mode=mode, dist=dist)
    states = np.vstack([trace.theta0, trace.samples[:-1]])
    lsum = dist.lipschitz_sum(model.lipschitz_constants())
    replay = [adaptive_batch_size(s, mode, lsum, V0, n_max=model.n_data)
              for s in states]
    assert(trace.batch_sizes.tolist() == replay)

def test_adaptive_chain_uses_less_data(balanced_logistic):
    """calibrated adaptive sizes cost less than the fixed pilot size"""
    model, mode, dist, V0 = balanced_logistic
    trace = ASGLDCVPS(step_size=1e-4, n_iter=10000, noise_threshold=V0, seed=2,
                      callbacks=[]).run(model, mode=mode, dist=dist)
    assert(trace.data_usage < 10 * 10000)

def test_adaptive_chain_matches_fixed_quality(balanced_logistic):
    """over 5 seeds, the median KSD of adaptive chains is within 2x of
    fixed-size chains"""
    model, mode, dist, V0 = balanced_logistic
    ratios = []
    for seed in range(5):
        fixed = SGLDCVPS(step_size=1e-4, n_iter=5000, batch_size=10, seed=seed,
                         callbacks=[]).run(model, mode=mode, dist=dist)
        adaptive = ASGLDCVPS(step_size=1e-4, n_iter=5000, noise_threshold=V0,
                             seed=seed, callbacks=[])\
                   .run(model, mode=mode, dist=dist)
        ratios.append(ksd(adaptive, model).value / ksd(fixed, model).value)
    assert(0.5 <= np.median(ratios) <= 2.)
