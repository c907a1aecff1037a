"""
SGLD toolkit with preferential subsampling and adaptive subsample sizes
"""

from __future__ import absolute_import

from pysgld.models import Dataset
from pysgld.models import GaussianModel
from pysgld.models import LogisticModel
from pysgld.models import LinearModel
from pysgld.models import ModeInfo

from pysgld.subsampling import SubsampleDistribution
from pysgld.subsampling import compute_weights

from pysgld.estimators import estimate_gradient
from pysgld.estimators import pseudo_variance_empirical
from pysgld.estimators import pseudo_variance_closed_form

from pysgld.samplers import Sampler
from pysgld.samplers import ULA
from pysgld.samplers import SGLD
from pysgld.samplers import SGLDCV
from pysgld.samplers import SGLDPS
from pysgld.samplers import SGLDCVPS
from pysgld.samplers import ASGLDCV
from pysgld.samplers import ASGLDCVPS
from pysgld.samplers import find_mode_adam
from pysgld.samplers import calibrate_noise_threshold

from pysgld.diagnostics import ksd
from pysgld.diagnostics import kl_gaussian
from pysgld.diagnostics import log_loss

__all__ = ['Dataset', 'GaussianModel', 'LogisticModel', 'LinearModel',
           'ModeInfo', 'SubsampleDistribution', 'compute_weights',
           'estimate_gradient', 'pseudo_variance_empirical',
           'pseudo_variance_closed_form', 'Sampler', 'ULA', 'SGLD', 'SGLDCV',
           'SGLDPS', 'SGLDCVPS', 'ASGLDCV', 'ASGLDCVPS', 'find_mode_adam',
           'calibrate_noise_threshold', 'ksd', 'kl_gaussian', 'log_loss']

__version__ = '0.1.0'
