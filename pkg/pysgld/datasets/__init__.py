"""
pysgld datasets
"""
# -*- coding: utf-8 -*-

from pysgld.datasets.load_datasets import load_libsvm
from pysgld.datasets.load_datasets import load_csv
from pysgld.datasets.load_datasets import load_dataset
from pysgld.datasets.load_datasets import standardize_features
from pysgld.datasets.load_datasets import split_train_test
from pysgld.datasets.synthetic import generate_synthetic
from pysgld.datasets.synthetic import SYNTHETIC_KINDS

__all__ = ['load_libsvm',
           'load_csv',
           'load_dataset',
           'standardize_features',
           'split_train_test',
           'generate_synthetic',
           'SYNTHETIC_KINDS']
