"""
Shared fixtures; puts the project root and src/ on sys.path like run.py does.
"""

import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
for path in (ROOT, os.path.join(ROOT, 'src')):
    if path not in sys.path:
        sys.path.insert(0, path)

from config import TestingConfig  # noqa: E402
from models.data_models import SearchParams  # noqa: E402
from sample_data import load_problem  # noqa: E402


@pytest.fixture
def cfg():
    return TestingConfig


@pytest.fixture
def search():
    return SearchParams.from_config(TestingConfig)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def s2_height():
    return load_problem("s2-height")


@pytest.fixture
def s2_z2():
    return load_problem("s2-z2")


@pytest.fixture
def t2_cos():
    return load_problem("t2-cos")
