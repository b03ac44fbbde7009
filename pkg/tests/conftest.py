from __future__ import annotations

import os

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def single_thread(monkeypatch):
    monkeypatch.setenv("FRACLAP_THREADS", "1")
    yield
    os.environ.pop("FRACLAP_THREADS", None)
