import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir)))

import core
import numpy as np
import pytest

@pytest.fixture(autouse=True)
def quiet():
    core.set_logging(False)
    yield

@pytest.fixture
def rng():
    return np.random.default_rng(1234)

@pytest.fixture
def haar_ket(rng):
    def make(n_qubits):
        return core.qstate.haar_state(n_qubits, rng)
    return make

@pytest.fixture
def haar_ensemble(rng):
    def make(n_qubits, size):
        return core.qstate.StateEnsemble.from_vectors(core.qstate.haar_vectors(n_qubits, size, rng))
    return make
