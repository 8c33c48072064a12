import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from efekit.model import PomdpModel  # noqa: E402
from oracles import random_model_arrays  # noqa: E402

EQ8_A = [[0.6, 0.4], [0.4, 0.6]]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_model(rng, n_states=None, n_obs=None, n_actions=None, floor=0.01):
    n_states = n_states or int(rng.integers(2, 6))
    n_obs = n_obs or int(rng.integers(2, 6))
    n_actions = n_actions or int(rng.integers(1, 4))
    return PomdpModel(*random_model_arrays(rng, n_states, n_obs, n_actions, floor))


@pytest.fixture
def two_state_model():
    return PomdpModel(
        prior_d=[0.5, 0.5],
        likelihood_a=[[0.9, 0.2], [0.1, 0.8]],
        transitions_b=[[[0.9, 0.2], [0.1, 0.8]]],
    )


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {detail}")
