import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from inconclusive.states import bernoulli, random_density_matrix, validate_state

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def qubit_pairs(draw, min_weight=0.05):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return (random_density_matrix(2, rng, min_weight=min_weight),
            random_density_matrix(2, rng, min_weight=min_weight))


@st.composite
def hermitian_matrices(draw, max_dim=6):
    d = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


@pytest.fixture
def bern_p():
    return bernoulli(0.9)


@pytest.fixture
def bern_q():
    return bernoulli(0.2)


@pytest.fixture
def pinch_rho():
    return validate_state(np.array([[0.5, 0.25], [0.25, 0.5]]))


@pytest.fixture
def pinch_sigma():
    return validate_state(np.diag([0.75, 0.25]))
