import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dfrelay import GainSet, Geometry, draw_gains

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

gain_value = st.floats(min_value=0.0, max_value=20.0, allow_nan=False, allow_infinity=False)


@st.composite
def gain_sets(draw, n_min=1, n_max=4):
    n = draw(st.integers(n_min, n_max))
    vals = [draw(st.lists(gain_value, min_size=n, max_size=n)) for _ in range(3)]
    return GainSet.from_lists(*vals)


@st.composite
def rayleigh_gains(draw, n_min=1, n_max=6):
    """Gains drawn from the channel model itself; hypothesis picks the seed, size and geometry."""
    n = draw(st.integers(n_min, n_max))
    d = draw(st.sampled_from([0.25, 0.5, 0.75]))
    seed = draw(st.integers(0, 2**32 - 1))
    return draw_gains(n, Geometry(d=d), seed)


budgets = st.floats(min_value=0.0, max_value=200.0, allow_nan=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
