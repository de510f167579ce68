import numpy as np
import pytest
from hypothesis import strategies as st

from bismut_flow.curvature import MetricCoefficients


@st.composite
def admissible_metrics(draw, margin: float = 0.9):
    """x, y log-uniform in [0.1, 10] and |z|^2 <= margin * x y."""
    x = 10 ** draw(st.floats(-1, 1))
    y = 10 ** draw(st.floats(-1, 1))
    frac = draw(st.floats(0, margin))
    phase = draw(st.floats(0, 2 * np.pi))
    return MetricCoefficients(x, y, np.sqrt(frac * x * y) * np.exp(1j * phase))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
