"""Shared fixtures and hypothesis strategies."""

import math
import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from algebra import Su2Vec
from groups import BEl, SU2El
from phase import OrbitPt, orbit_vector

SIGMA = SU2El(alpha=0j, beta=1 + 0j)

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
coords3 = arrays(np.float64, (3,), elements=finite)
angles = st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True)
times = st.floats(min_value=-3.0, max_value=3.0)


@st.composite
def su2vecs(draw):
    return Su2Vec.from_array(draw(coords3))


@st.composite
def unit_leaf_vectors(draw, theta=None):
    """Unit momentum images on a two-dimensional leaf, |a3| <= 0.8."""
    angle = draw(angles) if theta is None else theta
    z = draw(st.floats(min_value=-0.8, max_value=0.8))
    return orbit_vector(OrbitPt(theta=angle, x=math.sqrt(1.0 - z * z), z=z))


@st.composite
def bels(draw):
    log_a = draw(st.floats(min_value=-1.0, max_value=1.0))
    return BEl(a=math.exp(log_a), b=draw(finite), c=draw(finite))


@st.composite
def su2els(draw):
    v = draw(arrays(np.float64, (4,), elements=st.floats(min_value=-1.0, max_value=1.0)))
    norm = float(np.linalg.norm(v))
    if norm < 1e-3:
        return SU2El.identity()
    v = v / norm
    return SU2El(alpha=complex(v[0], v[1]), beta=complex(v[2], v[3]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sigma():
    return SIGMA
