"""Shared hypothesis strategies."""
import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def cmatrices(draw, rows=st.integers(1, 6), cols=st.integers(1, 6)):
    r, c = draw(rows), draw(cols)
    re = draw(arrays(np.float64, (r, c), elements=finite))
    im = draw(arrays(np.float64, (r, c), elements=finite))
    return re + 1j * im


@st.composite
def coeff_tensors(draw, k=st.integers(1, 4), n=st.integers(1, 4)):
    kk, nn = draw(k), draw(n)
    re = draw(arrays(np.float64, (kk, nn, nn), elements=finite))
    im = draw(arrays(np.float64, (kk, nn, nn), elements=finite))
    return re + 1j * im
