import numpy as np
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=200,
    suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow],
)
settings.load_profile("repo")

entries = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


@st.composite
def matrices(draw, det_min=None):
    a = np.array([[draw(entries), draw(entries)], [draw(entries), draw(entries)]])
    if det_min is not None:
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        if det < det_min:
            # flip a column to fix the sign, then reject if still too small
            a[:, 0] = -a[:, 0]
            det = -det
        assume(det >= det_min)
    return a
