import pytest
from hypothesis import HealthCheck, settings

from covert_lab.link_model import NoiseProfile

settings.register_profile(
    "covert",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("covert")


def bisect(f, lo, hi, iters=200):
    """Plain bisection; the independent root oracle used across the tests."""
    f_lo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture
def base_noise():
    """Default setting of the numerical results: -20 dB at Bob, 0 dB at Willie and Eve."""
    return NoiseProfile(sigma_b2=0.01, sigma_w2=1.0, sigma_e2=1.0, upsilon=0.01)
