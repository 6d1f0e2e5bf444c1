import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from muskat.spectral import DomainSpec, SurfaceField

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def spec1():
    return DomainSpec(d=1, b=1.0, nx=32, nz=65)


@pytest.fixture
def spec2():
    return DomainSpec(d=2, b=1.0, nx=16, nz=33)


def random_field(spec, rng, scale=1.0, decay=1.0, zero_mean=True):
    """Smooth random real field with coefficients decaying like exp(-decay |xi|)."""
    vals = rng.standard_normal(spec.grid_shape)
    f = SurfaceField.from_values(spec, vals)
    f = SurfaceField(spec, f.coeffs * np.exp(-decay * spec.kmag) * scale)
    return f.zero_mean() if zero_mean else f


def cos_field(spec, k=1, amp=1.0):
    return SurfaceField.from_modes(spec, {(k,) + (0,) * (spec.d - 1): amp})


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
