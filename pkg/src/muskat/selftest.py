"""Oracle checks of the Dirichlet-Neumann solver, bundled for the CLI."""

import math
import time

import numpy as np

from .dn import dn_apply
from .fd_oracle import dn_oracle_fd
from .spectral import DomainSpec, SurfaceField, coeff_l2, multiplier_m


def check_flat(seed=0, n_fields=20):
    """On a flat surface the operator is exactly ``m(D)``."""
    spec = DomainSpec(d=1, b=1.0, nx=64, nz=65)
    rng = np.random.default_rng(seed)
    eta = SurfaceField.zeros(spec)
    worst = 0.0
    for _ in range(n_fields):
        f = SurfaceField.from_values(spec, rng.standard_normal(spec.grid_shape)).zero_mean()
        err = coeff_l2(dn_apply(eta, f) - multiplier_m(spec)(f)) / coeff_l2(f)
        worst = max(worst, err)
    return {"value": float(worst), "threshold": 1e-12, "passed": bool(worst <= 1e-12)}


def check_shifted_strip():
    """A constant surface height is a deeper flat strip: symbol ``tanh(1.2)``."""
    spec = DomainSpec(d=1, b=1.0, nx=32, nz=65)
    eta = SurfaceField.from_values(spec, np.full(spec.grid_shape, 0.2))
    f = SurfaceField.from_modes(spec, {(1,): 1.0})
    out = dn_apply(eta, f, tol=1e-12)
    amp = 2.0 * abs(out.coeffs[1])
    exact = math.tanh(1.2)
    err = abs(amp - exact) / exact
    return {
        "value": float(err),
        "amplitude": float(amp),
        "threshold": 1e-6,
        "passed": bool(err <= 1e-6),
    }


def check_fd_oracle(levels=(65, 129, 257, 513), nz_ref=1025):
    """Integral scheme against the finite-difference solve, with refinement ratios.

    The integral scheme is itself second order in z, so it is run on a much
    finer z grid than the oracle to keep its own error out of the ratios.
    """
    spec = DomainSpec(d=1, b=1.0, nx=32, nz=nz_ref)
    eta = SurfaceField.from_modes(spec, {(1,): 0.05})
    f = SurfaceField.from_modes(spec, {(1,): 1.0})
    ref = dn_apply(eta, f, tol=1e-13)
    errs = [coeff_l2(dn_oracle_fd(eta, f, n) - ref) / coeff_l2(ref) for n in levels]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    passed = bool(errs[-1] <= 1e-4 and all(3.5 <= r <= 4.5 for r in ratios))
    return {
        "value": float(errs[-1]),
        "errors": [float(e) for e in errs],
        "ratios": [float(r) for r in ratios],
        "threshold": 1e-4,
        "passed": passed,
    }


def run_selftest(seed=0):
    report = {}
    for name, fn in (
        ("flat", lambda: check_flat(seed)),
        ("shifted_strip", check_shifted_strip),
        ("fd_oracle", check_fd_oracle),
    ):
        t0 = time.perf_counter()
        res = fn()
        res["seconds"] = time.perf_counter() - t0
        report[name] = res
    report["passed"] = all(v["passed"] for v in report.values())
    return report
