import math

import numpy as np
import pytest

from muskat.errors import CompatibilityViolation, NonzeroMean, ResidualTooLarge
from muskat.linear import (
    LinearData,
    check_compatibility,
    compute_psi,
    data_norm,
    dz_fd,
    forward_map,
    solve_eta_symbol,
    solve_T2,
    solve_T3,
    solve_udln,
    strip_l2,
    xi_operator,
)
from muskat.manufactured import SmoothStrip, exact_forward, overdetermined_data, random_state
from muskat.spectral import DomainSpec, StripField, SurfaceField, coeff_l2, multiplier_m

from conftest import cos_field


def zeros_data(spec):
    z = StripField.zeros(spec)
    s = SurfaceField.zeros(spec)
    return LinearData(tuple(z for _ in range(spec.d + 1)), z, s, s)


def vec_rel(a, b):
    num = sum(strip_l2(x - y) ** 2 for x, y in zip(a, b))
    den = sum(strip_l2(y) ** 2 for y in b)
    return math.sqrt(num / den)


class TestUdln:
    def test_zero(self, spec1):
        res = solve_udln(StripField.zeros(spec1), SurfaceField.zeros(spec1), SurfaceField.zeros(spec1))
        assert not np.any(res.p.coeffs)

    def test_cosh_profile_second_order(self):
        errs = []
        for nz in (33, 65, 129):
            spec = DomainSpec(nx=16, nz=nz)
            res = solve_udln(StripField.zeros(spec), cos_field(spec), SurfaceField.zeros(spec))
            z = spec.z_nodes[:, None]
            exact = np.cos(spec.x[0])[None, :] * np.cosh(z + 1) / math.cosh(1)
            errs.append(np.max(np.abs(res.p.values() - exact)))
            assert res.residuals["dirichlet"] == 0.0
        assert errs[-1] < 1e-5
        assert all(3.5 <= a / b <= 4.5 for a, b in zip(errs, errs[1:]))

    def test_manufactured_quadratic(self):
        # p = cos(x) z^2: -Lap p = cos(x)(z^2 - 2), p(0) = 0, -p_z(-b) = 2 b cos x
        spec = DomainSpec(b=1.0, nx=16, nz=65)
        z = spec.z_nodes[:, None]
        c = np.cos(spec.x[0])[None, :]
        f = StripField.from_values(spec, c * (z**2 - 2))
        l = SurfaceField.from_values(spec, 2 * np.cos(spec.x[0]))
        res = solve_udln(f, SurfaceField.zeros(spec), l)
        assert np.max(np.abs(res.p.values() - c * z**2)) < 10 * spec.dz**2
        assert max(res.residuals.values()) < 1e-10


class TestXi:
    def test_constant(self, spec1):
        k = SurfaceField.from_values(spec1, np.full(spec1.grid_shape, 0.3))
        assert np.allclose(xi_operator(k).values(), 0.3)

    def test_bed_value(self, spec1):
        out = xi_operator(cos_field(spec1)).bottom.values()
        assert np.allclose(out, np.cos(spec1.x[0]) / math.cosh(1), atol=1e-15)
        assert 1 / math.cosh(1) == pytest.approx(0.64805, abs=1e-5)

    def test_surface_derivative(self):
        spec = DomainSpec(nx=16, nz=257)
        k = cos_field(spec, 1) + cos_field(spec, 2, 0.3)
        top = dz_fd(xi_operator(k)).top
        expect = multiplier_m(spec)(k)
        assert coeff_l2(top - expect) < 1e-4 * coeff_l2(expect)

    def test_agrees_with_udln(self):
        spec = DomainSpec(nx=16, nz=129)
        k = cos_field(spec, 2)
        res = solve_udln(StripField.zeros(spec), k, SurfaceField.zeros(spec))
        assert np.max(np.abs(res.p.coeffs - xi_operator(k).coeffs)) < 5 * spec.dz**2


class TestPsi:
    def test_cancellation(self, spec1):
        z = StripField.zeros(spec1)
        k = cos_field(spec1)
        h_plus = cos_field(spec1, 1, -math.tanh(1))
        psi = compute_psi(z, h_plus, SurfaceField.zeros(spec1), k)
        assert np.max(np.abs(psi.coeffs)) < 1e-15

    def test_single_term(self, spec1):
        psi = compute_psi(StripField.zeros(spec1), cos_field(spec1), SurfaceField.zeros(spec1),
                          SurfaceField.zeros(spec1))
        assert np.allclose(psi.values(), -np.cos(spec1.x[0]))

    def test_vanishes_for_solved_pressure(self):
        spec = DomainSpec(nx=32, nz=129)
        rng = np.random.default_rng(0)
        for _ in range(5):
            p = SmoothStrip(spec, _terms(rng))
            psi = compute_psi(*overdetermined_data(p))
            assert np.max(np.abs(psi.coeffs)) <= 10 * spec.dz**2
            assert psi.is_conjugate_symmetric(1e-14)


def _terms(rng):
    from muskat.manufactured import random_terms

    return random_terms(1, rng, kmax=6)


class TestCompatibility:
    def test_zero(self, spec1):
        assert check_compatibility(zeros_data(spec1)) == 0.0

    def test_constant_g(self):
        spec = DomainSpec(b=0.8, nx=16, nz=33)
        data = zeros_data(spec)
        data.G = StripField.from_values(spec, np.ones(spec.strip_shape))
        data.H = SurfaceField.from_values(spec, np.full(spec.grid_shape, 0.8))
        assert check_compatibility(data) < 1e-15
        assert data.compatibility_residual == check_compatibility(data)

    def test_mean_free_h(self, spec1):
        data = zeros_data(spec1)
        data.H = cos_field(spec1)
        assert check_compatibility(data) == 0.0

    def test_violation_raised(self, spec1):
        data = zeros_data(spec1)
        data.H = SurfaceField.from_values(spec1, np.full(spec1.grid_shape, 1.0))
        with pytest.raises(CompatibilityViolation):
            solve_T3(data, 1.0)


class TestEtaSymbol:
    def test_zero(self, spec1):
        assert not np.any(solve_eta_symbol(SurfaceField.zeros(spec1), 1.0).coeffs)

    def test_modulus(self, spec1):
        psi = SurfaceField.zeros(spec1)
        psi.coeffs[1] = 1.0
        psi.coeffs[-1] = 1.0
        eta = solve_eta_symbol(psi, 1.0, 1.0)
        assert abs(eta.coeffs[1]) == pytest.approx(1 / math.sqrt(1 + math.tanh(1) ** 2), rel=1e-14)
        assert abs(eta.coeffs[1]) == pytest.approx(0.79555, abs=1e-5)
        assert eta.is_conjugate_symmetric(1e-15)

    def test_gamma_zero(self, spec1):
        eta = solve_eta_symbol(cos_field(spec1), 0.0, 1.0)
        assert np.allclose(eta.values(), np.cos(spec1.x[0]) / math.tanh(1), atol=1e-14)

    def test_nonzero_mean(self, spec1):
        psi = SurfaceField.from_values(spec1, np.full(spec1.grid_shape, 1e-3))
        with pytest.raises(NonzeroMean):
            solve_eta_symbol(psi, 1.0)


class TestT2:
    def test_zero(self, spec1):
        z, s = StripField.zeros(spec1), SurfaceField.zeros(spec1)
        p, eta, _ = solve_T2(z, s, s, s, 1.0)
        assert not np.any(p.coeffs) and not np.any(eta.coeffs)

    def test_h_plus_only(self, spec1):
        z, s = StripField.zeros(spec1), SurfaceField.zeros(spec1)
        p, eta, res = solve_T2(z, cos_field(spec1), s, s, 1.0)
        assert abs(eta.coeffs[1]) == pytest.approx(0.5 / math.sqrt(1 + math.tanh(1) ** 2), rel=1e-14)
        assert res["top_neumann"] < 1e-3

    def test_round_trip_pressure(self):
        spec = DomainSpec(nx=32, nz=129)
        rng = np.random.default_rng(1)
        p = SmoothStrip(spec, _terms(rng))
        f, hp, hm, k = overdetermined_data(p)
        # trapezoid psi is compatible only to O(h^2)
        p_num, eta, res = solve_T2(f, hp, hm, k, 1.0, compat_tol=10 * spec.dz**2)
        assert coeff_l2(eta) < 1e-4 * coeff_l2(k)
        assert strip_l2(p_num - p.strip()) <= 10 * spec.dz**2 * strip_l2(p.strip())

    def test_residual_tol(self, spec1):
        z, s = StripField.zeros(spec1), SurfaceField.zeros(spec1)
        with pytest.raises(ResidualTooLarge):
            solve_T2(z, cos_field(spec1), s, s, 1.0, residual_tol=1e-14)


class TestT3:
    def test_zero_data(self, spec2):
        sol = solve_T3(zeros_data(spec2), 1.0)
        assert all(not np.any(v.coeffs) for v in sol.u)
        assert not np.any(sol.p.coeffs) and not np.any(sol.eta.coeffs)

    @pytest.mark.parametrize("d,nx,gamma", [(1, 32, 1.0), (1, 32, 0.0), (2, 16, -0.7)])
    def test_round_trip(self, d, nx, gamma):
        spec = DomainSpec(d=d, nx=nx, nz=129)
        rng = np.random.default_rng(2)
        u, p, eta = random_state(spec, rng, kmax=4 if d == 2 else 6)
        data = exact_forward(u, p, eta, gamma)
        sol = solve_T3(data, gamma)
        bound = max(1e-6, 10 * spec.dz**2)
        assert vec_rel(sol.u, [ui.strip() for ui in u]) <= bound
        assert strip_l2(sol.p - p.strip()) <= bound * strip_l2(p.strip())
        assert coeff_l2(sol.eta - eta.field()) <= bound * coeff_l2(eta.field())
        for key in ("momentum", "divergence", "kinematic", "dirichlet", "bed"):
            assert sol.residuals[key] <= bound
        assert sol.eta.coeffs.flat[0] == 0.0
        assert np.max(np.abs(sol.u[-1].bottom.coeffs)) == 0.0
        assert sol.residuals["bed_before_cleanup"] <= 1e-12 * data_norm(data)

    def test_outputs_real(self):
        spec = DomainSpec(d=2, nx=16, nz=65)
        u, p, eta = random_state(spec, np.random.default_rng(3), kmax=4)
        sol = solve_T3(exact_forward(u, p, eta, 1.0), 1.0)
        for v in sol.u + (sol.p,):
            assert all(v.slab(i).is_conjugate_symmetric(1e-12) for i in range(spec.nz))
        assert sol.eta.is_conjugate_symmetric(1e-12)

    def test_second_order_convergence(self):
        errs = []
        for nz in (33, 65, 129):
            spec = DomainSpec(nx=32, nz=nz)
            u, p, eta = random_state(spec, np.random.default_rng(4))
            sol = solve_T3(exact_forward(u, p, eta, 1.0), 1.0)
            errs.append(strip_l2(sol.p - p.strip()) / strip_l2(p.strip()))
        rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert min(rates) > 1.8

    def test_discrete_forward_inverse(self):
        # the solver inverts its own discrete forward map up to O(h^2)
        spec = DomainSpec(nx=32, nz=129)
        u, p, eta = random_state(spec, np.random.default_rng(5))
        sol = solve_T3(exact_forward(u, p, eta, 1.0), 1.0)
        data2 = forward_map(sol.u, sol.p, sol.eta, 1.0)
        sol2 = solve_T3(data2, 1.0, compat_tol=10 * spec.dz**2)
        assert vec_rel(sol2.u, sol.u) <= 10 * spec.dz**2
