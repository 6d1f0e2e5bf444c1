"""Traveling waves driven by a steady surface pressure.

A wave of speed ``gamma`` solves ``gamma d_1 eta - G(eta)(eta + phi0) = 0``.
Splitting ``G = m(D) + R`` turns this into the fixed-point problem

    eta = (gamma d_1 - m(D))^{-1} [R(eta)(eta + phi0) + m(D) phi0],

which is iterated by plain Picard sweeps from ``eta = 0``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .dn import dn_remainder
from .errors import ContractionFailure, NoConvergence
from .norms import sobolev_norm
from .spectral import SurfaceField, derivative, multiplier_m, resolvent_gamma

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WaveConfig:
    gamma: float
    phi0: SurfaceField
    s: float = 2.0
    tol: float = 1e-10
    max_iter: int = 200
    dn_tol: float = 1e-13
    dn_max_iter: int = 100
    dealias: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1 or self.dn_max_iter < 1:
            raise ValueError("iteration limits must be positive")
        object.__setattr__(self, "phi0", self.phi0.zero_mean())

    @property
    def spec(self):
        return self.phi0.spec


@dataclass(eq=False)
class TravelingWaveSolution:
    eta_star: SurfaceField
    history: list = field(default_factory=list)  # (||eta^k||_Hs, ||eta^k - eta^(k-1)||_Hs)
    contraction_estimate: float = 0.0
    steady_residual: float = 0.0
    fixed_point_residual: float = 0.0

    @property
    def iterations(self):
        return len(self.history)

    @property
    def step_ratios(self):
        steps = [s for _, s in self.history]
        return [b / a if a > 0 else 0.0 for a, b in zip(steps, steps[1:])]


def _remainder(eta, cfg):
    return dn_remainder(eta, eta + cfg.phi0, cfg.dn_tol, cfg.dn_max_iter, dealiased=cfg.dealias)


def _apply_map(eta, remainder, cfg):
    out = resolvent_gamma(remainder + multiplier_m(cfg.spec)(cfg.phi0), cfg.gamma)
    out.coeffs.flat[0] = 0.0
    return out


def t_phi_map(eta, cfg):
    """One application of the fixed-point map."""
    return _apply_map(eta, _remainder(eta, cfg), cfg)


def steady_defect(eta, cfg):
    """``(T(eta) - eta, gamma d_1 eta - G(eta)(eta + phi0))`` from one DN solve."""
    r = _remainder(eta, cfg)
    spec = cfg.spec
    g = multiplier_m(spec)(eta + cfg.phi0) + r
    g.coeffs.flat[0] = 0.0
    steady = cfg.gamma * derivative(spec, 0)(eta) - g
    return _apply_map(eta, r, cfg) - eta, steady


def solve_traveling_wave(cfg):
    spec = cfg.spec
    eta = SurfaceField.zeros(spec)
    history = []
    above_one = 0
    for it in range(1, cfg.max_iter + 1):
        nxt = t_phi_map(eta, cfg)
        step = sobolev_norm(nxt - eta, cfg.s)
        history.append((sobolev_norm(nxt, cfg.s), step))
        eta = nxt
        if len(history) >= 2 and history[-2][1] > 0:
            ratio = step / history[-2][1]
            above_one = above_one + 1 if ratio > 1 else 0
            if above_one >= 3:
                raise ContractionFailure(
                    f"step ratio above 1 for 3 consecutive iterations (last {ratio:.3g})"
                )
        if step < cfg.tol:
            break
    else:
        raise NoConvergence("solve_traveling_wave", cfg.max_iter, history[-1][1])

    sol = TravelingWaveSolution(eta_star=eta, history=history)
    ratios = sol.step_ratios
    # the first two ratios carry the transient from eta = 0
    tail = ratios[2:] or ratios
    sol.contraction_estimate = float(max(tail)) if tail else 0.0
    fp, steady = steady_defect(eta, cfg)
    sol.fixed_point_residual = sobolev_norm(fp, cfg.s)
    sol.steady_residual = sobolev_norm(steady, cfg.s - 0.5)
    log.info("traveling wave: %d iterations, steady residual %.2e", it, sol.steady_residual)
    return sol


def lipschitz_probe(cfg, cfg_perturbed):
    """``||eta*_1 - eta*_2||_Hs / ||phi0_1 - phi0_2||_Hs`` (0 for identical forcing)."""
    dphi = sobolev_norm(cfg.phi0 - cfg_perturbed.phi0, cfg.s)
    if dphi == 0.0:
        return 0.0
    a = solve_traveling_wave(cfg).eta_star
    b = solve_traveling_wave(cfg_perturbed).eta_star
    return float(sobolev_norm(a - b, cfg.s) / dphi)


def first_order_amplitude(eps, gamma, b=1.0):
    """Leading-order ``|eta_hat*(1)|`` for ``phi0 = eps cos x_1``."""
    m1 = np.tanh(b)
    return eps * m1 / (2.0 * abs(1j * gamma - m1))
