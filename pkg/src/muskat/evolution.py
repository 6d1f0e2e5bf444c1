"""Time evolution of perturbations of a traveling wave.

Writing ``eta = eta* + f`` in the moving frame gives

    d_t f = (gamma d_1 - m(D)) f + N(f),
    N(f) = R(eta*)(eta* + phi0) - R(eta* + f)(eta* + phi0 + f).

The DN remainder is linear in its datum, so the two middle terms of the
usual expansion collapse into one solve at ``eta* + f``.  The linear part is
integrated exactly by the semigroup, the nonlinear part by a two-stage
integrating-factor Runge-Kutta step.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dn import dn_remainder
from .errors import BlowupDetected, NoConvergence
from .norms import sobolev_norm
from .spectral import SurfaceField, semigroup_multiplier

log = logging.getLogger(__name__)

INTEGRATORS = ("etdrk2", "duhamel_picard")


@dataclass(frozen=True, eq=False)
class EvolutionConfig:
    base: object  # WaveConfig
    eta_star: SurfaceField
    f0: SurfaceField
    dt: float = None
    t_final: float = 20.0
    integrator: str = "etdrk2"
    nonlinear: bool = True

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", 0.05 / max(1.0, abs(self.base.gamma)))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be non-negative")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}")
        object.__setattr__(self, "f0", self.f0.zero_mean())

    @property
    def spec(self):
        return self.f0.spec

    @property
    def gamma(self):
        return self.base.gamma

    @cached_property
    def base_remainder(self):
        """``R(eta*)(eta* + phi0)``, shared by every evaluation of ``N``."""
        eta = self.eta_star
        return _remainder(eta, eta + self.base.phi0, self.base)


def _remainder(eta, datum, base):
    return dn_remainder(eta, datum, base.dn_tol, base.dn_max_iter, dealiased=base.dealias)


@dataclass(eq=False)
class DecayReport:
    times: list
    hs_norms: list
    hs_half_l2_accum: list
    fitted_rate: float
    c0_reference: float
    f_final: SurfaceField = None
    monotone: bool = True
    extra: dict = field(default_factory=dict)


def nonlinear_rhs(f, cfg):
    spec = cfg.spec
    if not cfg.nonlinear or not np.any(f.coeffs):
        return SurfaceField.zeros(spec)
    eta = cfg.eta_star + f
    datum = cfg.eta_star + cfg.base.phi0 + f
    out = cfg.base_remainder - _remainder(eta, datum, cfg.base)
    out.coeffs.flat[0] = 0.0
    return out


def step_etdrk2(f, dt, cfg):
    if not dt > 0:
        raise ValueError("dt must be positive")
    S = semigroup_multiplier(cfg.spec, dt, cfg.gamma)
    n0 = nonlinear_rhs(f, cfg)
    sn0 = S(n0)
    a = S(f) + sn0 * dt
    out = a + (nonlinear_rhs(a, cfg) - sn0) * (0.5 * dt)
    out.coeffs.flat[0] = 0.0
    return out


def fit_decay_rate(times, norms):
    """Least-squares rate of ``log ||f||`` over the tail half of the series."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(norms, dtype=float)
    t, y = t[len(t) // 2:], y[len(y) // 2:]
    if len(t) < 2 or np.any(y <= 0):
        return math.nan
    slope = np.polyfit(t, np.log(y), 1)[0]
    return float(-slope)


def evolve(cfg, callback=None):
    """Step to ``t_final``, tracking ``||f||_Hs`` and ``int ||f||^2_{H^(s+1/2)} dt``.

    ``callback(t, f)`` is invoked after every recorded step when given.
    """
    s = cfg.base.s
    n_steps = max(1, int(round(cfg.t_final / cfg.dt)))
    dt = cfg.t_final / n_steps if cfg.t_final > 0 else cfg.dt
    if cfg.t_final == 0:
        n_steps = 0
    f = cfg.f0
    norm0 = sobolev_norm(f, s)
    half_prev = sobolev_norm(f, s + 0.5) ** 2
    times, norms, accum = [0.0], [norm0], [0.0]
    monotone = True
    if cfg.integrator == "duhamel_picard" and n_steps:
        path = duhamel_picard(cfg, cfg.t_final, n_nodes=n_steps + 1, return_path=True)
        advance = lambda k, g: path[k]
    else:
        advance = lambda k, g: step_etdrk2(g, dt, cfg)
    for k in range(1, n_steps + 1):
        f = advance(k, f)
        t = k * dt
        nrm = sobolev_norm(f, s)
        if not np.isfinite(nrm) or nrm > 10.0 * norm0:
            raise BlowupDetected(f"||f||_Hs = {nrm:.3e} at t = {t:g} exceeds 10 ||f0||")
        half = sobolev_norm(f, s + 0.5) ** 2
        accum.append(accum[-1] + 0.5 * dt * (half + half_prev))
        half_prev = half
        if nrm > norms[-1] * (1 + 1e-12):
            monotone = False
        times.append(t)
        norms.append(nrm)
        if callback is not None:
            callback(t, f)
    return DecayReport(
        times=times,
        hs_norms=norms,
        hs_half_l2_accum=accum,
        fitted_rate=fit_decay_rate(times, norms),
        c0_reference=float(np.tanh(cfg.spec.b)),
        f_final=f,
        monotone=monotone,
    )


def _duhamel_sweep(f0, nl, S_of_k, delta):
    """Trapezoid-rule Duhamel values on the node grid for given ``N`` samples."""
    out = []
    for k in range(len(nl)):
        acc = S_of_k[k](f0).coeffs.copy()
        for j in range(k + 1):
            w = 0.5 if j in (0, k) else 1.0
            if k == 0:
                w = 0.0
            acc += w * delta * S_of_k[k - j](nl[j]).coeffs
        out.append(SurfaceField(f0.spec, acc))
    return out


def duhamel_picard(cfg, t_short, n_nodes=41, tol=1e-13, max_iter=60, return_path=False):
    """Mild solution on ``[0, t_short]`` by Picard iteration.

    The Duhamel integral is discretized by the trapezoid rule on
    ``n_nodes`` equally spaced times and the fixed point of the resulting
    map is found by successive substitution.  Divergence of the iteration
    (three consecutive growing updates) or ``max_iter`` sweeps without
    reaching ``tol`` raise ``NoConvergence``.
    """
    if t_short <= 0:
        raise ValueError("t_short must be positive")
    if n_nodes < 2:
        raise ValueError("need at least two time nodes")
    spec = cfg.spec
    delta = t_short / (n_nodes - 1)
    S_of_k = [semigroup_multiplier(spec, k * delta, cfg.gamma) for k in range(n_nodes)]
    f0 = cfg.f0
    path = [S(f0) for S in S_of_k]
    prev, growing = math.inf, 0
    for it in range(1, max_iter + 1):
        nl = [nonlinear_rhs(f, cfg) for f in path]
        new = _duhamel_sweep(f0, nl, S_of_k, delta)
        change = max(float(np.max(np.abs(a.coeffs - b.coeffs))) for a, b in zip(new, path))
        path = new
        growing = growing + 1 if change > prev else 0
        if growing >= 3:
            raise NoConvergence("duhamel_picard (diverging)", it, change)
        prev = change
        if change < tol:
            break
    else:
        raise NoConvergence("duhamel_picard", max_iter, change)
    log.debug("duhamel_picard converged in %d sweeps", it)
    return path if return_path else path[-1]


def duhamel_reference(cfg, t_short, n_nodes=41, **kw):
    """Richardson combination of two trapezoid Duhamel solves (fourth order).

    The trapezoid rule error expands in even powers of the node spacing, so
    ``(4 u_{h/2} - u_h) / 3`` removes the leading term.
    """
    coarse = duhamel_picard(cfg, t_short, n_nodes, **kw)
    fine = duhamel_picard(cfg, t_short, 2 * n_nodes - 1, **kw)
    return fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
