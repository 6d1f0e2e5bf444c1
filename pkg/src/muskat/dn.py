"""Dirichlet-Neumann operator of the strip ``-b < y < eta(x)``.

The fluid domain is straightened by ``rho(x, z) = (z+b)/b * P_z eta + z``
where ``P_z = e^{z|D|}``.  The harmonic extension ``v`` of the Dirichlet
datum then solves a perturbed Laplace equation whose right-hand side is
``d_z Q_a[v] + div_x Q_b[v]``.  Factoring the Laplacian into a forward and a
backward parabolic operator in ``z`` gives the coupled integral equations
for ``(v, w)`` that are iterated here by Picard sweeps, and

    G(eta) f = m(D) f + w(z=0).

Vertical integrals use the composite trapezoid rule on the z nodes,
evaluated by a recursion that exploits the multiplicative structure of the
cosh-ratio kernels, so each sweep costs ``O(nz * nx^d)``.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DiffeoViolation, NoConvergence
from .norms import norm_U
from .spectral import (
    StripField,
    SurfaceField,
    cosh_ratio,
    dealias,
    multiplier_m,
    to_physical,
    to_spectral,
)

log = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.1


@dataclass(frozen=True, eq=False)
class StraightenedCoefficients:
    """Coefficient fields of the straightening map ``rho``.

    ``rho``, ``dz_rho`` and ``grad_rho`` are spectral strip fields.  The
    physical-space arrays used by the nonlinear terms are cached alongside:
    ``dz_rho_phys``, ``grad_rho_phys`` (shape ``(d, nz, ...)``) and the rational
    coefficient ``ratio_phys = (|grad rho|^2 - (dz_rho - 1)) / dz_rho``.
    """

    eta: SurfaceField
    rho: StripField
    dz_rho: StripField
    grad_rho: tuple
    dz_rho_phys: np.ndarray
    grad_rho_phys: np.ndarray
    ratio_phys: np.ndarray
    diffeo_bound: float
    dealiased: bool = True

    @property
    def spec(self):
        return self.eta.spec

    @property
    def min_dz_rho(self):
        return float(np.min(self.dz_rho_phys))


@dataclass(eq=False)
class HarmonicPair:
    v: StripField
    w: StripField
    qa: StripField
    qb: tuple
    iterations: int
    history: list = field(default_factory=list)

    @property
    def contraction_factor(self):
        """Largest ratio of successive step norms, ignoring roundoff-level steps."""
        h = [x for x in self.history if x > 1e-13]
        if len(h) < 2:
            return 0.0
        return max(b / a for a, b in zip(h, h[1:]))


def build_straightening(eta, margin=DEFAULT_MARGIN, dealiased=True):
    spec = eta.spec
    z = spec.zshape(spec.z_nodes)
    alpha = (z + spec.b) / spec.b
    decay = np.exp(z * spec.kmag)
    e_eta = decay * eta.coeffs
    e_abs = decay * spec.kmag * eta.coeffs
    e_grad = np.array([decay * 1j * spec.xi_odd[i] * eta.coeffs for i in range(spec.d)])

    origin = (slice(None),) + (0,) * spec.d
    rho = alpha * e_eta
    rho[origin] += spec.z_nodes
    dz_hat = e_eta / spec.b + alpha * e_abs
    grad_hat = alpha * e_grad

    if dealiased:
        dz_hat = dealias(dz_hat, spec)
        grad_hat = dealias(grad_hat, spec)
    dz_phys = to_physical(dz_hat, spec) + 1.0
    dz_hat = dz_hat.copy()
    dz_hat[origin] += 1.0
    grad_phys = to_physical(grad_hat, spec)

    bound = float(
        np.max(np.abs(to_physical(e_eta, spec)))
        + spec.b * np.max(np.abs(to_physical(e_abs, spec)))
    )
    if np.min(dz_phys) <= margin:
        raise DiffeoViolation(np.min(dz_phys), margin)

    ratio = (np.sum(grad_phys**2, axis=0) - (dz_phys - 1.0)) / dz_phys
    return StraightenedCoefficients(
        eta=eta,
        rho=StripField(spec, rho),
        dz_rho=StripField(spec, dz_hat),
        grad_rho=tuple(StripField(spec, g) for g in grad_hat),
        dz_rho_phys=dz_phys,
        grad_rho_phys=grad_phys,
        ratio_phys=ratio,
        diffeo_bound=bound,
        dealiased=dealiased,
    )


@lru_cache(maxsize=32)
def _kernels(spec):
    """Per-domain tables: ``D(z)``, surface kernel and one-step cosh ratios."""
    z = spec.z_nodes
    zz = spec.zshape(z)
    k = spec.kmag
    depth = k * np.tanh((zz + spec.b) * k)
    ktop = cosh_ratio(k, zz, 0.0, spec.b)
    up = cosh_ratio(k, spec.zshape(z[:-1]), spec.zshape(z[1:]), spec.b)
    for a in (depth, ktop, up):
        a.setflags(write=False)
    return depth, ktop, up


def _depth_symbol(spec):
    """``D(z) = |D| tanh((z+b)|D|)`` on every node, shape ``(nz, ...)``."""
    return _kernels(spec)[0]


def _q_terms(v_hat, dzv_hat, coeffs):
    """Spectral ``Q_a`` and ``Q_b`` from spectral ``v`` and ``d_z v``."""
    spec = coeffs.spec
    trim = (lambda a: dealias(a, spec)) if coeffs.dealiased else (lambda a: a)
    grad_v = to_physical(trim(np.array([1j * spec.xi_odd[i] * v_hat for i in range(spec.d)])), spec)
    dzv = to_physical(trim(dzv_hat), spec)
    g = coeffs.grad_rho_phys
    qa = np.sum(g * grad_v, axis=0) - coeffs.ratio_phys * dzv
    qb = -(coeffs.dz_rho_phys - 1.0) * grad_v + g * dzv
    qa_hat = trim(to_spectral(qa, spec))
    qa_hat[0] = 0.0  # d_z v = 0 on the flat bed, so Q_a vanishes there
    qb_hat = trim(to_spectral(qb, spec))
    return qa_hat, qb_hat


def q_nonlinearities(v, coeffs, dzv=None):
    """Evaluate ``(Q_a[v], Q_b[v])`` for a strip field ``v``.

    ``dzv`` is the vertical derivative of ``v``; when omitted it is taken
    from the unperturbed relation ``d_z v = D(z) v``, which is exact for the
    initial Picard iterate and for a flat surface.
    """
    spec = coeffs.spec
    if dzv is None:
        dzv_hat = _depth_symbol(spec) * v.coeffs
    else:
        dzv_hat = dzv.coeffs
    qa_hat, qb_hat = _q_terms(v.coeffs, dzv_hat, coeffs)
    return StripField(spec, qa_hat), tuple(StripField(spec, q) for q in qb_hat)


def cumulative_up(g, spec):
    """Trapezoid values of ``int_{-b}^{z} cosh((z'+b)k)/cosh((z+b)k) g(z') dz'``."""
    # cosh((z_{n-1}+b)k)/cosh((z_n+b)k) <= 1 chains the kernel node to node
    ratio = _kernels(spec)[2]
    half = 0.5 * spec.dz * g
    out = np.zeros_like(g)
    for n in range(1, spec.nz):
        out[n] = ratio[n - 1] * (out[n - 1] + half[n - 1]) + half[n]
    return out


def cumulative_down(g, spec):
    """Trapezoid values of ``int_{z}^{0} cosh((z+b)k)/cosh((z'+b)k) g(z') dz'``."""
    ratio = _kernels(spec)[2]
    half = 0.5 * spec.dz * g
    out = np.zeros_like(g)
    for n in range(spec.nz - 2, -1, -1):
        out[n] = ratio[n] * (out[n + 1] + half[n + 1]) + half[n]
    return out


def solve_vw(eta, f, tol=1e-12, max_iter=100, *, coeffs=None, s_check=1.0,
             margin=DEFAULT_MARGIN, dealiased=True):
    """Picard iteration for the straightened harmonic extension of ``f``.

    Each sweep freezes ``Q_a, Q_b`` at the current iterate, integrates the
    forward equation for ``w`` from the bed and the backward equation for
    ``v`` from the surface.  ``d_z v`` is taken from the backward equation,
    ``D(z) v + w + Q_a`` with the ``Q_a`` that produced the current ``v``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if coeffs is None:
        coeffs = build_straightening(eta, margin=margin, dealiased=dealiased)
    spec = eta.spec
    if f.spec != spec:
        raise ValueError("eta and f live on different domains")
    dsym, ktop, _ = _kernels(spec)
    div_sym = np.array([1j * spec.xi_odd[i] for i in range(spec.d)])

    v = ktop * f.coeffs
    w = np.zeros_like(v)
    qa_prev = np.zeros_like(v)
    history = []
    for it in range(1, max_iter + 1):
        qa, qb = _q_terms(v, dsym * v + w + qa_prev, coeffs)
        rhs_w = np.sum(div_sym[:, None] * qb, axis=0) - dsym * qa
        w = cumulative_up(rhs_w, spec)
        v_new = ktop * f.coeffs - cumulative_down(w + qa, spec)
        step = norm_U(StripField(spec, v_new - v), s_check)
        history.append(step)
        v, qa_prev = v_new, qa
        if step < tol:
            break
    else:
        raise NoConvergence("solve_vw", max_iter, history[-1])
    log.debug("solve_vw converged in %d sweeps, last step %.2e", it, step)
    return HarmonicPair(
        v=StripField(spec, v),
        w=StripField(spec, w),
        qa=StripField(spec, qa_prev),
        qb=tuple(StripField(spec, q) for q in qb),
        iterations=it,
        history=history,
    )


def remainder_from_pair(pair):
    """``R(eta) f`` as the surface trace of ``w``.

    Written out, this is the trapezoid value of
    ``int cosh((z'+b)|D|)/cosh(b|D|) {div Q_b - D(z') Q_a}(z') dz'``.
    """
    return pair.w.top


def dn_apply(eta, f, tol=1e-12, max_iter=100, **kw):
    pair = solve_vw(eta, f, tol, max_iter, **kw)
    out = multiplier_m(eta.spec)(f) + remainder_from_pair(pair)
    out.coeffs.flat[0] = 0.0
    return out


def dn_remainder(eta, f, tol=1e-12, max_iter=100, **kw):
    pair = solve_vw(eta, f, tol, max_iter, **kw)
    out = remainder_from_pair(pair)
    return SurfaceField(out.spec, out.coeffs.copy())
