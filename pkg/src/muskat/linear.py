"""Linearized traveling-wave system on the strip.

Unknowns ``(u, p, eta)`` and data ``(F, G, H, K)`` are related by

    u + grad p + grad P eta = F      in the strip
    div u                  = G      in the strip
    u_n + gamma d_1 eta    = H      on z = 0
    p                      = K      on z = 0
    u_n                    = 0      on z = -b

where ``P eta`` is the harmonic extension ``e^{|xi| z} eta_hat``.  The solve
goes through the pressure problem: the overdetermined Neumann data must
satisfy a per-mode compatibility identity, whose defect ``psi`` determines
``eta`` through the symbol ``-i gamma xi_1 + m(xi)``.  The pressure then
solves a Dirichlet-top / Neumann-bed problem, and ``u`` is recovered from
the first equation.

Vertical derivatives of sampled strip fields are second-order finite
differences (centred inside, three-point one-sided at the ends); horizontal
derivatives and everything involving ``P eta`` are exact per mode.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .errors import CompatibilityViolation, NonzeroMean, ResidualTooLarge
from .norms import _trapezoid
from .spectral import (
    StripField,
    SurfaceField,
    cosh_ratio,
    multiplier_m,
    poisson_extension,
    resolvent_gamma,
)


@dataclass(eq=False)
class LinearData:
    """Right-hand side ``(F, G, H, K)``; ``F[-1]`` is the vertical component."""

    F: tuple
    G: StripField
    H: SurfaceField
    K: SurfaceField
    compatibility_residual: float = None

    @property
    def spec(self):
        return self.G.spec


@dataclass(eq=False)
class LinearSolution:
    u: tuple
    p: StripField
    eta: SurfaceField
    residuals: dict = field(default_factory=dict)


@dataclass(eq=False)
class UdlnResult:
    p: StripField
    residuals: dict


# ---------------------------------------------------------------- z calculus


def dz_fd(v):
    """Second-order vertical derivative of a sampled strip field."""
    c = v.coeffs
    h = v.spec.dz
    out = np.empty_like(c)
    out[1:-1] = (c[2:] - c[:-2]) / (2 * h)
    out[0] = (-3 * c[0] + 4 * c[1] - c[2]) / (2 * h)
    out[-1] = (3 * c[-1] - 4 * c[-2] + c[-3]) / (2 * h)
    return StripField(v.spec, out)


def grad_x(v):
    spec = v.spec
    return tuple(StripField(spec, 1j * spec.xi_odd[i] * v.coeffs) for i in range(spec.d))


def strip_l2(v):
    """``(1/b int ||v(z)||^2 dz)^(1/2)`` with the trapezoid rule."""
    spec = v.spec
    sq = np.sum(np.abs(v.coeffs) ** 2, axis=spec.axes)
    return float(np.sqrt(_trapezoid(sq, spec.z_nodes) / spec.b))


def _thomas(lower, diag, upper, rhs):
    """Tridiagonal solve along axis 0, vectorized over the remaining axes."""
    n = diag.shape[0]
    c = np.empty_like(upper, dtype=complex)
    d = np.empty_like(rhs, dtype=complex)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i - 1] * c[i - 1]
        if np.any(denom == 0):
            raise np.linalg.LinAlgError("singular tridiagonal system")
        if i < n - 1:
            c[i] = upper[i] / denom
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom
    x = np.empty_like(d)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


# ---------------------------------------------------------------- operations


def solve_udln(f, k, l):
    """Solve ``-Lap p = f``, ``p = k`` on top, ``-d_z p = l`` on the bed.

    Per mode this is ``(|xi|^2 - d_z^2) p_hat = f_hat``, discretized by the
    three-point stencil with a second-order one-sided Neumann row.
    """
    spec = f.spec
    h = spec.dz
    n = spec.nz
    k2 = np.broadcast_to(spec.kmag**2, spec.grid_shape)
    off = -np.ones((n - 2,) + spec.grid_shape) / h**2

    # unknowns p_0 .. p_{n-2}; p_{n-1} = k is eliminated into the last row
    diag = np.empty((n - 1,) + spec.grid_shape)
    diag[1:] = k2 + 2.0 / h**2
    rhs = f.coeffs[: n - 1].copy()
    rhs[-1] = rhs[-1] + k.coeffs / h**2
    # Neumann row (3 p0 - 4 p1 + p2) / (2h) = l, with p2 eliminated via row 1
    diag[0] = 2.0
    upper = off.copy()
    upper[0] = k2 * h**2 - 2.0
    rhs[0] = 2 * h * l.coeffs + h**2 * f.coeffs[1]
    lower = off.copy()

    p = np.empty(spec.strip_shape, dtype=complex)
    p[: n - 1] = _thomas(lower, diag, upper, rhs)
    p[-1] = k.coeffs
    out = StripField(spec, p)
    return UdlnResult(out, _udln_residuals(out, f, k, l))


def _udln_residuals(p, f, k, l):
    spec = p.spec
    c = p.coeffs
    h = spec.dz
    lap = (c[2:] - 2 * c[1:-1] + c[:-2]) / h**2 - spec.kmag**2 * c[1:-1]
    interior = float(np.max(np.abs(-lap - f.coeffs[1:-1]), initial=0.0))
    dirichlet = float(np.max(np.abs(c[-1] - k.coeffs)))
    neumann = float(np.max(np.abs(-(-3 * c[0] + 4 * c[1] - c[2]) / (2 * h) - l.coeffs)))
    return {"interior": interior, "dirichlet": dirichlet, "neumann": neumann}


def xi_operator(k):
    """Exact lift ``k_hat cosh((z+b)|xi|)/cosh(b|xi|)`` of surface data."""
    spec = k.spec
    ker = cosh_ratio(spec.kmag, spec.zshape(spec.z_nodes), 0.0, spec.b)
    return StripField(spec, ker * k.coeffs)


def _sech(spec):
    return cosh_ratio(spec.kmag, -spec.b, 0.0, spec.b)


def compute_psi(f, h_plus, h_minus, k):
    spec = f.spec
    ker = cosh_ratio(spec.kmag, spec.zshape(spec.z_nodes), 0.0, spec.b)
    bulk = _trapezoid(f.coeffs * ker, spec.z_nodes, axis=0)
    m = multiplier_m(spec).symbol
    psi = bulk - k.coeffs * m - h_plus.coeffs + h_minus.coeffs * _sech(spec)
    return SurfaceField(spec, psi)


def check_compatibility(data):
    """Zero-mode defect ``|int G_hat(0, z) dz - H_hat(0)|``; cached on ``data``.

    Simpson's rule, as for ``psi``, so smooth data are not rejected for a
    quadrature error.
    """
    spec = data.spec
    g0 = data.G.coeffs[(slice(None),) + (0,) * spec.d]
    res = float(abs(simpson(g0, x=spec.z_nodes) - data.H.coeffs.flat[0]))
    data.compatibility_residual = res
    return res


def solve_eta_symbol(psi, gamma, b=None, tol=1e-10):
    """``eta_hat = psi_hat / (-i gamma xi_1 + m(xi))`` with zero mean."""
    if abs(psi.coeffs.flat[0]) > tol:
        raise NonzeroMean(f"psi_hat(0) = {abs(psi.coeffs.flat[0]):.3e} exceeds {tol:g}")
    return -resolvent_gamma(psi, gamma, b)


def solve_T2(f, h_plus, h_minus, k, gamma, *, compat_tol=1e-6, residual_tol=None, psi=None):
    """Solve for ``(p, eta)`` given pressure-problem data ``(f, h+, h-, k)``.

    ``psi`` may be supplied when a more accurate evaluation than
    ``compute_psi`` is available.  Returns ``(p, eta, residuals)``.
    """
    spec = f.spec
    if psi is None:
        psi = compute_psi(f, h_plus, h_minus, k)
    psi0 = abs(psi.coeffs.flat[0])
    if psi0 > compat_tol:
        raise CompatibilityViolation(f"|psi_hat(0)| = {psi0:.3e} exceeds {compat_tol:g}")
    eta = solve_eta_symbol(psi.zero_mean(), gamma, spec.b)
    kmag = spec.kmag
    bed_flux = SurfaceField(spec, kmag * np.exp(-spec.b * kmag) * eta.coeffs)
    udln = solve_udln(f, k, h_minus + bed_flux)
    p = udln.p

    c = p.coeffs
    dzp_top = (3 * c[-1] - 4 * c[-2] + c[-3]) / (2 * spec.dz)
    top = -dzp_top - kmag * eta.coeffs + 1j * gamma * spec.xi_odd[0] * eta.coeffs
    residuals = dict(udln.residuals)
    residuals["psi0"] = float(psi0)
    residuals["top_neumann"] = float(np.max(np.abs(top - h_plus.coeffs)))
    if residual_tol is not None and residuals["top_neumann"] > residual_tol:
        raise ResidualTooLarge(
            f"top Neumann residual {residuals['top_neumann']:.3e} > {residual_tol:g}"
        )
    return p, eta, residuals


def dz_pressure(p, f, l, flux=None):
    """``d_z p`` from the vertical ODE ``p'' = |xi|^2 p - f`` and ``-p'(-b) = l``.

    The cumulative trapezoid has a smooth O(h^2) error, so differencing the
    result again stays second order up to the boundary rows.  When ``flux`` is
    given the source is ``f - d_z flux`` and that derivative is integrated
    exactly, ``int d_z flux = flux(z) - flux(-b)``.
    """
    spec = p.spec
    g = spec.kmag**2 * p.coeffs - f.coeffs
    out = np.empty_like(p.coeffs)
    out[0] = -l.coeffs
    out[1:] = -l.coeffs + cumulative_trapezoid(g, dx=spec.dz, axis=0)
    if flux is not None:
        out = out + flux.coeffs - flux.coeffs[0]
    return StripField(spec, out)


def _div_x(Fx):
    spec = Fx[0].spec
    out = np.zeros_like(Fx[0].coeffs)
    for i, Fi in enumerate(Fx):
        out = out + 1j * spec.xi_odd[i] * Fi.coeffs
    return StripField(spec, out)


def _div(F):
    return _div_x(F[:-1]) + dz_fd(F[-1])


def _grad_poisson(eta):
    """``grad_(x,z) P eta`` exactly per mode."""
    spec = eta.spec
    pe = poisson_extension(eta)
    parts = list(grad_x(pe))
    parts.append(StripField(spec, spec.kmag * pe.coeffs))
    return tuple(parts)


def _psi_from_data(data):
    """``psi`` for the tuple induced by ``(F, G, H, K)``.

    The ``d_z F_n`` part of ``f = G - div F`` is integrated by parts against
    the cosh kernel, so no vertical difference enters the quadrature, and
    Simpson's rule (``nz`` is odd) is used for the smooth integrand:
    ``psi = int Q (G - div_x F_x) + int Q' F_n - m K - H``.
    """
    spec = data.spec
    z = spec.zshape(spec.z_nodes)
    ker = cosh_ratio(spec.kmag, z, 0.0, spec.b)
    dker = spec.kmag * np.tanh((z + spec.b) * spec.kmag) * ker
    bulk = (data.G - _div_x(data.F[:-1])).coeffs
    integrand = ker * bulk + dker * data.F[-1].coeffs
    psi = simpson(integrand, x=spec.z_nodes, axis=0)
    psi = psi - multiplier_m(spec).symbol * data.K.coeffs - data.H.coeffs
    return SurfaceField(spec, psi)


def forward_map(u, p, eta, gamma):
    """Numerical image ``T_3(u, p, eta)`` with the solver's discrete calculus."""
    spec = p.spec
    grad_p = grad_x(p) + (dz_fd(p),)
    gpe = _grad_poisson(eta)
    F = tuple(ui + gp + ge for ui, gp, ge in zip(u, grad_p, gpe))
    G = _div(u)
    d1eta = SurfaceField(spec, 1j * gamma * spec.xi_odd[0] * eta.coeffs)
    H = u[-1].top + d1eta
    K = p.top
    return LinearData(F, G, H, K)


def solve_T3(data, gamma, *, compat_tol=1e-6, residual_tol=None):
    """Solve the full linear system for ``(u, p, eta)``.

    ``psi`` and the vertical pressure gradient are evaluated from the data
    with ``d_z F_n`` integrated exactly; ``f = G - div F`` (with the discrete
    ``d_z``) only feeds the tridiagonal pressure solve.
    """
    spec = data.spec
    compat = check_compatibility(data)
    if compat > compat_tol:
        raise CompatibilityViolation(f"zero-mode defect {compat:.3e} exceeds {compat_tol:g}")
    F = data.F
    f = data.G - _div(F)
    h_plus = data.H - F[-1].top
    h_minus = -F[-1].bottom
    p, eta, res = solve_T2(
        f, h_plus, h_minus, data.K, gamma, compat_tol=compat_tol, residual_tol=residual_tol,
        psi=_psi_from_data(data),
    )
    kmag = spec.kmag
    bed_flux = SurfaceField(spec, kmag * np.exp(-spec.b * kmag) * eta.coeffs)
    f_bulk = data.G - _div_x(F[:-1])
    grad_p = grad_x(p) + (dz_pressure(p, f_bulk, h_minus + bed_flux, flux=F[-1]),)
    gpe = _grad_poisson(eta)
    u = tuple(Fi - gp - ge for Fi, gp, ge in zip(F, grad_p, gpe))
    # the bed value of u_n cancels identically; remove the roundoff
    un = u[-1].coeffs.copy()
    bed_residual = float(np.max(np.abs(un[0])))
    un[0] = 0.0
    u = u[:-1] + (StripField(spec, un),)

    residuals = linear_residuals(LinearSolution(u, p, eta), data, gamma)
    residuals["bed_before_cleanup"] = bed_residual
    residuals.update({f"T2_{k}": v for k, v in res.items()})
    return LinearSolution(u, p, eta, residuals)


def _surface_l2(f):
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def data_norm(data):
    """``||(F, G, H, K)||`` combining strip and surface l2 norms."""
    total = sum(strip_l2(v) ** 2 for v in data.F) + strip_l2(data.G) ** 2
    total += _surface_l2(data.H) ** 2 + _surface_l2(data.K) ** 2
    return float(np.sqrt(total))


def linear_residuals(sol, data, gamma):
    """Residuals of the five equations, each relative to ``||(F, G, H, K)||``.

    The image is computed with the discrete calculus of ``forward_map``.
    Scaling by the whole data norm keeps a small component of the data from
    inflating an otherwise tiny defect.
    """
    image = forward_map(sol.u, sol.p, sol.eta, gamma)
    scale = max(data_norm(data), 1e-300)
    return {
        "momentum": sum(strip_l2(a - b) ** 2 for a, b in zip(image.F, data.F)) ** 0.5 / scale,
        "divergence": strip_l2(image.G - data.G) / scale,
        "kinematic": _surface_l2(image.H - data.H) / scale,
        "dirichlet": _surface_l2(image.K - data.K) / scale,
        "bed": _surface_l2(sol.u[-1].bottom) / scale,
    }
