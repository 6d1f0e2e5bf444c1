"""Random smooth fields with closed-form derivatives.

Each field is a finite sum of separable terms
``amp * cos(xi . x + phase) * Z(z)`` with ``Z(z) = exp(kappa z)`` or, for
fields that must vanish on the bed, ``exp(kappa z) - exp(-kappa b)``.  Every
derivative is evaluated analytically, so data built from these fields carry
no discretization error of their own.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linear import LinearData
from .spectral import StripField, SurfaceField, to_spectral


@dataclass(frozen=True)
class Term:
    xi: tuple
    amp: float
    phase: float
    kappa: float = 0.0
    bed_zero: bool = False


def _lattice(d, kmax, include_zero):
    rng = range(-kmax, kmax + 1)
    pts = [(a,) for a in range(0, kmax + 1)] if d == 1 else [
        (a, b) for a in rng for b in rng if (a, b) > (0, 0) or (a, b) == (0, 0)
    ]
    out = [p for p in pts if 0 < math.hypot(*p) <= kmax or (include_zero and not any(p))]
    return out


def random_terms(d, rng, *, kmax=6, decay=1.0, kappa_range=1.5, bed_zero=False,
                 include_zero=True, vertical=True):
    terms = []
    for xi in _lattice(d, kmax, include_zero):
        amp = rng.normal() * np.exp(-decay * math.hypot(*xi))
        phase = 0.0 if not any(xi) else rng.uniform(0, 2 * np.pi)
        kappa = rng.uniform(-kappa_range, kappa_range) if vertical else 0.0
        if bed_zero and abs(kappa) < 0.2:
            kappa = 0.2 if kappa >= 0 else -0.2
        terms.append(Term(tuple(int(x) for x in xi), float(amp), float(phase),
                          float(kappa), bed_zero))
    return terms


class SmoothStrip:
    """A sum of separable terms on the strip."""

    def __init__(self, spec, terms):
        self.spec = spec
        self.terms = list(terms)

    def _sample(self, dx=(), dz=0, z=None):
        spec = self.spec
        z = spec.z_nodes if z is None else np.atleast_1d(np.asarray(z, dtype=float))
        x = spec.x
        out = np.zeros((len(z),) + spec.grid_shape)
        for t in self.terms:
            arg = sum(t.xi[i] * x[i] for i in range(spec.d)) + t.phase
            # each x-derivative advances the phase by pi/2
            horiz = t.amp * np.cos(arg + 0.5 * np.pi * len(dx))
            for i in dx:
                horiz = horiz * t.xi[i]
            prof = t.kappa**dz * np.exp(t.kappa * z)
            if t.bed_zero and dz == 0:
                prof = prof - np.exp(-t.kappa * spec.b)
            out += prof.reshape((-1,) + (1,) * spec.d) * horiz
        return out

    def strip(self, dx=(), dz=0):
        return StripField(self.spec, to_spectral(self._sample(dx, dz), self.spec))

    def surface(self, z, dx=(), dz=0):
        vals = self._sample(dx, dz, z=[z])[0]
        return SurfaceField(self.spec, to_spectral(vals, self.spec))

    def laplacian(self):
        out = self.strip(dz=2)
        for i in range(self.spec.d):
            out = out + self.strip(dx=(i, i))
        return out


class SmoothSurface:
    def __init__(self, spec, terms):
        self.spec = spec
        self.terms = [t for t in terms if any(t.xi)]

    def field(self):
        spec = self.spec
        vals = np.zeros(spec.grid_shape)
        for t in self.terms:
            arg = sum(t.xi[i] * spec.x[i] for i in range(spec.d)) + t.phase
            vals += t.amp * np.cos(arg)
        return SurfaceField(spec, to_spectral(vals, spec))


def random_state(spec, rng, kmax=6):
    """Random ``(u, p, eta)`` with ``u_n = 0`` on the bed and mean-free ``eta``."""
    u = [SmoothStrip(spec, random_terms(spec.d, rng, kmax=kmax)) for _ in range(spec.d)]
    u.append(SmoothStrip(spec, random_terms(spec.d, rng, kmax=kmax, bed_zero=True)))
    p = SmoothStrip(spec, random_terms(spec.d, rng, kmax=kmax))
    eta = SmoothSurface(spec, random_terms(spec.d, rng, kmax=kmax, include_zero=False,
                                           vertical=False))
    return u, p, eta


def exact_forward(u, p, eta, gamma):
    """``T_3(u, p, eta)`` evaluated with exact calculus."""
    spec = p.spec
    eta_f = eta.field()
    z = spec.zshape(spec.z_nodes)
    pe = np.exp(z * spec.kmag) * eta_f.coeffs
    F = []
    for i in range(spec.d):
        F.append(u[i].strip() + p.strip(dx=(i,))
                 + StripField(spec, 1j * spec.xi_odd[i] * pe))
    F.append(u[-1].strip() + p.strip(dz=1) + StripField(spec, spec.kmag * pe))
    G = u[-1].strip(dz=1)
    for i in range(spec.d):
        G = G + u[i].strip(dx=(i,))
    H = u[-1].surface(0.0) + SurfaceField(spec, 1j * gamma * spec.xi_odd[0] * eta_f.coeffs)
    K = p.surface(0.0)
    return LinearData(tuple(F), G, H, K)


def overdetermined_data(p):
    """``(f, h_plus, h_minus, k)`` induced by a pressure field, exactly."""
    spec = p.spec
    f = -p.laplacian()
    h_plus = -p.surface(0.0, dz=1)
    h_minus = -p.surface(-spec.b, dz=1)
    k = p.surface(0.0)
    return f, h_plus, h_minus, k
