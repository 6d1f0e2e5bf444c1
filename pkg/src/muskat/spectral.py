"""Grids, FFT transforms and Fourier multipliers on the periodic strip.

Horizontal variables live on the torus ``[0, 2*pi)^d`` sampled at ``nx``
points per dimension; the vertical variable lives on ``[-b, 0]`` sampled at
``nz`` equispaced nodes.  Coefficients are stored in numpy FFT order and are
normalized so that ``coeffs[0]`` is the mean of the field::

    f(x) = sum_xi coeffs[xi] * exp(i xi.x)

The Nyquist wavenumber is kept in the arrays, but odd symbols (first
derivatives) are zeroed there so that every multiplier preserves realness.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import SpecMismatch


@dataclass(frozen=True)
class DomainSpec:
    """Discretization of the strip ``T^d x [-b, 0]``."""

    d: int = 1
    b: float = 1.0
    nx: int = 32
    nz: int = 65

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")
        if not self.b > 0:
            raise ValueError(f"depth b must be positive, got {self.b}")
        if self.nx < 8 or self.nx % 2:
            raise ValueError(f"nx must be even and >= 8, got {self.nx}")
        if self.nz < 9 or self.nz % 2 == 0:
            raise ValueError(f"nz must be odd and >= 9, got {self.nz}")

    def with_nz(self, nz):
        return DomainSpec(self.d, self.b, self.nx, nz)

    @property
    def grid_shape(self):
        return (self.nx,) * self.d

    @property
    def strip_shape(self):
        return (self.nz,) + self.grid_shape

    @property
    def axes(self):
        """Horizontal FFT axes of a strip array."""
        return tuple(range(1, self.d + 1))

    @cached_property
    def xi(self):
        """Integer wavenumbers, shape ``(d, nx, ..., nx)``."""
        k = np.fft.fftfreq(self.nx, 1.0 / self.nx)
        return np.array(np.meshgrid(*([k] * self.d), indexing="ij"))

    @cached_property
    def xi_odd(self):
        """Wavenumbers for odd symbols, with the Nyquist row zeroed."""
        k = np.fft.fftfreq(self.nx, 1.0 / self.nx)
        k[self.nx // 2] = 0.0
        return np.array(np.meshgrid(*([k] * self.d), indexing="ij"))

    @cached_property
    def kmag(self):
        return np.sqrt(np.sum(self.xi**2, axis=0))

    @cached_property
    def x(self):
        """Physical grid coordinates, shape ``(d, nx, ..., nx)``."""
        x1 = 2 * np.pi * np.arange(self.nx) / self.nx
        return np.array(np.meshgrid(*([x1] * self.d), indexing="ij"))

    @cached_property
    def z_nodes(self):
        z = np.linspace(-self.b, 0.0, self.nz)
        z[0], z[-1] = -self.b, 0.0
        return z

    @property
    def dz(self):
        return self.b / (self.nz - 1)

    @cached_property
    def dealias_mask(self):
        """Two-thirds rule: keep ``|xi_i| <= (nx - 1) // 3`` in every direction."""
        kmax = (self.nx - 1) // 3
        return np.all(np.abs(self.xi) <= kmax, axis=0)

    def zshape(self, z):
        """Reshape a vector over z so it broadcasts against a strip array."""
        return np.asarray(z, dtype=float).reshape((-1,) + (1,) * self.d)


def _check_same(a, b):
    if a.spec != b.spec:
        raise SpecMismatch(f"{a.spec} != {b.spec}")


@dataclass(frozen=True, eq=False)
class SurfaceField:
    """Real field on the torus, stored as conjugate-symmetric coefficients."""

    spec: DomainSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.spec.grid_shape:
            raise SpecMismatch(
                f"coefficient shape {c.shape} != {self.spec.grid_shape}"
            )
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, spec):
        return cls(spec, np.zeros(spec.grid_shape, dtype=complex))

    @classmethod
    def from_values(cls, spec, values):
        return transform_forward(values, spec)

    @classmethod
    def from_modes(cls, spec, modes):
        """Build ``sum amp * cos(xi.x)`` from ``{mode tuple: amplitude}``."""
        c = np.zeros(spec.grid_shape, dtype=complex)
        for mode, amp in modes.items():
            mode = tuple(int(m) for m in np.atleast_1d(mode))
            if len(mode) != spec.d:
                raise ValueError(f"mode {mode} has wrong dimension for d={spec.d}")
            if any(abs(m) > spec.nx // 2 for m in mode):
                raise ValueError(f"mode {mode} outside the lattice")
            idx = tuple(m % spec.nx for m in mode)
            neg = tuple(-m % spec.nx for m in mode)
            if idx == neg:
                c[idx] += amp
            else:
                c[idx] += amp / 2
                c[neg] += amp / 2
        return cls(spec, c)

    def values(self):
        return transform_inverse(self)

    @property
    def mean(self):
        return self.coeffs.flat[0].real

    def zero_mean(self):
        c = self.coeffs.copy()
        c.flat[0] = 0.0
        return SurfaceField(self.spec, c)

    def is_conjugate_symmetric(self, atol=1e-12):
        c = self.coeffs
        flipped = np.conj(np.roll(np.flip(c), 1, axis=tuple(range(c.ndim))))
        return bool(np.max(np.abs(c - flipped), initial=0.0) <= atol)

    def shift(self, offsets):
        """Translate by whole grid cells: ``f(x) -> f(x - offsets*h)``."""
        return SurfaceField.from_values(
            self.spec, np.roll(self.values(), offsets, axis=tuple(range(self.spec.d)))
        )

    def __add__(self, other):
        _check_same(self, other)
        return SurfaceField(self.spec, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same(self, other)
        return SurfaceField(self.spec, self.coeffs - other.coeffs)

    def __neg__(self):
        return SurfaceField(self.spec, -self.coeffs)

    def __mul__(self, alpha):
        return SurfaceField(self.spec, self.coeffs * alpha)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SurfaceField(d={self.spec.d}, nx={self.spec.nx}, b={self.spec.b})"


@dataclass(frozen=True, eq=False)
class StripField:
    """A stack of surface coefficient slabs, one per vertical node."""

    spec: DomainSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.spec.strip_shape:
            raise SpecMismatch(
                f"strip coefficient shape {c.shape} != {self.spec.strip_shape}"
            )
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, spec):
        return cls(spec, np.zeros(spec.strip_shape, dtype=complex))

    @classmethod
    def from_values(cls, spec, values):
        values = np.asarray(values, dtype=float)
        return cls(spec, np.fft.fftn(values, axes=spec.axes) / spec.nx**spec.d)

    @classmethod
    def constant_in_z(cls, field):
        spec = field.spec
        return cls(spec, np.broadcast_to(field.coeffs, spec.strip_shape).copy())

    @property
    def z_nodes(self):
        return self.spec.z_nodes

    def values(self):
        spec = self.spec
        return np.fft.ifftn(self.coeffs * spec.nx**spec.d, axes=spec.axes).real

    def slab(self, i):
        return SurfaceField(self.spec, self.coeffs[i])

    @property
    def top(self):
        return self.slab(-1)

    @property
    def bottom(self):
        return self.slab(0)

    def __add__(self, other):
        _check_same(self, other)
        return StripField(self.spec, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same(self, other)
        return StripField(self.spec, self.coeffs - other.coeffs)

    def __neg__(self):
        return StripField(self.spec, -self.coeffs)

    def __mul__(self, alpha):
        return StripField(self.spec, self.coeffs * alpha)

    __rmul__ = __mul__

    def __repr__(self):
        s = self.spec
        return f"StripField(d={s.d}, nx={s.nx}, nz={s.nz}, b={s.b})"


@dataclass(frozen=True, eq=False)
class Multiplier:
    """A Fourier multiplier tabulated on the lattice of one domain."""

    spec: DomainSpec
    symbol: np.ndarray
    descriptor: str = ""

    def __call__(self, field):
        return apply_multiplier(field, self)

    def __matmul__(self, other):
        _check_same(self, other)
        return Multiplier(
            self.spec, self.symbol * other.symbol, f"{self.descriptor}*{other.descriptor}"
        )


# ---------------------------------------------------------------- transforms


def transform_forward(values, spec):
    values = np.asarray(values, dtype=float)
    if values.shape != spec.grid_shape:
        raise SpecMismatch(f"grid shape {values.shape} != {spec.grid_shape}")
    return SurfaceField(spec, np.fft.fftn(values) / spec.nx**spec.d)


def transform_inverse(field):
    spec = field.spec
    return np.fft.ifftn(field.coeffs * spec.nx**spec.d).real


def to_physical(coeffs, spec):
    """Inverse transform over the trailing ``d`` axes of any array."""
    axes = tuple(range(-spec.d, 0))
    return np.fft.ifftn(coeffs * spec.nx**spec.d, axes=axes).real


def to_spectral(values, spec):
    axes = tuple(range(-spec.d, 0))
    return np.fft.fftn(values, axes=axes) / spec.nx**spec.d


def grid_l2(values):
    """Root-mean-square over the grid (the normalized L2 norm)."""
    values = np.asarray(values)
    return float(np.sqrt(np.sum(values**2) / values.size))


def coeff_l2(field):
    return float(np.sqrt(np.sum(np.abs(field.coeffs) ** 2)))


def inner(f, g):
    """Normalized L2 inner product ``mean(f * g)`` of two real fields."""
    _check_same(f, g)
    return float(np.sum(f.coeffs * np.conj(g.coeffs)).real)


# ---------------------------------------------------------------- multipliers


def apply_multiplier(field, mult):
    if field.spec != mult.spec:
        raise SpecMismatch(f"{field.spec} != {mult.spec}")
    if isinstance(field, StripField):
        return StripField(field.spec, field.coeffs * mult.symbol)
    return SurfaceField(field.spec, field.coeffs * mult.symbol)


def multiplier_m(spec):
    """The flat-strip DN symbol ``|xi| tanh(b |xi|)``."""
    k = spec.kmag
    return Multiplier(spec, k * np.tanh(spec.b * k), "m(D)")


def derivative(spec, axis=0):
    return Multiplier(spec, 1j * spec.xi_odd[axis], f"d/dx{axis + 1}")


def abs_d(spec):
    return Multiplier(spec, spec.kmag.astype(complex), "|D|")


def cosh_ratio(xi_mag, z_num, z_den, b):
    """``cosh((z_num + b)|xi|) / cosh((z_den + b)|xi|)`` without overflow.

    Broadcasts over all arguments.  Both heights must lie in ``[-b, 0]``.
    """
    k = np.asarray(xi_mag, dtype=float)
    zn = np.asarray(z_num, dtype=float)
    zd = np.asarray(z_den, dtype=float)
    slack = 1e-12 * b
    for z in (zn, zd):
        if np.any(z < -b - slack) or np.any(z > slack):
            raise ValueError("cosh_ratio heights must lie in [-b, 0]")
    return (
        np.exp((zn - zd) * k)
        * (1.0 + np.exp(-2.0 * (zn + b) * k))
        / (1.0 + np.exp(-2.0 * (zd + b) * k))
    )


def poisson_extension(eta):
    """Harmonic extension ``e^{|xi| z} eta_hat`` sampled on the z nodes."""
    spec = eta.spec
    decay = np.exp(spec.zshape(spec.z_nodes) * spec.kmag)
    return StripField(spec, decay * eta.coeffs)


def linear_symbol(spec, gamma):
    """``i gamma xi_1 - m(xi)``, the symbol of ``gamma d_1 - m(D)``."""
    k = spec.kmag
    return 1j * gamma * spec.xi_odd[0] - k * np.tanh(spec.b * k)


def resolvent_gamma(g, gamma, b=None):
    """Invert ``gamma d_1 - m(D)`` on the mean-zero sector; output mean is 0."""
    spec = g.spec
    if b is not None and b != spec.b:
        raise SpecMismatch(f"depth {b} != domain depth {spec.b}")
    sym = linear_symbol(spec, gamma)
    out = np.zeros_like(g.coeffs)
    nz = spec.kmag > 0
    out[nz] = g.coeffs[nz] / sym[nz]
    return SurfaceField(spec, out)


def semigroup_multiplier(spec, t, gamma):
    """``exp((gamma d_1 - m(D)) t)`` restricted to mean-zero fields."""
    if t < 0:
        raise ValueError(f"semigroup time must be non-negative, got {t}")
    sym = np.exp(linear_symbol(spec, gamma) * t)
    sym.flat[0] = 0.0
    return Multiplier(spec, sym, f"S({t:g})")


def dealias(coeffs, spec):
    """Zero the modes removed by the two-thirds rule (any leading axes)."""
    return coeffs * spec.dealias_mask
