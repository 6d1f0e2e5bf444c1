"""Sobolev, dyadic and Chemin-Lerner norms used as solver diagnostics.

The dyadic partition follows the usual Littlewood-Paley construction: a
smooth radial cutoff ``chi`` equal to 1 on ``|xi| <= 1/2`` and 0 on
``|xi| >= 1``, ``phi(xi) = chi(xi) - chi(2 xi)``, ``phi_0 = chi`` and
``phi_j(xi) = phi(2^-j xi)``.  Block ``j >= 1`` is supported in
``2^(j-2) < |xi| < 2^j``.

All L2 norms in x use the normalized measure, so that they coincide with
the l2 norm of the stored Fourier coefficients.
"""

import math
from functools import lru_cache

import numpy as np


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        s = 1.0 - t
        c = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return a / (a + c)


def chi(r):
    """Radial cutoff evaluated at ``r = |xi|``."""
    return 1.0 - _smooth_step(2.0 * np.asarray(r, dtype=float) - 1.0)


def phi_j(r, j):
    r = np.asarray(r, dtype=float)
    if j == 0:
        return chi(r)
    return chi(r / 2.0**j) - chi(r / 2.0 ** (j - 1))


def n_blocks(spec):
    """Number of blocks needed to exhaust the lattice."""
    kmax = float(np.max(spec.kmag))
    # chi(2^-J kmax) = 1 once 2^(J-1) >= kmax
    return max(1, math.ceil(math.log2(max(kmax, 1.0))) + 2)


@lru_cache(maxsize=32)
def block_weights(spec):
    """``phi_j(|xi|)`` tabulated on the lattice for every block index."""
    out = []
    for j in range(n_blocks(spec)):
        w = phi_j(spec.kmag, j)
        w.setflags(write=False)
        out.append(w)
    return tuple(out)


def sobolev_norm(f, s):
    w = (1.0 + f.spec.kmag**2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def aniso_weight(xi):
    """Low-frequency weight ``(xi_1^2 + |xi|^4) / |xi|^2`` of the anisotropic space."""
    xi = np.asarray(xi, dtype=float)
    k2 = float(np.sum(xi**2))
    if k2 == 0.0:
        raise ValueError("anisotropic weight is undefined at xi = 0")
    return (xi[0] ** 2 + k2**2) / k2


def dyadic_block(f, j):
    if j < 0:
        raise ValueError("block index must be non-negative")
    weights = block_weights(f.spec)
    if j >= len(weights):
        return type(f)(f.spec, np.zeros_like(f.coeffs))
    return type(f)(f.spec, f.coeffs * weights[j])


def dyadic_block_norms(f, s=0.0, sharp=False):
    """Per-block weighted norms ``2^(s j) ||Delta_j f||``."""
    out = []
    for j, weight in enumerate(block_weights(f.spec)):
        if sharp and j == 0:
            out.append(0.0)
            continue
        blk = f.coeffs * weight
        out.append(2.0 ** (s * j) * float(np.sqrt(np.sum(np.abs(blk) ** 2))))
    return out


def dyadic_norm(f, s, sharp=False):
    """Square-function norm equivalent to ``sobolev_norm``."""
    blocks = np.asarray(dyadic_block_norms(f, s, sharp))
    return float(np.sqrt(np.sum(blocks**2)))


def _trapezoid(y, z, axis=0):
    return np.trapezoid(y, z, axis=axis) if hasattr(np, "trapezoid") else np.trapz(y, z, axis=axis)


def chemin_lerner_norm(v, q, s, sharp=False):
    """``(sum_j 2^(2sj) ||Delta_j v||^2_{L^q_z L^2_x})^(1/2)`` on a strip field."""
    if not (1 <= q <= math.inf):
        raise ValueError(f"q must lie in [1, inf], got {q}")
    spec = v.spec
    z = spec.z_nodes
    axes = spec.axes
    total = 0.0
    for j, weight in enumerate(block_weights(spec)):
        if (sharp and j == 0) or not np.any(weight):
            continue
        slab_l2 = np.sqrt(np.sum(np.abs(v.coeffs * weight) ** 2, axis=axes))
        if q == math.inf:
            lq = float(np.max(slab_l2))
        else:
            lq = float(_trapezoid(slab_l2**q, z) ** (1.0 / q))
        total += 4.0 ** (s * j) * lq**2
    return math.sqrt(total)


def norm_U(v, s):
    """Norm of ``L~inf(I; H^s) cap L~1(I; H^(s+1))`` on ``I = [-b, 0]``."""
    return chemin_lerner_norm(v, math.inf, s) + chemin_lerner_norm(v, 1, s + 1)
