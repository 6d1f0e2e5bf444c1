"""Finite-difference reference for the Dirichlet-Neumann operator (d = 1).

Solves ``div(A grad v) = 0`` on the straightened strip directly, with

    A = [[d_z rho,   -d_x rho],
         [-d_x rho,  (1 + (d_x rho)^2) / d_z rho]],

``v = f`` on ``z = 0`` and zero conormal flux on ``z = -b``.  The vertical
direction uses a conservative vertex-centred second-order stencil (half
cell at the bed), the periodic direction uses Fourier collocation.  Nothing
here shares code with the Picard integral scheme beyond the coefficient
fields of the straightening.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dn import build_straightening
from .spectral import DomainSpec, SurfaceField


def _diff_matrix(nx):
    k = np.fft.fftfreq(nx, 1.0 / nx)
    k[nx // 2] = 0.0
    eye = np.eye(nx)
    return np.fft.ifft(1j * k[:, None] * np.fft.fft(eye, axis=0), axis=0).real


def _conormal_coefficients(eta, nz_fd):
    """``(a11, a12, a22)`` sampled on nodes and half nodes (``2 nz_fd - 1`` levels)."""
    spec = eta.spec
    fine = DomainSpec(1, spec.b, spec.nx, 2 * nz_fd - 1)
    eta_f = SurfaceField(fine, eta.coeffs)
    coeffs = build_straightening(eta_f, margin=0.0, dealiased=False)
    a11 = coeffs.dz_rho_phys
    a12 = -coeffs.grad_rho_phys[0]
    a22 = (1.0 + coeffs.grad_rho_phys[0] ** 2) / coeffs.dz_rho_phys
    return a11, a12, a22


def dn_oracle_fd(eta, f, nz_fd=129):
    spec = eta.spec
    if spec.d != 1:
        raise ValueError("the finite-difference oracle supports d = 1 only")
    if nz_fd < 5 or nz_fd % 2 == 0:
        raise ValueError("nz_fd must be odd and >= 5")
    nx, n = spec.nx, nz_fd
    h = spec.b / (n - 1)
    dx = _diff_matrix(nx)
    a11, a12, a22 = _conormal_coefficients(eta, n)
    node = lambda j: 2 * j
    half = lambda j: 2 * j + 1  # z_{j+1/2}

    rows = n - 1  # unknown levels 0 .. n-2, level n-1 is the Dirichlet surface
    blocks = [[None] * rows for _ in range(rows)]
    rhs = np.zeros((rows, nx))
    top = f.values()

    def put(j, col, block):
        if col == n - 1:
            rhs[j] -= block @ top
        else:
            blocks[j][col] = block if blocks[j][col] is None else blocks[j][col] + block

    for j in range(rows):
        ap = np.diag(a12[half(j)])
        cp = np.diag(a22[half(j)])
        a = np.diag(a11[node(j)])
        flux_up_next = ap @ dx / 2 + cp / h
        flux_up_here = ap @ dx / 2 - cp / h
        if j == 0:
            # half cell against the no-flux bed
            put(0, 0, 0.5 * h * dx @ a @ dx + flux_up_here)
            put(0, 1, flux_up_next)
            continue
        am = np.diag(a12[half(j - 1)])
        cm = np.diag(a22[half(j - 1)])
        b = np.diag(a12[node(j)])
        put(j, j + 1, flux_up_next / h + dx @ b / (2 * h))
        put(j, j, dx @ a @ dx + (flux_up_here - am @ dx / 2 - cm / h) / h)
        put(j, j - 1, (-am @ dx / 2 + cm / h) / h - dx @ b / (2 * h))

    mat = sp.bmat(blocks, format="csc")
    sol = spla.spsolve(mat, rhs.ravel()).reshape(rows, nx)
    if not np.all(np.isfinite(sol)):
        raise np.linalg.LinAlgError("finite-difference solve failed")

    dzv = (3 * top - 4 * sol[-1] + sol[-2]) / (2 * h)
    trace = a12[-1] * (dx @ top) + a22[-1] * dzv
    out = SurfaceField.from_values(spec, trace)
    return out
