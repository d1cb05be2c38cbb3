"""Numba kernels for the 2-d reference-solver hot path (upwind advection,
implicit diffusion).

The per-step work is two memory passes: one fused kernel computes the
explicit advection + reaction right-hand side row by row and immediately
runs the y-direction tridiagonal solve on the cache-hot row (rows are
independent, so this parallelizes cleanly), then a column-blocked sweep
solves the x direction.  Both axis solves share one constant-coefficient
Thomas factorization.  Upwind selection uses max/min instead of branches so
the inner loops vectorize.  Lines never interact, so any thread partition
produces bit-identical results.
"""

import math

import numpy as np
from numba import njit, prange

_BLOCK = 512

# Implicit diffusion spreads an exponentially decaying halo across the whole
# grid; once amplitudes fall below this they are flushed to zero, both to
# keep them meaningless-but-harmless and because subnormal arithmetic would
# otherwise dominate the runtime.
FLUSH_THRESHOLD = 1e-250


def thomas_coefficients(n: int, theta: float):
    """Elimination coefficients for I - dt D lap with Neumann ends.

    Returns (inv, thinv): the forward pass is
    w[k] = w[k]*inv[k] + thinv[k]*w[k-1], the backward pass is
    w[k] += thinv[k]*w[k+1].
    """
    diag = np.full(n, 1.0 + 2.0 * theta)
    diag[0] = diag[-1] = 1.0 + theta
    inv = np.empty(n)
    thinv = np.empty(n)
    cp_prev = 0.0
    for k in range(n):
        denom = diag[k] + theta * cp_prev
        inv[k] = 1.0 / denom
        cp_prev = -theta * inv[k]
        thinv[k] = theta * inv[k]
    return inv, thinv


@njit(cache=True, parallel=True, fastmath=True)
def fused_step_rows(u, out, vxf, vyf, dt_dx, dt, c1, c2, c3, arrhenius_e,
                    inv, thinv, solve_y):
    """out = u - dt*div(v u) + dt*r(u), then the y-axis implicit solve.

    vxf has shape (nx+1, ny), vyf (nx, ny+1); face k of an axis sits between
    cells k-1 and k, and boundary fluxes are zero.  The logistic, linear and
    cubic kinetics are all cubics in u and arrive as Horner coefficients
    (c1, c2, c3), keeping the hot loop branch free; the Arrhenius law needs
    its own loop for the exponential.
    """
    nx, ny = u.shape
    for i in prange(nx):
        lmask = 1.0 if i > 0 else 0.0
        rmask = 1.0 if i < nx - 1 else 0.0
        im = i - 1 if i > 0 else 0
        ip = i + 1 if i < nx - 1 else nx - 1
        if arrhenius_e > 0.0:
            for j in range(ny):
                uc = u[i, j]
                vl = vxf[i, j]
                fl = lmask * (max(vl, 0.0) * u[im, j] + min(vl, 0.0) * uc)
                vr = vxf[i + 1, j]
                fr = rmask * (max(vr, 0.0) * uc + min(vr, 0.0) * u[ip, j])
                gl = 0.0
                if j > 0:
                    wl = vyf[i, j]
                    gl = max(wl, 0.0) * u[i, j - 1] + min(wl, 0.0) * uc
                gr = 0.0
                if j < ny - 1:
                    wr = vyf[i, j + 1]
                    gr = max(wr, 0.0) * uc + min(wr, 0.0) * u[i, j + 1]
                val = uc - dt_dx * (fr - fl + gr - gl)
                if uc > 0.0:
                    val += dt * math.exp(-arrhenius_e / uc) * (1.0 - uc)
                out[i, j] = val
        else:
            for j in range(ny):
                uc = u[i, j]
                vl = vxf[i, j]
                fl = lmask * (max(vl, 0.0) * u[im, j] + min(vl, 0.0) * uc)
                vr = vxf[i + 1, j]
                fr = rmask * (max(vr, 0.0) * uc + min(vr, 0.0) * u[ip, j])
                gl = 0.0
                if j > 0:
                    wl = vyf[i, j]
                    gl = max(wl, 0.0) * u[i, j - 1] + min(wl, 0.0) * uc
                gr = 0.0
                if j < ny - 1:
                    wr = vyf[i, j + 1]
                    gr = max(wr, 0.0) * uc + min(wr, 0.0) * u[i, j + 1]
                out[i, j] = (uc - dt_dx * (fr - fl + gr - gl)
                             + dt * uc * (c1 + uc * (c2 + uc * c3)))
        if solve_y:
            # The x sweep that follows flushes the subnormal halo, so this
            # solve can stay select-free.
            out[i, 0] = out[i, 0] * inv[0]
            for j in range(1, ny):
                out[i, j] = out[i, j] * inv[j] + thinv[j] * out[i, j - 1]
            for j in range(ny - 2, -1, -1):
                out[i, j] += thinv[j] * out[i, j + 1]


@njit(cache=True, parallel=True, fastmath=True)
def sweep_axis0(w, inv, thinv):
    """In-place tridiagonal solve along axis 0 for every column."""
    nx, ny = w.shape
    nb = (ny + _BLOCK - 1) // _BLOCK
    for b in prange(nb):
        j0 = b * _BLOCK
        j1 = min(ny, j0 + _BLOCK)
        for j in range(j0, j1):
            w[0, j] *= inv[0]
        for i in range(1, nx):
            iv = inv[i]
            tv = thinv[i]
            for j in range(j0, j1):
                w[i, j] = w[i, j] * iv + tv * w[i - 1, j]
        for i in range(nx - 2, -1, -1):
            tv = thinv[i]
            for j in range(j0, j1):
                val = w[i, j] + tv * w[i + 1, j]
                w[i, j] = val if abs(val) > FLUSH_THRESHOLD else 0.0
