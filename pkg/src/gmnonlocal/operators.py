"""Discrete diffusion operators.

``apply_nonlocal`` is the reference implementation of the convolution
operator

    (Gamma z)(x) = sum_{y in domain} w(x, y) * (z(y) - z(x)),

written as an explicit per-cell loop so it is easy to audit.  It is the
oracle against which ``apply_nonlocal_fast`` is tested.  The boundary
condition is plain domain truncation: pairs whose partner falls outside
the rectangle are dropped, which keeps constants in the kernel's null
space everywhere, including at the boundary.

``apply_laplacian_neumann`` is the standard 5-point Laplacian with
mirror-reflection ghost cells (zero flux).
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

from .core import Field, GridMismatchError
from .kernels import DiscreteKernel

# Above this stencil size the fast path switches from shifted-slice
# accumulation to FFT convolution.
_FFT_THRESHOLD = 64


def _check_grid(kernel: DiscreteKernel, z: Field):
    if kernel.grid != z.grid:
        raise GridMismatchError("kernel was discretized on a different grid than the field")


def apply_nonlocal(kernel: DiscreteKernel, z: Field) -> Field:
    """Reference convolution operator, brute per-cell accumulation."""
    _check_grid(kernel, z)
    ny, nx = z.grid.shape2d
    zz = z.as_2d().tolist()
    items = [(int(dx), int(dy), float(w))
             for (dx, dy), w in zip(kernel.offsets, kernel.weights)]
    out = np.zeros((ny, nx))
    for iy in range(ny):
        row_out = out[iy]
        for ix in range(nx):
            zc = zz[iy][ix]
            acc = 0.0
            for dx, dy, w in items:
                jx = ix + dx
                jy = iy + dy
                if 0 <= jx < nx and 0 <= jy < ny:
                    acc += w * (zz[jy][jx] - zc)
            row_out[ix] = acc
    return Field(z.grid, out.ravel())


def apply_nonlocal_fast(kernel: DiscreteKernel, z: Field) -> Field:
    """Vectorized convolution operator, identical result to apply_nonlocal.

    Computes sum_o w_o z(x + o) over in-domain offsets minus
    lambda_loc(x) * z(x), with lambda_loc precomputed at discretization.
    Small stencils use shifted-slice accumulation; large ones use
    zero-padded FFT convolution.
    """
    _check_grid(kernel, z)
    zz = z.as_2d()
    if len(kernel.weights) <= _FFT_THRESHOLD:
        gathered = _slice_convolve(kernel, zz)
    else:
        gathered = _fft_convolve(kernel, zz)
    out = gathered - kernel.lambda_loc * zz
    return Field(z.grid, out.ravel())


def shift_windows(nx: int, ny: int, dix: int, diy: int):
    """Destination and source slices pairing x with x + (dix, diy).

    Returns (dst_y, dst_x, src_y, src_x), or None when the shift moves
    every cell out of the rectangle.  The explicit emptiness check matters:
    a shift of nx or more would otherwise produce a negative slice stop
    that silently wraps.
    """
    if abs(dix) >= nx or abs(diy) >= ny:
        return None
    dst_y = slice(max(0, -diy), ny - max(0, diy))
    dst_x = slice(max(0, -dix), nx - max(0, dix))
    src_y = slice(max(0, diy), ny + min(0, diy))
    src_x = slice(max(0, dix), nx + min(0, dix))
    return dst_y, dst_x, src_y, src_x


def _slice_convolve(kernel: DiscreteKernel, zz: np.ndarray) -> np.ndarray:
    ny, nx = zz.shape
    acc = np.zeros_like(zz)
    for (dix, diy), w in zip(kernel.offsets, kernel.weights):
        win = shift_windows(nx, ny, dix, diy)
        if win is None:
            continue
        dst_y, dst_x, src_y, src_x = win
        acc[dst_y, dst_x] += w * zz[src_y, src_x]
    return acc


def _fft_convolve(kernel: DiscreteKernel, zz: np.ndarray) -> np.ndarray:
    rx = int(np.max(np.abs(kernel.offsets[:, 0])))
    ry = int(np.max(np.abs(kernel.offsets[:, 1])))
    image = np.zeros((2 * ry + 1, 2 * rx + 1))
    # Correlation written as convolution: the image is flipped, which is
    # the identity for these sign-symmetric stencils but kept explicit.
    image[ry - kernel.offsets[:, 1], rx - kernel.offsets[:, 0]] = kernel.weights
    return fftconvolve(zz, image, mode="same")


def apply_laplacian_neumann(z: Field) -> Field:
    """5-point Laplacian with mirror-reflection (zero-flux) boundaries."""
    grid = z.grid
    zz = z.as_2d()
    padded = np.pad(zz, ((0, 0), (1, 1)), mode="edge")
    out = (padded[:, :-2] - 2.0 * zz + padded[:, 2:]) / grid.hx ** 2
    if grid.dimension == 2:
        padded = np.pad(zz, ((1, 1), (0, 0)), mode="edge")
        out = out + (padded[:-2, :] - 2.0 * zz + padded[2:, :]) / grid.hy ** 2
    return Field(grid, out.ravel())


def bilinear_identity_residual(kernel: DiscreteKernel, v: Field, w: Field) -> float:
    """Residual of the discrete symmetrization identity.

    With A = sum_x v(x) (Gamma w)(x) dx and
    B = sum_{x,o} w_o (v(x+o) - v(x)) (w(x+o) - w(x)) dx,
    kernel symmetry forces A = -B/2; returns |A + B/2|.
    """
    _check_grid(kernel, v)
    _check_grid(kernel, w)
    cellw = v.grid.cell_weight
    gw = apply_nonlocal_fast(kernel, w).as_2d()
    a = float((v.as_2d() * gw).sum()) * cellw

    ny, nx = v.grid.shape2d
    vv = v.as_2d()
    ww = w.as_2d()
    b = 0.0
    for (dix, diy), wk in zip(kernel.offsets, kernel.weights):
        win = shift_windows(nx, ny, dix, diy)
        if win is None:
            continue
        dst_y, dst_x, src_y, src_x = win
        dv = vv[src_y, src_x] - vv[dst_y, dst_x]
        dw = ww[src_y, src_x] - ww[dst_y, dst_x]
        b += wk * float((dv * dw).sum())
    b *= cellw
    return abs(a + 0.5 * b)
