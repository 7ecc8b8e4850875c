"""Interaction kernels and their grid discretization.

Two radial families are supported:

* ``gaussian``: unit continuous mass in R^n before truncation at a finite
  cutoff radius (mass is NOT renormalized after truncation, so the recorded
  discrete mass reflects the truncated kernel).
* ``rescaled_bump``: phi_j(z) = j**(n+2) * psi(j |z|) with psi a compactly
  supported bump of unit mass, the family used for the diffusive-limit
  study.  Its second moment M = integral |z|^2 psi(|z|) dz controls the
  limiting diffusivity M * d / (2n).

Discretization is midpoint collocation at cell-center offsets: each offset
carries weight phi(|z|) * hx * hy.  The center offset is excluded, since the
difference z(y) - z(x) it multiplies vanishes identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, KernelError

# Bump normalization constants c_n with integral of c_n (1-r)_+^2 over R^n
# equal to 1:  c_1 = 3/2,  c_2 = 6/pi.
_BUMP_NORM = {1: 1.5, 2: 6.0 / math.pi}
# Surface measure of the unit sphere S^(n-1) used in radial quadrature.
_SPHERE = {1: 2.0, 2: 2.0 * math.pi}


@dataclass(frozen=True)
class KernelSpec:
    """Continuous kernel description, independent of any grid.

    gaussian:       sigma > 0, cutoff_radius >= 3*sigma (default 4*sigma).
    rescaled_bump:  integer j >= 1, support radius exactly 1/j.
    """

    family: str
    sigma: float | None = None
    cutoff_radius: float | None = None
    j: int | None = None

    def __post_init__(self):
        if self.family == "gaussian":
            if self.sigma is None or self.sigma <= 0:
                raise KernelError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
            if self.cutoff_radius is None:
                object.__setattr__(self, "cutoff_radius", 4.0 * self.sigma)
            if self.cutoff_radius < 3.0 * self.sigma:
                raise KernelError(
                    f"cutoff_radius must be >= 3*sigma, got {self.cutoff_radius} < {3.0 * self.sigma}"
                )
            if self.j is not None:
                raise KernelError("gaussian kernel does not take j")
        elif self.family == "rescaled_bump":
            if self.j is None or int(self.j) != self.j or self.j < 1:
                raise KernelError(f"rescaled_bump kernel needs integer j >= 1, got {self.j}")
            object.__setattr__(self, "j", int(self.j))
            if self.sigma is not None or self.cutoff_radius is not None:
                raise KernelError("rescaled_bump kernel takes only j")
        else:
            raise KernelError(f"unknown kernel family {self.family!r}")

    @property
    def support_radius(self) -> float:
        if self.family == "gaussian":
            return float(self.cutoff_radius)
        return 1.0 / self.j


def gaussian_kernel(sigma: float, cutoff_radius: float | None = None) -> KernelSpec:
    return KernelSpec(family="gaussian", sigma=float(sigma),
                      cutoff_radius=None if cutoff_radius is None else float(cutoff_radius))


def rescaled_bump_kernel(j: int) -> KernelSpec:
    return KernelSpec(family="rescaled_bump", j=int(j))


def bump_psi(radius_fraction, dimension: int = 2):
    """Normalized bump profile psi(r) = c_n (1 - r)^2 on [0, 1].

    Arguments outside [0, 1] return 0.  Accepts scalars or arrays.
    """
    c = _bump_norm(dimension)
    r = np.asarray(radius_fraction, dtype=np.float64)
    out = np.where((r >= 0.0) & (r <= 1.0), c * (1.0 - r) ** 2, 0.0)
    if np.ndim(radius_fraction) == 0:
        return float(out)
    return out


def _bump_norm(dimension: int) -> float:
    try:
        return _BUMP_NORM[dimension]
    except KeyError:
        raise KernelError(f"bump profile defined for dimensions 1 and 2, got {dimension}")


def density(spec: KernelSpec, r: float, dimension: int) -> float:
    """Continuous kernel value at center distance r (zero beyond support)."""
    if r > spec.support_radius:
        return 0.0
    if spec.family == "gaussian":
        s2 = spec.sigma ** 2
        norm = (2.0 * math.pi * s2) ** (dimension / 2.0)
        return math.exp(-r * r / (2.0 * s2)) / norm
    j = spec.j
    return float(j ** (dimension + 2) * bump_psi(j * r, dimension))


def radial_second_moment(profile, dimension: int, n_points: int = 200_000) -> float:
    """Midpoint quadrature of integral |z|^2 profile(|z|) dz over R^n.

    ``profile`` is a radial function supported on [0, 1].
    """
    r = (np.arange(n_points) + 0.5) / n_points
    vals = np.asarray(profile(r), dtype=np.float64)
    # r^(n+1) collects the |z|^2 factor and the spherical volume element.
    integrand = vals * r ** (dimension + 1)
    return float(_SPHERE[dimension] * integrand.sum() / n_points)


def second_moment_M(spec: KernelSpec, dimension: int) -> float:
    """Second moment M of the unscaled bump profile for the given dimension.

    Only defined for the rescaled_bump family; the rescaling j**(n+2) is
    constructed so the discrete operator's second moment approaches this
    same M for every j.
    """
    if spec.family != "rescaled_bump":
        raise KernelError("second moment M is defined only for diffusive-limit kernels")
    return radial_second_moment(lambda r: bump_psi(r, dimension), dimension)


@dataclass(frozen=True)
class DiscreteKernel:
    """Kernel collocated on a grid as an offset stencil.

    offsets:       (K, 2) integer array of (dix, diy) cell offsets, center
                   excluded, closed under negation.
    weights:       (K,) nonnegative midpoint weights phi(|z|) * hx * hy.
    mass_lambda:   sum of weights; bounds the discrete operator by
                   |Gamma z| <= 2 * mass_lambda * max|z|.
    second_moment: sum of weights * |z|^2.
    lambda_loc:    (ny, nx) position-dependent in-domain mass, precomputed
                   for the fast operator path.
    """

    spec: KernelSpec
    grid: Grid
    offsets: np.ndarray
    weights: np.ndarray
    mass_lambda: float
    second_moment: float
    lambda_loc: np.ndarray = field(repr=False)

    def weight_at(self, dix: int, diy: int) -> float:
        """Weight of one offset, 0.0 if absent from the stencil."""
        hit = np.flatnonzero((self.offsets[:, 0] == dix) & (self.offsets[:, 1] == diy))
        return float(self.weights[hit[0]]) if hit.size else 0.0


def discretize_kernel(spec: KernelSpec, grid: Grid) -> DiscreteKernel:
    """Collocate a kernel on a grid.

    Raises KernelError when the support contains no off-center cell
    (support smaller than one grid spacing: the kernel is unresolved).
    """
    hx, hy = grid.hx, grid.hy
    radius = spec.support_radius
    rx = int(math.floor(radius / hx))
    ry = int(math.floor(radius / hy)) if grid.dimension == 2 else 0

    offsets = []
    weights = []
    for diy in range(-ry, ry + 1):
        for dix in range(-rx, rx + 1):
            if dix == 0 and diy == 0:
                continue
            dist = math.hypot(dix * hx, diy * hy)
            if dist > radius:
                continue
            w = density(spec, dist, grid.dimension) * grid.cell_weight
            if w > 0.0:
                offsets.append((dix, diy))
                weights.append(w)

    if not offsets:
        raise KernelError(
            f"kernel unresolved on grid: support radius {radius} admits no "
            f"off-center cell at spacing hx={hx}, hy={hy}"
        )

    off = np.array(offsets, dtype=np.int64)
    w = np.array(weights, dtype=np.float64)
    dist2 = (off[:, 0] * hx) ** 2 + (off[:, 1] * hy) ** 2
    lam_loc = _in_domain_mass(off, w, grid)
    return DiscreteKernel(
        spec=spec,
        grid=grid,
        offsets=off,
        weights=w,
        mass_lambda=float(w.sum()),
        second_moment=float((w * dist2).sum()),
        lambda_loc=lam_loc,
    )


def _in_domain_mass(offsets: np.ndarray, weights: np.ndarray, grid: Grid) -> np.ndarray:
    """lambda_loc(x) = sum of weights whose offset stays inside the domain."""
    ny, nx = grid.shape2d
    lam = np.zeros((ny, nx))
    for (dix, diy), w in zip(offsets, weights):
        # A shift of nx (ny) or more lands outside for every cell; skipping
        # it also avoids the negative slice stop such offsets would produce.
        if abs(dix) >= nx or abs(diy) >= ny:
            continue
        ys = slice(max(0, -diy), ny - max(0, diy))
        xs = slice(max(0, -dix), nx - max(0, dix))
        lam[ys, xs] += w
    return lam
