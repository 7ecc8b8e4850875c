"""Grids, fields, model parameters and initial data.

The domain is a rectangle discretized into cell-centered finite volumes:
cell (ix, iy) has center ((ix + 1/2) hx, (iy + 1/2) hy) and quadrature
weight hx * hy.  Fields are stored flat in row-major order, index
iy * nx + ix.  One-dimensional problems use ny = 1 with ly = 1 so that
the cell weight reduces to hx.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration value; message names the key and constraint."""


class KernelError(ValueError):
    """Kernel cannot be built or used as requested."""


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class PositivityError(RuntimeError):
    """A field dropped below the positivity floor (strict policy)."""


class BlowupError(RuntimeError):
    """A field exceeded the blow-up cap or became non-finite."""


class EquilibriumError(RuntimeError):
    """No positive spatially homogeneous steady state was found."""


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on [0, lx] x [0, ly]."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if self.nx < 2:
            raise ValueError(f"nx must be >= 2, got {self.nx}")
        if self.ny < 1:
            raise ValueError(f"ny must be >= 1, got {self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f"extents must be positive, got lx={self.lx}, ly={self.ly}")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def dimension(self) -> int:
        return 1 if self.ny == 1 else 2

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_weight(self) -> float:
        """Midpoint quadrature weight of one cell."""
        return self.hx * self.hy

    @property
    def shape2d(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.hx

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.hy


def make_grid(nx: int, ny: int, lx: float, ly: float) -> Grid:
    """Build a grid, validating cell counts and extents.

    For 1-D problems pass ny=1 and ly=1.0; the uniform hx*hy cell weight
    then equals the 1-D measure hx.
    """
    return Grid(int(nx), int(ny), float(lx), float(ly))


@dataclass
class Field:
    """Scalar field sampled at cell centers, stored flat row-major."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if vals.size != self.grid.n_cells:
            raise ValueError(
                f"field length {vals.size} does not match grid with {self.grid.n_cells} cells"
            )
        self.values = vals

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.n_cells, float(value)))

    @classmethod
    def from_2d(cls, grid: Grid, arr: np.ndarray) -> "Field":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape != grid.shape2d:
            raise ValueError(f"array shape {arr.shape} does not match grid shape {grid.shape2d}")
        return cls(grid, arr.ravel())

    def as_2d(self) -> np.ndarray:
        """Row-major (ny, nx) view of the values."""
        return self.values.reshape(self.grid.shape2d)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def assert_finite(self, label: str = "field"):
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise BlowupError(f"{label} is non-finite at flat cell {bad}")


@dataclass(frozen=True)
class ModelParams:
    """Activator-inhibitor reaction and diffusion parameters.

    Reaction terms:
        f(u, v) = u**p / v**r - b1 * u + sigma1
        g(u, v) = u**q / v**s - b2 * v + sigma2
    d1 and d2 scale the (local or nonlocal) diffusion of u and v.
    """

    p: float = 2.0
    q: float = 2.0
    r: float = 1.0
    s: float = 0.0
    b1: float = 0.5
    b2: float = 1.0
    sigma1: float = 0.0
    sigma2: float = 0.0
    d1: float = 0.3
    d2: float = 30.0

    def __post_init__(self):
        for name in ("p", "q", "r", "s"):
            if getattr(self, name) < 0:
                raise ValueError(f"exponent {name} must be nonnegative, got {getattr(self, name)}")
        for name in ("b1", "b2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"decay rate {name} must be positive, got {getattr(self, name)}")
        for name in ("sigma1", "sigma2"):
            if getattr(self, name) < 0:
                raise ValueError(f"source {name} must be nonnegative, got {getattr(self, name)}")
        for name in ("d1", "d2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"diffusivity {name} must be positive, got {getattr(self, name)}")

    @classmethod
    def gm_reduction(cls, b: float = 0.5, d1: float = 0.3, d2: float = 30.0) -> "ModelParams":
        """Classical two-exponent reduction: p=q=2, r=1, s=0, b2=1, no sources."""
        return cls(p=2.0, q=2.0, r=1.0, s=0.0, b1=float(b), b2=1.0,
                   sigma1=0.0, sigma2=0.0, d1=float(d1), d2=float(d2))

    @property
    def is_gm_reduction(self) -> bool:
        return (self.p == 2.0 and self.q == 2.0 and self.r == 1.0 and self.s == 0.0
                and self.b2 == 1.0 and self.sigma1 == 0.0 and self.sigma2 == 0.0)


@dataclass(frozen=True)
class InitialCondition:
    """Constant base states with zero-mean uniform noise.

    The perturbed fields must stay strictly positive, so noise_amp must be
    smaller than both base values.
    """

    base_u: float = 0.1
    base_v: float = 0.1
    noise_amp: float = 0.01
    rng_seed: int = 1729

    def __post_init__(self):
        if self.noise_amp < 0:
            raise ValueError(f"noise_amp must be nonnegative, got {self.noise_amp}")
        if self.base_u - self.noise_amp <= 0 or self.base_v - self.noise_amp <= 0:
            raise ValueError(
                "initial data must stay strictly positive: "
                f"base_u={self.base_u}, base_v={self.base_v}, noise_amp={self.noise_amp}"
            )


def init_fields(grid: Grid, ic: InitialCondition) -> tuple[Field, Field]:
    """Draw the initial (u, v) pair.

    Noise is uniform on [-noise_amp, +noise_amp], drawn from a Philox
    counter-based generator so identical seeds reproduce identical fields
    on any platform.  u is drawn before v from a single stream.
    """
    rng = np.random.Generator(np.random.Philox(key=ic.rng_seed))
    n = grid.n_cells
    u = ic.base_u + ic.noise_amp * rng.uniform(-1.0, 1.0, size=n)
    v = ic.base_v + ic.noise_amp * rng.uniform(-1.0, 1.0, size=n)
    return Field(grid, u), Field(grid, v)
