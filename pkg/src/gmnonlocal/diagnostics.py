"""Norms and boundedness functionals recorded along trajectories.

Three scalar functionals track the a-priori estimates that hold for the
continuous system independently of the interaction kernel:

* ``y_functional``:  integral of u**alpha / v**beta, monotone under an
  exponent window that involves the ratio gamma(d1, d2, alpha).
* ``lb_functional``: binomially weighted power sum
  integral of sum_k C(b,k) a**(k^2) u**k v**(b-k); the weight a must
  exceed the Sylvester threshold (d1+d2) / (2 sqrt(d1 d2)) for the
  quadratic form driving the estimate to stay positive definite.
* ``yj_functional``: kernel-weighted squared increment
  sum over pairs of w(x,y) (z(x) - z(y))^2, the quantity whose decay
  encodes smoothing under the rescaled kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Field, ModelParams, PositivityError
from .kernels import DiscreteKernel
from .operators import shift_windows


def lb_norm(z: Field, b: float) -> float:
    """Cell-weighted L^b norm (sum |z|^b * hx * hy) ** (1/b)."""
    if b < 1:
        raise ValueError(f"norm order must be >= 1, got {b}")
    total = float(np.sum(np.abs(z.values) ** b)) * z.grid.cell_weight
    return total ** (1.0 / b)


def compute_gamma(alpha: float, d1: float, d2: float) -> float:
    """Diffusivity-contrast ratio bounding the inhibitor exponent window.

    Equals 2 when d1 == d2 and decreases toward 1 as the contrast grows.
    """
    if alpha <= 0 or d1 <= 0 or d2 <= 0:
        raise ValueError(f"alpha, d1, d2 must be positive, got {alpha}, {d1}, {d2}")
    cross = (d1 - d2) ** 2 * (alpha + 1.0)
    num = 8.0 * d1 * d2 * (alpha + 2.0) + cross
    den = 4.0 * d1 * d2 * (alpha + 2.0) + cross
    return num / den


def sylvester_threshold(d1: float, d2: float) -> float:
    """Minimum admissible weight a: max(1, (d1 + d2) / (2 sqrt(d1 d2)))."""
    return max(1.0, (d1 + d2) / (2.0 * math.sqrt(d1 * d2)))


@dataclass(frozen=True)
class FunctionalParams:
    """Exponents and weights of the tracked functionals.

    gamma is derived (from alpha, d1, d2), never set directly;
    validate_functional_params fills it in.
    """

    alpha: float = 2.0
    beta: float = 1.0
    b: int = 2
    a: float = 1.0
    gamma: float | None = None


def default_functional_params(params: ModelParams) -> FunctionalParams:
    """Defaults: beta=1, b=2, a at 1.05x the Sylvester threshold, and alpha
    at least 2 but always 5 percent above its admissible floor b2*beta/b1."""
    beta = 1.0
    alpha = max(2.0, 1.05 * params.b2 * beta / params.b1)
    fp = FunctionalParams(alpha=alpha, beta=beta, b=2,
                          a=1.05 * sylvester_threshold(params.d1, params.d2))
    fp, violations = validate_functional_params(fp, params)
    assert not violations, violations
    return fp


def validate_functional_params(fp: FunctionalParams,
                               params: ModelParams) -> tuple[FunctionalParams, list[str]]:
    """Recompute gamma and check the admissibility window.

    Returns the parameter set with gamma filled in, plus a list of violated
    constraints (empty when admissible).  Each violation names the key and
    the constraint so configuration errors can cite them verbatim.
    """
    gamma = compute_gamma(fp.alpha, params.d1, params.d2)
    checked = replace(fp, gamma=gamma)
    violations = []
    thr = sylvester_threshold(params.d1, params.d2)
    if not fp.a > thr:
        violations.append(
            f"a={fp.a} violates a > max(1, (d1+d2)/(2*sqrt(d1*d2))) = {thr}")
    if not (1.0 <= fp.beta < min(2.0, gamma)):
        violations.append(
            f"beta={fp.beta} violates 1 <= beta < min(2, gamma) with gamma = {gamma}")
    if not fp.alpha > params.b2 * fp.beta / params.b1:
        violations.append(
            f"alpha={fp.alpha} violates alpha > b2*beta/b1 = {params.b2 * fp.beta / params.b1}")
    if not (isinstance(fp.b, int) and fp.b >= 2):
        violations.append(f"b={fp.b} violates integer b >= 2")
    return checked, violations


def y_functional(u: Field, v: Field, fp: FunctionalParams) -> float:
    """Integral of u**alpha / v**beta over the domain."""
    if np.any(v.values <= 0.0):
        raise PositivityError("y functional needs strictly positive v")
    vals = u.values ** fp.alpha / v.values ** fp.beta
    return float(vals.sum()) * u.grid.cell_weight


def lb_functional(u: Field, v: Field, b: int, a: float) -> float:
    """Integral of sum_k C(b, k) a**(k^2) u**k v**(b-k).

    Binomial coefficients are exact integers; b above 60 is rejected
    rather than risking silent overflow in the a**(k^2) weights.
    """
    if not (isinstance(b, (int, np.integer)) and b >= 2):
        raise ValueError(f"b must be an integer >= 2, got {b}")
    if b > 60:
        raise ValueError(f"b must be <= 60, got {b}")
    uu = u.values
    vv = v.values
    total = np.zeros_like(uu)
    for k in range(b + 1):
        coeff = math.comb(b, k) * a ** (k * k)
        total += coeff * uu ** k * vv ** (b - k)
    return float(total.sum()) * u.grid.cell_weight


def yj_functional(kernel: DiscreteKernel, z: Field) -> float:
    """Kernel-weighted squared increments sum_{x,y} w(x,y) (z(x) - z(y))^2.

    Nonnegative, and zero exactly when z is constant on every
    kernel-connected component of the grid.
    """
    ny, nx = z.grid.shape2d
    zz = z.as_2d()
    total = 0.0
    for (dix, diy), w in zip(kernel.offsets, kernel.weights):
        win = shift_windows(nx, ny, dix, diy)
        if win is None:
            continue
        dst_y, dst_x, src_y, src_x = win
        dz = zz[src_y, src_x] - zz[dst_y, dst_x]
        total += w * float((dz * dz).sum())
    return total * z.grid.cell_weight


@dataclass(frozen=True)
class DiagnosticsConfig:
    """What to record: functional parameters plus the set of norm orders."""

    functional: FunctionalParams
    lb_set: tuple[int, ...] = (2, 4)


def default_diagnostics(params: ModelParams) -> DiagnosticsConfig:
    return DiagnosticsConfig(functional=default_functional_params(params))


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sampled instant of a trajectory."""

    t: float
    min_u: float
    max_u: float
    min_v: float
    max_v: float
    lb_norms: dict[int, tuple[float, float]]
    y: float
    lb: float
    yj_u: float
    yj_v: float


def record_diagnostics(t: float, u: Field, v: Field, dcfg: DiagnosticsConfig,
                       kernel: DiscreteKernel | None = None) -> DiagnosticsRecord:
    """Sample every tracked quantity at one instant.

    The pairwise increment functionals are 0.0 for kernel-free (local) runs.
    """
    fp = dcfg.functional
    norms = {int(b): (lb_norm(u, b), lb_norm(v, b)) for b in dcfg.lb_set}
    if kernel is not None:
        yj_u = yj_functional(kernel, u)
        yj_v = yj_functional(kernel, v)
    else:
        yj_u = yj_v = 0.0
    return DiagnosticsRecord(
        t=float(t),
        min_u=float(u.values.min()), max_u=float(u.values.max()),
        min_v=float(v.values.min()), max_v=float(v.values.max()),
        lb_norms=norms,
        y=y_functional(u, v, fp),
        lb=lb_functional(u, v, fp.b, fp.a),
        yj_u=yj_u, yj_v=yj_v,
    )


class DiagnosticsSeries:
    """Ordered list of records with array-style column access."""

    def __init__(self, records: list[DiagnosticsRecord] | None = None):
        self.records = list(records) if records else []

    def append(self, rec: DiagnosticsRecord):
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        """Scalar column by name; norm columns use 'l<b>_u' / 'l<b>_v'."""
        if name.startswith("l") and ("_u" in name or "_v" in name) and name[1].isdigit():
            order = int(name[1:name.index("_")])
            idx = 0 if name.endswith("_u") else 1
            return np.array([r.lb_norms[order][idx] for r in self.records])
        return np.array([getattr(r, name) for r in self.records])
