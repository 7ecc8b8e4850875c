"""Reaction terms, steady states and the diffusion-driven instability test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EquilibriumError, ModelParams, PositivityError

V_FLOOR_DEFAULT = 1e-12


def _pow(base, expo: float):
    # Integer exponents take the exact repeated-multiplication path, which
    # also settles 0**0 = 1 for the source-only regimes.
    if float(expo).is_integer():
        return np.power(base, int(expo))
    return np.power(base, expo)


def eval_f(u, v, params: ModelParams, v_floor: float = V_FLOOR_DEFAULT):
    """Activator reaction u**p / v**r - b1*u + sigma1 (elementwise)."""
    if params.r > 0 and np.any(np.asarray(v) <= v_floor):
        raise PositivityError(f"v at or below floor {v_floor}: activator term is singular")
    return _pow(u, params.p) / _pow(v, params.r) - params.b1 * np.asarray(u) + params.sigma1


def eval_g(u, v, params: ModelParams, v_floor: float = V_FLOOR_DEFAULT):
    """Inhibitor reaction u**q / v**s - b2*v + sigma2 (elementwise)."""
    if params.s > 0 and np.any(np.asarray(v) <= v_floor):
        raise PositivityError(f"v at or below floor {v_floor}: inhibitor term is singular")
    return _pow(u, params.q) / _pow(v, params.s) - params.b2 * np.asarray(v) + params.sigma2


def jacobian_at(u: float, v: float, params: ModelParams) -> np.ndarray:
    """Analytic reaction Jacobian [[f_u, f_v], [g_u, g_v]] at (u, v)."""
    p, q, r, s = params.p, params.q, params.r, params.s
    fu = p * _pow(u, p - 1.0) / _pow(v, r) - params.b1
    fv = -r * _pow(u, p) / _pow(v, r + 1.0)
    gu = q * _pow(u, q - 1.0) / _pow(v, s)
    gv = -s * _pow(u, q) / _pow(v, s + 1.0) - params.b2
    return np.array([[fu, fv], [gu, gv]], dtype=np.float64)


def ode_equilibrium(params: ModelParams, start: tuple[float, float] = (1.0, 1.0),
                    tol: float = 1e-12, max_iter: int = 100,
                    method: str = "auto") -> tuple[float, float]:
    """Positive spatially homogeneous steady state of the reaction ODEs.

    The classical reduction has the closed form (1/b1, 1/b1**2); other
    parameter sets fall back to damped Newton iteration from ``start``.
    Raises EquilibriumError when no strictly positive root is found.
    """
    if method not in ("auto", "closed", "newton"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed" or (method == "auto" and params.is_gm_reduction):
        if not params.is_gm_reduction:
            raise EquilibriumError("closed form only exists for the classical reduction")
        return 1.0 / params.b1, 1.0 / params.b1 ** 2

    u, v = float(start[0]), float(start[1])
    if u <= 0 or v <= 0:
        raise ValueError(f"start must be positive, got {start}")
    for _ in range(max_iter):
        res = np.array([eval_f(u, v, params), eval_g(u, v, params)])
        if np.max(np.abs(res)) <= tol:
            if u <= tol or v <= tol:
                raise EquilibriumError("iteration converged to a nonpositive state")
            return u, v
        jac = jacobian_at(u, v, params)
        try:
            delta = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            raise EquilibriumError("singular Jacobian during equilibrium search")
        # Halve the step until the iterate stays in the positive quadrant.
        scale = 1.0
        while scale > 1e-12 and (u + scale * delta[0] <= 0 or v + scale * delta[1] <= 0):
            scale *= 0.5
        if scale <= 1e-12:
            raise EquilibriumError("equilibrium search left the positive quadrant")
        u += scale * delta[0]
        v += scale * delta[1]
    raise EquilibriumError(f"no positive equilibrium after {max_iter} iterations")


@dataclass(frozen=True)
class TuringReport:
    """Outcome of the diffusion-driven instability conditions.

    conditions[i] is True exactly when margins[i] > 0:
      0: stable well-mixed state,        -(f_u + g_v) > 0
      1: positive reaction determinant,   f_u g_v - f_v g_u > 0
      2: cross-diffusion term positive,   d2 f_u + d1 g_v > 0
      3: band of unstable wavenumbers,    d2 f_u + d1 g_v - 2 sqrt(d1 d2 det) > 0
    """

    equilibrium: tuple[float, float]
    jacobian: np.ndarray
    conditions: tuple[bool, bool, bool, bool]
    margins: tuple[float, float, float, float]

    @property
    def all_satisfied(self) -> bool:
        return all(self.conditions)

    def format_text(self) -> str:
        (u, v) = self.equilibrium
        labels = [
            "stability of the well-mixed state",
            "positive reaction determinant",
            "cross-diffusion term positive",
            "unstable wavenumber band opens",
        ]
        lines = [f"equilibrium: u = {u:.10g}, v = {v:.10g}"]
        j = self.jacobian
        lines.append(f"jacobian:    [[{j[0, 0]:.10g}, {j[0, 1]:.10g}], "
                     f"[{j[1, 0]:.10g}, {j[1, 1]:.10g}]]")
        for label, ok, margin in zip(labels, self.conditions, self.margins):
            lines.append(f"  {label:38s} {'satisfied' if ok else 'violated':9s} margin = {margin:.10g}")
        verdict = "expected" if self.all_satisfied else "not expected"
        lines.append(f"pattern formation {verdict} for these parameters")
        return "\n".join(lines)

    def format_machine(self) -> str:
        u, v = self.equilibrium
        parts = [f"equilibrium_u={u!r}", f"equilibrium_v={v!r}"]
        for i, (ok, margin) in enumerate(zip(self.conditions, self.margins), start=1):
            parts.append(f"cond{i}={str(ok).lower()}")
            parts.append(f"margin{i}={margin!r}")
        parts.append(f"all_satisfied={str(self.all_satisfied).lower()}")
        return "\n".join(parts)


def turing_check(params: ModelParams,
                 equilibrium: tuple[float, float] | None = None) -> TuringReport:
    """Evaluate the four instability conditions at the positive steady state."""
    eq = ode_equilibrium(params) if equilibrium is None else equilibrium
    jac = jacobian_at(eq[0], eq[1], params)
    fu, fv = jac[0]
    gu, gv = jac[1]
    det = fu * gv - fv * gu

    m1 = -(fu + gv)
    m2 = det
    m3 = params.d2 * fu + params.d1 * gv
    if det > 0:
        m4 = m3 - 2.0 * np.sqrt(params.d1 * params.d2 * det)
    else:
        m4 = -np.inf
    margins = (float(m1), float(m2), float(m3), float(m4))
    conditions = tuple(m > 0 for m in margins)
    return TuringReport(equilibrium=(float(eq[0]), float(eq[1])), jacobian=jac,
                        conditions=conditions, margins=margins)
