"""Forward Euler time integration with positivity and blow-up guards."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (BlowupError, Field, Grid, InitialCondition, ModelParams,
                   PositivityError, init_fields)
from .diagnostics import (DiagnosticsConfig, DiagnosticsRecord, DiagnosticsSeries,
                          default_diagnostics, record_diagnostics)
from .kernels import DiscreteKernel
from .operators import apply_laplacian_neumann, apply_nonlocal_fast
from .reaction import eval_f, eval_g


@dataclass(frozen=True)
class StepperConfig:
    """Explicit Euler settings.

    positivity_policy 'strict' aborts on a breach (the breach signals the
    time step is too large for the current state); 'clamp' pins offending
    cells to the floor and counts them, for exploratory runs only.
    """

    dt: float
    t_end: float
    operator_kind: str = "local"
    kernel: DiscreteKernel | None = None
    record_every: int = 1
    positivity_floor: float = 1e-12
    positivity_policy: str = "strict"
    fail_on_nonfinite: bool = True
    blowup_cap: float = 1e6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end must be >= dt, got t_end={self.t_end}, dt={self.dt}")
        if self.operator_kind not in ("local", "nonlocal"):
            raise ValueError(f"operator_kind must be 'local' or 'nonlocal', got {self.operator_kind!r}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.positivity_policy not in ("strict", "clamp"):
            raise ValueError(f"positivity_policy must be 'strict' or 'clamp', got {self.positivity_policy!r}")
        if self.positivity_floor <= 0:
            raise ValueError(f"positivity_floor must be positive, got {self.positivity_floor}")
        if self.blowup_cap <= 0:
            raise ValueError(f"blowup_cap must be positive, got {self.blowup_cap}")


@dataclass
class SimState:
    """Trajectory state after ``step`` Euler steps; t = step * dt."""

    t: float
    step: int
    u: Field
    v: Field
    clamped: int = 0


@dataclass
class RunResult:
    state: SimState
    series: DiagnosticsSeries


def _diffusion(cfg: StepperConfig, z: Field) -> Field:
    if cfg.operator_kind == "local":
        return apply_laplacian_neumann(z)
    if cfg.kernel is None:
        raise ValueError("nonlocal stepping needs a discretized kernel")
    return apply_nonlocal_fast(cfg.kernel, z)


def _guard(arr: np.ndarray, label: str, step: int, cfg: StepperConfig) -> tuple[np.ndarray, int]:
    if cfg.fail_on_nonfinite and not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise BlowupError(f"{label} non-finite after step {step} at flat cell {bad}")
    clamped = 0
    low = arr < cfg.positivity_floor
    if np.any(low):
        if cfg.positivity_policy == "strict":
            bad = int(np.flatnonzero(low)[0])
            raise PositivityError(
                f"{label} fell below the positivity floor after step {step} "
                f"at flat cell {bad}; reduce dt"
            )
        clamped = int(low.sum())
        arr = np.maximum(arr, cfg.positivity_floor)
    return arr, clamped


def step_once(state: SimState, params: ModelParams, cfg: StepperConfig) -> SimState:
    """One forward Euler step; returns a new state, inputs untouched."""
    u, v = state.u, state.v
    du = _diffusion(cfg, u).values
    dv = _diffusion(cfg, v).values
    fu = eval_f(u.values, v.values, params, v_floor=cfg.positivity_floor)
    gv = eval_g(u.values, v.values, params, v_floor=cfg.positivity_floor)
    new_u = u.values + cfg.dt * (params.d1 * du + fu)
    new_v = v.values + cfg.dt * (params.d2 * dv + gv)

    step = state.step + 1
    new_u, c1 = _guard(new_u, "u", step, cfg)
    new_v, c2 = _guard(new_v, "v", step, cfg)
    # t computed from the step count, not accumulated, to avoid drift.
    return SimState(t=step * cfg.dt, step=step,
                    u=Field(u.grid, new_u), v=Field(v.grid, new_v),
                    clamped=state.clamped + c1 + c2)


def _check_cap(state: SimState, cap: float):
    amax = max(abs(state.u.values.max()), abs(state.u.values.min()),
               abs(state.v.values.max()), abs(state.v.values.min()))
    if amax > cap:
        raise BlowupError(
            f"blow-up cap {cap:g} exceeded at step {state.step} (max |field| = {amax:g}); "
            "the time step likely violates the stability bound"
        )


def run(grid: Grid, params: ModelParams, ic: InitialCondition, cfg: StepperConfig,
        diag: DiagnosticsConfig | None = None,
        sinks: Sequence[Callable[[DiagnosticsRecord], None]] = ()) -> RunResult:
    """Integrate from the sampled initial condition to t_end.

    Diagnostics are recorded at step 0, every ``record_every`` steps and at
    the final step, and forwarded to every sink as they are produced.
    Identical inputs reproduce identical trajectories bit for bit.
    """
    if diag is None:
        diag = default_diagnostics(params)
    if cfg.operator_kind == "nonlocal" and cfg.kernel is None:
        raise ValueError("nonlocal run needs a discretized kernel in the stepper config")

    u0, v0 = init_fields(grid, ic)
    state = SimState(t=0.0, step=0, u=u0, v=v0)
    n_steps = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    series = DiagnosticsSeries()

    def emit(st: SimState):
        rec = record_diagnostics(st.t, st.u, st.v, diag, kernel=cfg.kernel)
        series.append(rec)
        for sink in sinks:
            sink(rec)

    emit(state)
    for k in range(n_steps):
        state = step_once(state, params, cfg)
        _check_cap(state, cfg.blowup_cap)
        if state.step % cfg.record_every == 0 or k == n_steps - 1:
            emit(state)
    return RunResult(state=state, series=series)


def stability_hint(params: ModelParams, grid: Grid,
                   kernel: DiscreteKernel | None = None,
                   t_end: float | None = None) -> float:
    """Safe explicit time step for the diffusion part.

    Local: 0.9 / (2 dmax (1/hx^2 + 1/hy^2)), the 5-point bound, which on a
    square 2-D grid is 0.9 h^2 / (4 dmax).  Nonlocal: 0.9 / (2 dmax lambda)
    from the operator bound |Gamma z| <= 2 lambda max|z|.  A vanishing
    kernel mass would suggest an unbounded step, so the result is capped at
    t_end when given.  The reaction terms are not accounted for; the
    positivity guard catches a step that is too large for them.
    """
    dmax = max(params.d1, params.d2)
    if kernel is None:
        inv = 1.0 / grid.hx ** 2
        if grid.dimension == 2:
            inv += 1.0 / grid.hy ** 2
        dt = 0.9 / (2.0 * dmax * inv)
    else:
        if kernel.mass_lambda > 0:
            dt = 0.9 / (2.0 * dmax * kernel.mass_lambda)
        else:
            dt = math.inf
    if t_end is not None:
        dt = min(dt, t_end)
    return dt
