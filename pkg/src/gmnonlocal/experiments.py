"""High-level drivers: pattern runs, kernel sweeps, the diffusive limit.

Every driver is deterministic under a fixed seed and, when given an output
directory, writes a manifest (the fully resolved configuration) from which
the run can be reproduced bit for bit.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .config import OutputConfig, RunConfig, render_config
from .core import (Field, Grid, InitialCondition, KernelError, ModelParams,
                   make_grid)
from .diagnostics import DiagnosticsConfig, default_diagnostics
from .io import CsvSink, render_heatmap, write_snapshot
from .kernels import (DiscreteKernel, KernelSpec, discretize_kernel,
                      gaussian_kernel, rescaled_bump_kernel, second_moment_M)
from .reaction import turing_check
from .stepper import (RunResult, SimState, StepperConfig, run, stability_hint,
                      step_once)


@dataclass(frozen=True)
class PatternMetrics:
    """Scalar summaries of a pattern snapshot.

    dominant_wavelength comes from the radially averaged power spectrum of
    the mean-removed activator and falls in (2h, domain size] whenever the
    field is not constant; for a constant field it degenerates to the
    domain size.  spot_count_proxy counts 4-connected components above
    mean + 1 std.
    """

    spatial_std_u: float
    dominant_wavelength: float
    spot_count_proxy: int


def compute_pattern_metrics(u: Field) -> PatternMetrics:
    grid = u.grid
    vals = u.as_2d()
    std = float(vals.std())
    mean = float(vals.mean())

    work = vals - mean
    if grid.dimension == 1:
        spec = np.abs(np.fft.rfft(work[0])) ** 2
        freqs = np.fft.rfftfreq(grid.nx, d=grid.hx)
        spec[0] = 0.0
        if spec.max() <= 0.0:
            wavelength = grid.lx
        else:
            wavelength = 1.0 / freqs[int(np.argmax(spec))]
    else:
        power = np.abs(np.fft.fft2(work)) ** 2
        fx = np.fft.fftfreq(grid.nx, d=grid.hx)
        fy = np.fft.fftfreq(grid.ny, d=grid.hy)
        fmag = np.hypot(*np.meshgrid(fx, fy))
        df = 1.0 / max(grid.lx, grid.ly)
        bins = np.rint(fmag / df).astype(int)
        sums = np.bincount(bins.ravel(), weights=power.ravel())
        counts = np.bincount(bins.ravel())
        radial = sums / np.maximum(counts, 1)
        radial[0] = 0.0
        if radial.max() <= 0.0:
            wavelength = max(grid.lx, grid.ly)
        else:
            wavelength = 1.0 / (int(np.argmax(radial)) * df)

    mask = vals > mean + std
    if mask.any():
        _, n_spots = ndimage.label(mask)
    else:
        n_spots = 0
    return PatternMetrics(spatial_std_u=std, dominant_wavelength=float(wavelength),
                          spot_count_proxy=int(n_spots))


@dataclass
class PatternExperimentResult:
    metrics: PatternMetrics
    run: RunResult
    config: RunConfig
    out_dir: str | None


def _resolve_out_dir(out_dir: str | None) -> str | None:
    if out_dir is None:
        return None
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def write_run_artifacts(cfg: RunConfig, result: RunResult, out_dir: str):
    """Write manifest, snapshots and heatmaps for a finished run."""
    with open(os.path.join(out_dir, "manifest.cfg"), "w") as fh:
        fh.write(render_config(cfg))
    state = result.state
    if cfg.outputs.snapshots:
        write_snapshot(state.u, state.t, os.path.join(out_dir, "u_final.gmf"))
        write_snapshot(state.v, state.t, os.path.join(out_dir, "v_final.gmf"))
    if cfg.outputs.heatmaps:
        render_heatmap(state.u, os.path.join(out_dir, "u_final.png"), t=state.t)
        render_heatmap(state.v, os.path.join(out_dir, "v_final.png"), t=state.t)


def run_from_config(cfg: RunConfig, out_dir: str | None = None,
                    progress=None) -> RunResult:
    """Execute one configured run, writing artifacts when a directory is set.

    ``progress`` is an optional per-record callable (the command line
    interface uses it to report to standard error).
    """
    out_dir = _resolve_out_dir(out_dir if out_dir is not None else
                               (cfg.outputs.dir if cfg.outputs.enabled else None))
    kernel = None
    stepper_cfg = cfg.stepper
    if cfg.stepper.operator_kind == "nonlocal":
        kernel = discretize_kernel(cfg.kernel, cfg.grid)
        stepper_cfg = replace(stepper_cfg, kernel=kernel)

    sinks = []
    csv_sink = None
    if out_dir and cfg.outputs.csv:
        csv_sink = CsvSink(os.path.join(out_dir, "diagnostics.csv"),
                           lb_set=cfg.diagnostics.lb_set)
        sinks.append(csv_sink)
    if progress is not None:
        sinks.append(progress)
    try:
        result = run(cfg.grid, cfg.model, cfg.ic, stepper_cfg,
                     diag=cfg.diagnostics, sinks=sinks)
    finally:
        if csv_sink is not None:
            csv_sink.close()
    if out_dir:
        write_run_artifacts(cfg, result, out_dir)
    return result


def build_pattern_config(kind: str = "local", sigma: float = 0.6, *,
                         nx: int = 100, ny: int = 100, extent: float = 100.0,
                         b: float = 0.5, d1: float = 0.3, d2: float = 30.0,
                         t_end: float = 200.0, dt: float | None = None,
                         base_u: float = 0.1, base_v: float = 0.1,
                         noise_amp: float = 0.01, rng_seed: int = 1729,
                         record_every: int | None = None,
                         out_dir: str | None = None) -> RunConfig:
    """Resolve the reference pattern-formation setup into a RunConfig."""
    if kind not in ("local", "nonlocal"):
        raise ValueError(f"kind must be 'local' or 'nonlocal', got {kind!r}")
    grid = make_grid(nx, ny, extent, extent if ny > 1 else 1.0)
    params = ModelParams.gm_reduction(b=b, d1=d1, d2=d2)
    ic = InitialCondition(base_u=base_u, base_v=base_v,
                          noise_amp=noise_amp, rng_seed=rng_seed)
    spec = gaussian_kernel(sigma) if kind == "nonlocal" else None
    if dt is None:
        kernel = discretize_kernel(spec, grid) if spec is not None else None
        dt = stability_hint(params, grid, kernel=kernel, t_end=max(t_end, 1e-30))
    if record_every is None:
        n_steps = max(1, math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 1
        record_every = max(1, n_steps // 200)
    stepper_cfg = StepperConfig(dt=dt, t_end=max(t_end, dt), operator_kind=kind,
                                record_every=record_every)
    return RunConfig(model=params, grid=grid, ic=ic, stepper=stepper_cfg,
                     kernel=spec, diagnostics=default_diagnostics(params),
                     outputs=OutputConfig(dir=out_dir or "gm_runs",
                                          enabled=out_dir is not None))


def run_pattern_experiment(kind: str = "local", sigma: float = 0.6,
                           out_dir: str | None = None,
                           progress=None, **overrides) -> PatternExperimentResult:
    """Run the reference pattern setup (or a scaled-down override of it).

    An unsatisfied instability check only warns: stable parameter sets are
    legitimate to simulate, they just will not pattern.  ``t_end=0`` skips
    stepping and reports the metrics of the initial condition.
    """
    t_end = overrides.get("t_end", 200.0)
    cfg = build_pattern_config(kind, sigma, out_dir=out_dir, **overrides)
    report = turing_check(cfg.model)
    if not report.all_satisfied:
        warnings.warn("parameters do not satisfy the instability conditions; "
                      "patterns are not expected", stacklevel=2)

    if t_end == 0:
        from .core import init_fields
        from .diagnostics import DiagnosticsSeries, record_diagnostics
        u0, v0 = init_fields(cfg.grid, cfg.ic)
        series = DiagnosticsSeries()
        series.append(record_diagnostics(0.0, u0, v0, cfg.diagnostics))
        result = RunResult(state=SimState(t=0.0, step=0, u=u0, v=v0), series=series)
        out = _resolve_out_dir(out_dir)
        if out:
            write_run_artifacts(cfg, result, out)
    else:
        result = run_from_config(cfg, out_dir=out_dir, progress=progress)
    metrics = compute_pattern_metrics(result.state.u)
    return PatternExperimentResult(metrics=metrics, run=result, config=cfg,
                                   out_dir=out_dir)


@dataclass
class SweepEntry:
    sigma: float
    metrics: PatternMetrics | None = None
    error: str | None = None


def run_kernel_sweep(sigmas, out_dir: str | None = None,
                     progress=None, **overrides) -> list[SweepEntry]:
    """Pattern runs across kernel widths; failures are recorded, not fatal."""
    entries = []
    for sigma in sigmas:
        sub_dir = os.path.join(out_dir, f"sigma_{sigma:g}") if out_dir else None
        try:
            res = run_pattern_experiment("nonlocal", sigma=sigma, out_dir=sub_dir,
                                         progress=progress, **overrides)
            entries.append(SweepEntry(sigma=float(sigma), metrics=res.metrics))
        except (KernelError, RuntimeError, ValueError) as err:
            entries.append(SweepEntry(sigma=float(sigma), error=f"{type(err).__name__}: {err}"))
    return entries


def format_sweep_table(entries: list[SweepEntry]) -> str:
    lines = [f"{'sigma':>8s} {'std(u)':>12s} {'wavelength':>12s} {'spots':>7s}  note"]
    for e in entries:
        if e.metrics is None:
            lines.append(f"{e.sigma:8g} {'-':>12s} {'-':>12s} {'-':>7s}  {e.error}")
        else:
            m = e.metrics
            lines.append(f"{e.sigma:8g} {m.spatial_std_u:12.5g} "
                         f"{m.dominant_wavelength:12.5g} {m.spot_count_proxy:7d}")
    return "\n".join(lines)


@dataclass
class DiffusiveLimitReport:
    """Convergence study of the rescaled kernels toward their limit system.

    l2_errors[i] is the space-time L2 distance between the run with kernel
    index j_values[i] and the limit run (midpoint in space, trapezoid in
    time over shared snapshot instants), NaN when that kernel could not be
    resolved (the failure message is kept in ``failures``).
    """

    j_values: tuple[int, ...]
    l2_errors: list[float]
    M: float
    limit_coefficients: tuple[float, float]
    dimension: int
    dt: float
    failures: dict[int, str]
    self_comparison: bool = False


def _smooth_initial_fields(grid: Grid) -> tuple[Field, Field]:
    # Cosine modes have zero normal derivative at the walls, matching the
    # zero-flux boundary of the limit system.
    x = grid.x_centers() / grid.lx
    u_row = 1.0 + 0.3 * np.cos(2.0 * np.pi * x)
    v_row = 1.0 + 0.3 * np.cos(np.pi * x)
    if grid.dimension == 1:
        u = u_row[None, :].copy()
        v = v_row[None, :].copy()
    else:
        y = grid.y_centers() / grid.ly
        u = 1.0 + 0.3 * np.outer(np.cos(2.0 * np.pi * y), np.cos(2.0 * np.pi * x))
        v = 1.0 + 0.3 * np.outer(np.cos(np.pi * y), np.cos(np.pi * x))
    return Field.from_2d(grid, u), Field.from_2d(grid, v)


def _solve_with_snapshots(grid: Grid, params: ModelParams, u0: Field, v0: Field,
                          cfg: StepperConfig, n_steps: int, record_every: int):
    state = SimState(t=0.0, step=0, u=u0.copy(), v=v0.copy())
    snaps = [(0.0, state.u.values.copy(), state.v.values.copy())]
    for k in range(n_steps):
        state = step_once(state, params, cfg)
        if state.step % record_every == 0 or k == n_steps - 1:
            snaps.append((state.t, state.u.values.copy(), state.v.values.copy()))
    return snaps


def _space_time_l2(snaps_a, snaps_b, cellw: float) -> float:
    times = [t for t, _, _ in snaps_a]
    total = 0.0
    for i, ((t, ua, va), (_, ub, vb)) in enumerate(zip(snaps_a, snaps_b)):
        sq = float(((ua - ub) ** 2).sum() + ((va - vb) ** 2).sum()) * cellw
        if len(times) == 1:
            w = 1.0
        elif i == 0:
            w = 0.5 * (times[1] - times[0])
        elif i == len(times) - 1:
            w = 0.5 * (times[-1] - times[-2])
        else:
            w = 0.5 * (times[i + 1] - times[i - 1])
        total += w * sq
    return math.sqrt(total)


def run_diffusive_limit(j_values=(4, 8, 16), t_end: float = 0.5,
                        params: ModelParams | None = None,
                        grid: Grid | None = None,
                        record_every: int | None = None,
                        self_comparison: bool = False) -> DiffusiveLimitReport:
    """Compare rescaled-kernel runs against the limit system they approach.

    All runs (every j and the limit) share one grid, one smooth positive
    initial condition and one time step, chosen from the most restrictive
    stability hint in the family.  With ``self_comparison`` the kernel runs
    are replaced by the limit run itself, so every error is exactly zero;
    this pins down the error pipeline.
    """
    if params is None:
        params = ModelParams.gm_reduction()
    if grid is None:
        grid = make_grid(256, 1, 1.0, 1.0)
    dim = grid.dimension
    j_values = tuple(int(j) for j in j_values)

    M = second_moment_M(rescaled_bump_kernel(max(j_values)), dim)
    limit_coeff = (M * params.d1 / (2.0 * dim), M * params.d2 / (2.0 * dim))
    limit_params = replace(params, d1=limit_coeff[0], d2=limit_coeff[1])

    kernels: dict[int, DiscreteKernel] = {}
    failures: dict[int, str] = {}
    for j in j_values:
        try:
            kernels[j] = discretize_kernel(rescaled_bump_kernel(j), grid)
        except KernelError as err:
            failures[j] = str(err)

    dt = stability_hint(limit_params, grid, t_end=t_end)
    for dk in kernels.values():
        dt = min(dt, stability_hint(params, grid, kernel=dk, t_end=t_end))
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    dt = t_end / n_steps
    if record_every is None:
        record_every = max(1, n_steps // 50)

    u0, v0 = _smooth_initial_fields(grid)
    limit_cfg = StepperConfig(dt=dt, t_end=t_end, operator_kind="local",
                              record_every=record_every)
    limit_snaps = _solve_with_snapshots(grid, limit_params, u0, v0, limit_cfg,
                                        n_steps, record_every)

    errors = []
    for j in j_values:
        if j in failures:
            errors.append(math.nan)
            continue
        if self_comparison:
            snaps = _solve_with_snapshots(grid, limit_params, u0, v0, limit_cfg,
                                          n_steps, record_every)
        else:
            cfg = StepperConfig(dt=dt, t_end=t_end, operator_kind="nonlocal",
                                kernel=kernels[j], record_every=record_every)
            snaps = _solve_with_snapshots(grid, params, u0, v0, cfg,
                                          n_steps, record_every)
        errors.append(_space_time_l2(snaps, limit_snaps, grid.cell_weight))

    return DiffusiveLimitReport(j_values=j_values, l2_errors=errors, M=M,
                                limit_coefficients=limit_coeff, dimension=dim,
                                dt=dt, failures=failures,
                                self_comparison=self_comparison)


def format_diffusive_limit_table(report: DiffusiveLimitReport) -> str:
    lines = [f"dimension {report.dimension}, dt = {report.dt:g}, "
             f"M = {report.M:.6f}, limit diffusivities = "
             f"({report.limit_coefficients[0]:g}, {report.limit_coefficients[1]:g})"]
    lines.append(f"{'j':>6s} {'L2 error':>14s}")
    for j, err in zip(report.j_values, report.l2_errors):
        if j in report.failures:
            lines.append(f"{j:6d} {'-':>14s}  {report.failures[j]}")
        else:
            lines.append(f"{j:6d} {err:14.6e}")
    return "\n".join(lines)
