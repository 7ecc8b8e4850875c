"""Activator-inhibitor dynamics under local and nonlocal diffusion.

The package simulates a two-species reaction system on a rectangular grid
where spatial coupling is either the standard five-point Laplacian with
zero-flux boundaries or a symmetric nonnegative convolution kernel acting
through differences.  It ships the solvers, spectral and positivity
diagnostics, linear instability checks, a diffusive-limit convergence
driver and a command line front end.
"""

from .config import (OUTPUT_DIR_ENV, VERSION, OutputConfig, RunConfig,
                     parse_config, parse_config_file, render_config)
from .core import (BlowupError, ConfigError, EquilibriumError, Field, Grid,
                   GridMismatchError, InitialCondition, KernelError,
                   ModelParams, PositivityError, init_fields, make_grid)
from .diagnostics import (DiagnosticsConfig, DiagnosticsRecord,
                          DiagnosticsSeries, FunctionalParams, compute_gamma,
                          default_diagnostics, default_functional_params,
                          lb_functional, lb_norm, record_diagnostics,
                          sylvester_threshold, validate_functional_params,
                          y_functional, yj_functional)
from .experiments import (DiffusiveLimitReport, PatternExperimentResult,
                          PatternMetrics, SweepEntry, build_pattern_config,
                          compute_pattern_metrics, format_diffusive_limit_table,
                          format_sweep_table, run_diffusive_limit,
                          run_from_config, run_kernel_sweep,
                          run_pattern_experiment, write_run_artifacts)
from .io import (CsvSink, read_diagnostics_csv, read_snapshot,
                 render_heatmap, write_snapshot)
from .kernels import (DiscreteKernel, KernelSpec, bump_psi, density,
                      discretize_kernel, gaussian_kernel,
                      radial_second_moment, rescaled_bump_kernel,
                      second_moment_M)
from .operators import (apply_laplacian_neumann, apply_nonlocal,
                        apply_nonlocal_fast, bilinear_identity_residual)
from .reaction import (TuringReport, eval_f, eval_g, jacobian_at,
                       ode_equilibrium, turing_check)
from .stepper import (RunResult, SimState, StepperConfig, run,
                      stability_hint, step_once)

__version__ = VERSION
