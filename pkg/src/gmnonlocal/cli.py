"""Command line interface.

Exit codes: 0 on success, 1 for configuration or argument problems, 2 when
a run aborts (positivity loss, blow-up, a failed solve).  Progress goes to
standard error as ``key=value`` lines; results go to standard out.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import VERSION, parse_config_file
from .core import (BlowupError, ConfigError, EquilibriumError,
                   GridMismatchError, KernelError, ModelParams,
                   PositivityError, make_grid)
from .experiments import (format_diffusive_limit_table, format_sweep_table,
                          run_diffusive_limit, run_from_config,
                          run_kernel_sweep)
from .io import read_snapshot, render_heatmap
from .reaction import turing_check


def _progress_sink(stream):
    def emit(rec):
        stream.write(f"progress t={rec.t:.6g} min_u={rec.min_u:.6g} "
                     f"max_u={rec.max_u:.6g} min_v={rec.min_v:.6g} "
                     f"max_v={rec.max_v:.6g}\n")
        stream.flush()
    return emit


def _float_list(text: str) -> list[float]:
    values = [float(tok) for tok in text.split(",") if tok.strip()]
    if not values:
        raise ValueError(f"expected a comma-separated list, got {text!r}")
    return values


def _int_list(text: str) -> list[int]:
    values = [int(tok) for tok in text.split(",") if tok.strip()]
    if not values:
        raise ValueError(f"expected a comma-separated list, got {text!r}")
    return values


def _cmd_simulate(args) -> int:
    cfg = parse_config_file(args.config)
    if args.output:
        cfg = replace(cfg, outputs=replace(cfg.outputs, dir=args.output,
                                           enabled=True))
    progress = None if args.quiet else _progress_sink(sys.stderr)
    result = run_from_config(cfg, progress=progress)
    state = result.state
    print(f"finished t={state.t:g} steps={state.step} "
          f"max_u={float(state.u.values.max()):.6g} "
          f"max_v={float(state.v.values.max()):.6g}")
    if cfg.outputs.enabled:
        print(f"artifacts written to {cfg.outputs.dir}")
    return 0


def _cmd_turing_check(args) -> int:
    params = ModelParams.gm_reduction(b=args.b, d1=args.d1, d2=args.d2)
    overrides = {name: getattr(args, name) for name in
                 ("p", "q", "r", "s", "b2", "sigma1", "sigma2")
                 if getattr(args, name) is not None}
    if overrides:
        params = replace(params, **overrides)
    report = turing_check(params)
    print(report.format_machine() if args.machine else report.format_text())
    return 0


def _cmd_diffusive_limit(args) -> int:
    if args.dim == 1:
        cells = args.cells or 256
        grid = make_grid(cells, 1, 1.0, 1.0)
    else:
        cells = args.cells or 48
        grid = make_grid(cells, cells, 1.0, 1.0)
    params = ModelParams.gm_reduction(b=args.b, d1=args.d1, d2=args.d2)
    report = run_diffusive_limit(j_values=args.j, t_end=args.t_end,
                                 params=params, grid=grid,
                                 self_comparison=args.self_test)
    print(format_diffusive_limit_table(report))
    if len(report.failures) == len(report.j_values):
        print("no kernel in the family could be resolved on this grid",
              file=sys.stderr)
        return 2
    if args.self_test and any(err != 0.0 for err in report.l2_errors):
        print("self comparison produced a nonzero error", file=sys.stderr)
        return 2
    return 0


def _cmd_sweep(args) -> int:
    progress = None if args.quiet else _progress_sink(sys.stderr)
    entries = run_kernel_sweep(args.sigmas, out_dir=args.output,
                               progress=progress, nx=args.size, ny=args.size,
                               extent=args.extent, t_end=args.t_end)
    print(format_sweep_table(entries))
    if all(e.metrics is None for e in entries):
        return 2
    return 0


def _cmd_render(args) -> int:
    field, t = read_snapshot(args.snapshot)
    render_heatmap(field, args.out, scale=args.scale, cmap=args.cmap, t=t)
    print(f"wrote {args.out} ({field.grid.nx}x{field.grid.ny}, t={t:g})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmnonlocal",
        description="Activator-inhibitor simulations with local and "
                    "nonlocal diffusion")
    parser.add_argument("--version", action="version",
                        version=f"gmnonlocal {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configured simulation")
    p.add_argument("--config", required=True, help="path to an INI run configuration")
    p.add_argument("--output", default=None, help="override the output directory")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("turing-check",
                       help="evaluate the instability conditions for a parameter set")
    p.add_argument("--b", type=float, default=0.5, help="activator decay rate")
    p.add_argument("--d1", type=float, default=0.3, help="activator diffusivity")
    p.add_argument("--d2", type=float, default=30.0, help="inhibitor diffusivity")
    for name in ("p", "q", "r", "s", "b2", "sigma1", "sigma2"):
        p.add_argument(f"--{name}", type=float, default=None,
                       help=f"override reaction parameter {name}")
    p.add_argument("--machine", action="store_true",
                   help="print key=value lines instead of a table")
    p.set_defaults(func=_cmd_turing_check)

    p = sub.add_parser("diffusive-limit",
                       help="compare rescaled kernels against their limit system")
    p.add_argument("--j", type=_int_list, default=[4, 8, 16],
                   help="comma-separated kernel indices")
    p.add_argument("--t-end", type=float, default=0.5)
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--cells", type=int, default=None,
                   help="cells per axis (default 256 in 1d, 48 in 2d)")
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--d1", type=float, default=0.3)
    p.add_argument("--d2", type=float, default=30.0)
    p.add_argument("--self-test", action="store_true",
                   help="compare the limit run against itself (errors must be 0)")
    p.set_defaults(func=_cmd_diffusive_limit)

    p = sub.add_parser("sweep", help="pattern runs across kernel widths")
    p.add_argument("--sigmas", type=_float_list, required=True,
                   help="comma-separated kernel widths")
    p.add_argument("--size", type=int, default=100, help="cells per axis")
    p.add_argument("--extent", type=float, default=100.0, help="domain edge length")
    p.add_argument("--t-end", type=float, default=200.0)
    p.add_argument("--output", default=None, help="write per-width artifacts here")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("render", help="render a stored snapshot as a PNG")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--cmap", default="viridis")
    p.set_defaults(func=_cmd_render)
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ConfigError, KernelError, GridMismatchError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (PositivityError, BlowupError, EquilibriumError) as err:
        print(f"aborted: {err}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
