"""Tracking positivity, norms and the two a-priori functionals.

Integrates the nonlocal reference setup on a 64 x 64 grid to t = 20 and
samples the recorded diagnostics: field extrema, L2/L4 norms, the
weighted power-sum functional and the activator/inhibitor ratio
functional.  Two behaviors stand out:

* the recorded minima never touch zero, and the inhibitor minimum stays
  above its pure-decay floor exp(-b2 t) times the initial minimum;
* the activator norms are anything but tame during the transient: they
  overshoot their initial values by two to four orders of magnitude
  while the spots form, before settling.  The growth is driven by the
  reaction terms (the well-mixed state is linearly unstable), not by the
  interaction operator.

Run:  python3 demos/boundedness_functionals.py [--sigma 0.6]
"""

import argparse

import numpy as np

from gmnonlocal import (InitialCondition, ModelParams, StepperConfig,
                        discretize_kernel, gaussian_kernel, make_grid, run,
                        stability_hint)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sigma", type=float, default=0.6)
    ap.add_argument("--t-end", type=float, default=20.0)
    args = ap.parse_args()

    params = ModelParams.gm_reduction(b=0.5, d1=0.3, d2=30.0)
    grid = make_grid(64, 64, 100.0, 100.0)
    kernel = discretize_kernel(gaussian_kernel(args.sigma), grid)
    dt = stability_hint(params, grid, kernel=kernel, t_end=args.t_end)
    cfg = StepperConfig(dt=dt, t_end=args.t_end, operator_kind="nonlocal",
                        kernel=kernel)
    result = run(grid, params, InitialCondition(), cfg)

    series = result.series
    times = series.times
    idx = np.unique(np.linspace(0, len(times) - 1, 9).astype(int))
    print(f"{'t':>7} {'min_u':>9} {'min_v':>9} {'|u|_2':>10} {'|u|_4':>10} "
          f"{'y':>10} {'Lb':>12}")
    for i in idx:
        r = series.records[i]
        print(f"{r.t:7.2f} {r.min_u:9.5f} {r.min_v:9.5f} "
              f"{r.lb_norms[2][0]:10.3f} {r.lb_norms[4][0]:10.3f} "
              f"{r.y:10.3e} {r.lb:12.4e}")

    l2u = series.column("l2_u")
    print(f"\npeak |u|_2 over the run: {l2u.max():.1f} "
          f"({l2u.max() / l2u[0]:.0f}x the initial value)")
    floor = 0.95 * series.column("min_v")[0] * np.exp(-params.b2 * times)
    print(f"inhibitor decay-floor slack: {np.min(series.column('min_v') - floor):.2e}")


if __name__ == "__main__":
    main()
