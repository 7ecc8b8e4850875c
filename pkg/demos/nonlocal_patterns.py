"""Spot formation when diffusion is a convolution operator.

Same reaction, same grid and horizon as demos/local_patterns.py, but the
spatial coupling is the integral operator built from a gaussian
interaction kernel: each cell exchanges mass with every neighbor inside
the truncation radius, weighted by the kernel.  Narrow kernels act like
the Laplacian; at sigma = 0.6 on this grid the pattern survives with a
finer characteristic wavelength.

Run:  python3 demos/nonlocal_patterns.py [--sigma 0.6] [--quick]
"""

import argparse

from gmnonlocal import run_pattern_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sigma", type=float, default=0.6,
                    help="gaussian kernel width (default 0.6)")
    ap.add_argument("--quick", action="store_true",
                    help="48x48 grid to t=60 instead of the full reference run")
    args = ap.parse_args()

    overrides = {}
    if args.quick:
        overrides = {"nx": 48, "ny": 48, "extent": 48.0, "t_end": 60.0}
    out = f"runs/demo_nonlocal_sigma{args.sigma:g}"
    res = run_pattern_experiment("nonlocal", sigma=args.sigma, out_dir=out,
                                 **overrides)

    m = res.metrics
    state = res.run.state
    kernel = res.config.kernel
    print(f"kernel: gaussian, sigma = {kernel.sigma:g}, "
          f"truncated at radius {kernel.cutoff_radius:g}")
    print(f"finished t = {state.t:g} after {state.step} steps")
    print(f"activator range      [{state.u.values.min():.4f}, {state.u.values.max():.4f}]")
    print(f"spatial std          {m.spatial_std_u:.4f}")
    print(f"dominant wavelength  {m.dominant_wavelength:.2f}")
    print(f"spot count (proxy)   {m.spot_count_proxy}")
    print(f"artifacts in {out}/")


if __name__ == "__main__":
    main()
