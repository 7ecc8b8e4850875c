"""Where patterns come from: the four linear instability conditions.

The spatially uniform steady state of the activator-inhibitor system can
be stable against well-mixed perturbations yet unstable once diffusion is
switched on, provided the inhibitor spreads much faster than the
activator.  This script evaluates the four conditions at two decay rates:
b1 = 0.5 passes all four, b1 = 2 already fails the first (the well-mixed
state itself is unstable), so no amount of diffusion contrast helps.

Run:  python3 demos/instability_conditions.py
"""

from gmnonlocal import ModelParams, turing_check


def main():
    for b in (0.5, 2.0):
        params = ModelParams.gm_reduction(b=b, d1=0.3, d2=30.0)
        print(f"--- activator decay b1 = {b} ---")
        print(turing_check(params).format_text())
        print()

    print("--- opening of the unstable band as d2 grows (b1 = 0.5) ---")
    print(f"{'d2':>8} {'band margin':>14} {'verdict':>10}")
    for d2 in (0.3, 1.0, 3.0, 10.0, 30.0, 100.0):
        report = turing_check(ModelParams.gm_reduction(b=0.5, d1=0.3, d2=d2))
        verdict = "patterns" if report.all_satisfied else "uniform"
        print(f"{d2:8.1f} {report.margins[3]:14.4f} {verdict:>10}")


if __name__ == "__main__":
    main()
