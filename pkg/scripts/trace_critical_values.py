"""Regenerate the frozen Johansen trace critical values.

Usage: python scripts/trace_critical_values.py [--reps 100000] [--seed 20240101]
Paste the printed dictionary into ``TRACE_CRITICAL_VALUES`` in
``src/pegrisk/johansen.py``.
"""

import argparse

from pegrisk.johansen import simulate_trace_critical_values


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=100_000)
    parser.add_argument("--nobs", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20240101)
    args = parser.parse_args()
    print("TRACE_CRITICAL_VALUES = {")
    for k in (1, 2):
        cv = simulate_trace_critical_values(k, nobs=args.nobs, reps=args.reps, seed=args.seed + k)
        print(f"    {k}: {{" + ", ".join(f"{s}: {v:.3f}" for s, v in cv.items()) + "},")
    print("}")


if __name__ == "__main__":
    main()
