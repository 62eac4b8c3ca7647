"""Recomputes mean and stderr of every summary row from the _raw companion file."""

import argparse
import math
import sys

import pandas as pd


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("summary", help="experiment summary CSV")
    ap.add_argument("--tol", type=float, default=1e-9, help="relative tolerance")
    args = ap.parse_args()

    raw_path = args.summary[:-4] + "_raw.csv" if args.summary.endswith(".csv") else args.summary + "_raw"
    summary = pd.read_csv(args.summary)
    raw = pd.read_csv(raw_path)
    ok = raw[raw.status == "ok"]

    bad = 0
    for row in summary.itertuples(index=False):
        if row.metric == "failures":
            group = raw[(raw.sweep_value == row.sweep_value) & (raw.solver == row.solver)]
            expected_mean = float((group.status != "ok").sum())
            expected_se = 0.0
            n = len(group)
        else:
            vals = ok[(ok.sweep_value == row.sweep_value) & (ok.solver == row.solver)][row.metric]
            n = len(vals)
            expected_mean = vals.mean() if n else math.nan
            expected_se = vals.std(ddof=1) / math.sqrt(n) if n > 1 else (0.0 if n else math.nan)
        checks = [(row.mean, expected_mean), (row.stderr, expected_se)]
        for got, want in checks:
            if math.isnan(want):
                good = math.isnan(got)
            else:
                good = abs(got - want) <= args.tol * max(1.0, abs(want))
            if not good:
                bad += 1
                print(f"mismatch {row.sweep_value} {row.solver} {row.metric}: {got} vs {want}")
        if row.n_realizations != n:
            bad += 1
            print(f"count mismatch {row.sweep_value} {row.solver} {row.metric}")

    print(f"{len(summary)} rows checked, {bad} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
