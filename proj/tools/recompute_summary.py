#!/usr/bin/env python3
"""Recompute summary.csv from results.csv and compare.

Usage: recompute_summary.py results.csv summary.csv

Each run contributes one (avg_accuracy, forgetting_rate) pair, read from its
rows of results.csv.  Means and sample standard deviations per mode are
rounded to 6 decimals and must match summary.csv within 1e-12.
"""

import csv
import statistics
import sys


def load_runs(path):
    runs = {}
    order = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            mode = row["mode"]
            if mode not in runs:
                runs[mode] = {}
                order.append(mode)
            runs[mode][row["seed"]] = (float(row["avg_accuracy"]), float(row["forgetting_rate"]))
    return order, runs


def stats(values):
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return round(mean, 6), round(sd, 6)


def main():
    if len(sys.argv) != 3:
        print(__doc__.strip().splitlines()[2], file=sys.stderr)
        return 2
    order, runs = load_runs(sys.argv[1])
    with open(sys.argv[2], newline="") as fh:
        summary = {row["mode"]: row for row in csv.DictReader(fh)}

    ok = set(summary) == set(order)
    if not ok:
        print(f"mode sets differ: {sorted(summary)} vs {sorted(order)}")
    for mode in order:
        per_seed = list(runs[mode].values())
        expected = stats([a for a, _ in per_seed]) + stats([f for _, f in per_seed])
        row = summary.get(mode)
        if row is None:
            continue
        got = (float(row["mean_avg_acc"]), float(row["std_avg_acc"]),
               float(row["mean_forgetting"]), float(row["std_forgetting"]))
        worst = max(abs(e - g) for e, g in zip(expected, got))
        n_ok = int(row["n_seeds"]) == len(per_seed)
        status = "ok" if worst <= 1e-12 and n_ok else "MISMATCH"
        print(f"{mode}: max diff {worst:.3e}, n_seeds {row['n_seeds']} ({status})")
        ok = ok and status == "ok"
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
