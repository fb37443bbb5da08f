#!/usr/bin/env python3
"""Plot a wpan-perf sweep CSV: delay, failure probability, reliability and
throughput against offered load, one line per (mode, N).

    wpan-perf --out sweep.csv
    python3 docs/plot_sweep.py sweep.csv -o sweep.png
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PANELS = [
    ("delay_s", "mean delay (s)"),
    ("p_fail", "failure probability"),
    ("reliability", "reliability"),
    ("throughput_bps", "throughput (bit/s)"),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", default="sweep.png")
    args = ap.parse_args()

    series = defaultdict(lambda: defaultdict(list))
    with open(args.csv, newline="") as f:
        for row in csv.DictReader(f):
            key = (row["mode"], int(row["n_nodes"]))
            series[key]["lambda"].append(float(row["lambda_fps"]))
            for col, _ in PANELS:
                series[key][col].append(float(row[col]))

    fig, axes = plt.subplots(2, 2, figsize=(11, 8), sharex=True)
    for ax, (col, label) in zip(axes.flat, PANELS):
        for (mode, n), data in sorted(series.items()):
            ax.plot(data["lambda"], data[col], label=f"{mode}, N={n}",
                    linestyle="-" if mode == "phy_mac" else "--")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel("offered load (frames/s)")
    axes[0][0].set_yscale("log")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
