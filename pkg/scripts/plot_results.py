#!/usr/bin/env python3
"""Render the CSV outputs of relay-training as PNG charts.

Usage:
    python3 scripts/plot_results.py results/rates.csv
    python3 scripts/plot_results.py results/rates_by_m.csv
    python3 scripts/plot_results.py results/ebn0.csv
    python3 scripts/plot_results.py results/profile.csv

Writes <input>.png next to the CSV. Plotting stays out of the library on
purpose; this script is the only matplotlib consumer.
"""

import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _series(rows, x_key, y_key):
    groups = defaultdict(list)
    for row in rows:
        if row.get("status", "ok") != "ok" and "status" in row:
            continue
        label = "/".join(
            row[k] for k in ("scheme", "protocol", "estimator") if k in row
        )
        groups[label].append((float(row[x_key]), float(row[y_key])))
    return {k: sorted(v) for k, v in groups.items()}


def main(argv):
    if len(argv) != 2:
        print(__doc__)
        return 2
    path = Path(argv[1])
    rows = _read(path)
    fig, ax = plt.subplots(figsize=(7.5, 5.0))
    name = path.name
    if name.startswith("profile"):
        slots = [int(r["slot"]) for r in rows]
        powers = [float(r["power"]) for r in rows]
        colors = ["tab:red" if r["role"] == "pilot" else "tab:blue" for r in rows]
        ax.bar(slots, powers, color=colors)
        ax.set_xlabel("slot")
        ax.set_ylabel("power")
        ax.set_title("per-slot power (red = pilot)")
    else:
        if name.startswith("rates_by_m"):
            x_key, y_key, x_label, y_label = "m", "rate_bits", "training period", "rate (bits/symbol)"
        elif name.startswith("rates"):
            x_key, y_key, x_label, y_label = "snr_db", "rate_bits", "SNR (dB)", "rate (bits/symbol)"
        elif name.startswith("ebn0"):
            x_key, y_key, x_label, y_label = "snr_db", "ebn0_db", "SNR (dB)", "Eb/N0 (dB)"
        else:
            print(f"unrecognized CSV name: {name}")
            return 2
        for label, points in sorted(_series(rows, x_key, y_key).items()):
            xs, ys = zip(*points)
            ax.plot(xs, ys, marker="o", markersize=3, label=label)
        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
        ax.legend(fontsize=7)
        ax.grid(True, alpha=0.3)
    out = path.with_suffix(".png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
