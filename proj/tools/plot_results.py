#!/usr/bin/env python3
# Copyright 2026 The pvwm Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Render harness CSV output as figures.

  plot_results.py cache cache_hit_ratio.csv -o out/cache
  plot_results.py latency latency_*.csv -o out/latency

Each figure is written as <out>.svg and <out>.png.
"""

import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

TASKS = [
    "establish_session",
    "receive_data",
    "reconstruct_secret",
    "detect_watermark",
    "terminate_session",
]


def read_rows(paths):
    rows = []
    for p in paths:
        with open(p, newline="") as f:
            rows.extend(csv.DictReader(f))
    return rows


def save(fig, out):
    fig.tight_layout()
    for ext in ("svg", "png"):
        fig.savefig(f"{out}.{ext}", dpi=150)
    plt.close(fig)


def plot_cache(paths, out):
    series = defaultdict(list)
    for r in read_rows(paths):
        series[r["policy"]].append(
            (int(r["capacity"]), float(r["mean_hr"]), float(r["min_hr"]), float(r["max_hr"]))
        )
    fig, ax = plt.subplots(figsize=(6, 4))
    for policy, pts in sorted(series.items()):
        pts.sort()
        xs = [p[0] for p in pts]
        ax.plot(xs, [p[1] for p in pts], marker="o", label=policy)
        ax.fill_between(xs, [p[2] for p in pts], [p[3] for p in pts], alpha=0.15)
    ax.set_xlabel("cache capacity (entries)")
    ax.set_ylabel("hit ratio")
    ax.set_ylim(0, 1)
    ax.grid(alpha=0.3)
    ax.legend()
    save(fig, out)


def plot_latency(paths, out):
    bars = defaultdict(dict)
    for r in read_rows(paths):
        if r["task"] in TASKS:
            bars[f'{r["scheme"]}/{r["mode"]}'][r["task"]] = float(r["mean_ms"])
    labels = sorted(bars)
    fig, ax = plt.subplots(figsize=(max(4, 1.4 * len(labels)), 4))
    bottom = [0.0] * len(labels)
    for task in TASKS:
        vals = [bars[l].get(task, 0.0) for l in labels]
        ax.bar(labels, vals, bottom=bottom, label=task.replace("_", " "))
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_ylabel("mean latency (ms)")
    ax.legend(fontsize="small")
    ax.grid(axis="y", alpha=0.3)
    save(fig, out)


def main(argv):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("kind", choices=["cache", "latency"])
    ap.add_argument("csv", nargs="+")
    ap.add_argument("-o", "--out", required=True, help="output path without extension")
    args = ap.parse_args(argv)
    if args.kind == "cache":
        plot_cache(args.csv, args.out)
    else:
        plot_latency(args.csv, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
