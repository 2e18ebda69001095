#!/usr/bin/env python3
#
# Licensed to the Apache Software Foundation (ASF) under one
# or more contributor license agreements.  See the NOTICE file
# distributed with this work for additional information
# regarding copyright ownership.  The ASF licenses this file
# to you under the Apache License, Version 2.0 (the
# "License"); you may not use this file except in compliance
# with the License.  You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
# KIND, either express or implied.  See the License for the
# specific language governing permissions and limitations
# under the License.
#/


"""Plot space/error frontiers and ratio hulls from quantbench CSV output.

    quantbench sweep ... -o sweep.csv
    quantbench frontier -i sweep.csv -o frontier.csv
    quantbench ratio -i sweep.csv -o ratio.csv
    python3 scripts/plot_frontiers.py --sweep sweep.csv --frontier frontier.csv --ratio ratio.csv -o plots/

One figure per dataset: a panel per stream order with the raw runs as dots
and each algorithm's lower envelope as a line, plus a ratio-hull figure when
a ratio CSV is given.
"""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def plot_frontiers(sweep, frontier, metric, outdir):
    for dataset, by_ds in sweep.groupby("dataset"):
        orders = sorted(by_ds["order"].unique())
        fig, axes = plt.subplots(1, len(orders), figsize=(4 * len(orders), 3.5), squeeze=False, sharey=True)
        for ax, order in zip(axes[0], orders):
            cell = by_ds[by_ds["order"] == order]
            for algorithm, runs in cell.groupby("algorithm"):
                dots = ax.scatter(runs["space_words"], runs[metric], s=10, alpha=0.5, label=algorithm)
                env = frontier[(frontier["algorithm"] == algorithm) & (frontier["dataset"] == dataset)
                               & (frontier["order"] == order) & (frontier["envelope"] == "lower")]
                if not env.empty:
                    ax.plot(env["space"], env["error"], color=dots.get_facecolor()[0], alpha=1.0)
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_title(order)
            ax.set_xlabel("space (64-bit words)")
        axes[0][0].set_ylabel(metric)
        axes[0][-1].legend()
        fig.suptitle(dataset)
        fig.tight_layout()
        fig.savefig(outdir / f"frontier_{dataset}.png", dpi=120)
        plt.close(fig)


def plot_ratios(ratio, outdir):
    for dataset, by_ds in ratio.groupby("dataset"):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for (order, num, den), hull in by_ds.groupby(["order", "numerator", "denominator"]):
            if num != "kll":
                continue
            band = ax.fill_between(hull["space"], hull["lo"], hull["hi"], alpha=0.3, label=f"{order}: {num}/{den}")
            band.set_edgecolor("none")
        ax.axhline(1.0, color="black", linewidth=0.8)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("space (64-bit words)")
        ax.set_ylabel("error ratio (>1: candidate better)")
        ax.legend(fontsize="small")
        ax.set_title(dataset)
        fig.tight_layout()
        fig.savefig(outdir / f"ratio_{dataset}.png", dpi=120)
        plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--sweep", required=True, type=pathlib.Path)
    parser.add_argument("--frontier", required=True, type=pathlib.Path)
    parser.add_argument("--ratio", type=pathlib.Path)
    parser.add_argument("--metric", default="avg_l1", help="metric the frontier CSV was computed with")
    parser.add_argument("-o", "--outdir", type=pathlib.Path, default=pathlib.Path("plots"))
    args = parser.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    plot_frontiers(pd.read_csv(args.sweep), pd.read_csv(args.frontier), args.metric, args.outdir)
    if args.ratio:
        plot_ratios(pd.read_csv(args.ratio), args.outdir)


if __name__ == "__main__":
    main()
