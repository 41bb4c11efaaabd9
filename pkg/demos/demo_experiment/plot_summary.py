"""Bar charts of per-user average SINR from an experiment's summary.csv.

Usage: python plot_summary.py [summary.csv] [out_dir]

Writes one ``before_<objective>.svg`` per objective (all users at equal
priority) and one ``after_<objective>_alpha<alpha>.svg`` per (objective,
alpha) with a bar group per current state.
"""

import csv
import sys
from collections import defaultdict
from pathlib import Path


def _read(summary_csv):
    with open(summary_csv, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_summary(summary_csv, out_dir):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "patient-hetnet"
    rows = _read(summary_csv)
    out_dir = Path(out_dir)
    written = []

    before = defaultdict(list)
    after = defaultdict(lambda: defaultdict(list))
    pop = {}
    for r in rows:
        user, op, mean = int(r["user"]), r["outpatient"] == "1", float(r["mean_sinr"])
        if r["phase"] == "before":
            before[r["objective"]].append((user, op, mean))
            pop[(r["objective"], "before")] = float(r["population_mean_sinr"])
        else:
            after[(r["objective"], r["alpha"])][int(r["state"])].append((user, op, mean))

    for objective, vals in before.items():
        fig, ax = plt.subplots(figsize=(6, 3.5))
        users = [u for u, _, _ in vals]
        colors = ["tab:red" if op else "tab:blue" for _, op, _ in vals]
        ax.bar(users, [m for _, _, m in vals], color=colors)
        ax.axhline(pop[(objective, "before")], color="k", ls="--", lw=1, label="average")
        ax.set_xlabel("user")
        ax.set_ylabel("average SINR (linear)")
        ax.set_title(f"{objective}: before prioritization")
        ax.set_xticks(users)
        ax.legend()
        path = out_dir / f"before_{objective}.svg"
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)

    for (objective, alpha), by_state in sorted(after.items()):
        fig, ax = plt.subplots(figsize=(8, 3.5))
        states = sorted(by_state)
        width = 0.8 / len(states)
        for i, s in enumerate(states):
            vals = by_state[s]
            xs = [u + (i - (len(states) - 1) / 2) * width for u, _, _ in vals]
            ax.bar(xs, [m for _, _, m in vals], width=width, label=f"state {s}")
        users = [u for u, _, _ in by_state[states[0]]]
        ax.set_xticks(users)
        ax.set_xlabel("user")
        ax.set_ylabel("average SINR (linear)")
        ax.set_title(f"{objective}: after prioritization, alpha = {alpha}")
        ax.legend(fontsize=6, ncol=2)
        tag = alpha.rstrip("0").rstrip(".") if "." in alpha else alpha
        path = out_dir / f"after_{objective}_alpha{tag}.svg"
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


if __name__ == "__main__":
    src = sys.argv[1] if len(sys.argv) > 1 else "summary.csv"
    dst = sys.argv[2] if len(sys.argv) > 2 else Path(src).parent
    for p in plot_summary(src, dst):
        print(p)
