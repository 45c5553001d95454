"""Render figures and a delimited summary from a results CSV.

One log-log figure per (family, d): measured empirical W1 with its
bootstrap interval against the three bound curves and an n^{-1/2}
guide. Figures are written next to a summary CSV carrying the fitted
slopes, so the artifacts stay diff-able.
"""

from __future__ import annotations

import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .wasserstein import rate_fit


def read_results(path: str):
    """Rows (as dicts) and footer lines of a results CSV."""
    rows, footers = [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                footers.append(line)
                continue
            if header is None:
                header = line.split(",")
                continue
            rec = dict(zip(header, line.split(",")))
            rows.append({
                "family": rec["family"],
                "d": int(rec["d"]),
                "n": int(rec["n"]),
                "bound_m1": float(rec["bound_m1"]),
                "bound_m2": float(rec["bound_m2"]),
                "bound_m3": float(rec["bound_m3"]),
                "w1_value": float(rec["w1_value"]),
                "w1_ci_lo": float(rec["w1_ci_lo"]),
                "w1_ci_hi": float(rec["w1_ci_hi"]),
            })
    if header is None:
        raise ValueError(f"no header row in {path}")
    return rows, footers


def render_report(results_path: str, out_dir: str) -> list[str]:
    """Write one figure per (family, d) plus summary.csv; returns paths."""
    rows, _ = read_results(results_path)
    os.makedirs(out_dir, exist_ok=True)
    groups = defaultdict(list)
    for r in rows:
        groups[(r["family"], r["d"])].append(r)

    written = []
    summary = []
    for (family, d), sub in sorted(groups.items()):
        sub = sorted(sub, key=lambda r: r["n"])
        n = np.array([r["n"] for r in sub], dtype=float)
        w1 = np.array([r["w1_value"] for r in sub])
        lo = np.array([r["w1_ci_lo"] for r in sub])
        hi = np.array([r["w1_ci_hi"] for r in sub])

        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        ax.errorbar(n, w1, yerr=[w1 - lo, hi - w1], fmt="o-", capsize=3,
                    label="measured W1 (95% CI)", color="tab:blue")
        for key, style, color in (("bound_m1", "--", "tab:red"),
                                  ("bound_m2", "-.", "tab:orange"),
                                  ("bound_m3", ":", "tab:green")):
            ax.plot(n, [r[key] for r in sub], style, color=color, label=key)
        guide = w1[0] * np.sqrt(n[0] / n)
        ax.plot(n, guide, "-", lw=0.8, color="gray", label=r"n^{-1/2} guide")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("n (number of summands)")
        ax.set_ylabel("distance / bound")
        ax.set_title(f"{family}, d={d}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig_path = os.path.join(out_dir, f"w1_{family}_d{d}.png")
        fig.savefig(fig_path, dpi=150)
        plt.close(fig)
        written.append(fig_path)

        slope = float("nan")
        if len(sub) >= 4:
            slope = rate_fit([(r["n"], r["w1_value"]) for r in sub])
        summary.append((family, d, len(sub), slope))

    summary_path = os.path.join(out_dir, "summary.csv")
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "d", "n_points", "w1_loglog_slope"])
        for family, d, k, slope in summary:
            w.writerow([family, d, k, f"{slope:.6g}"])
    written.append(summary_path)
    return written
