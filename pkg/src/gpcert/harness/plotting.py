"""Figures written next to the textual reports."""

from __future__ import annotations

import os
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..kernels import final_bound  # noqa: E402
from .report import Report  # noqa: E402


def ledger_figure(path: str, T: float, M: float, C: float, k_values=(1, 2, 3), r_max: int = 10) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    rs = list(range(1, r_max + 1))
    for k in k_values:
        ax.semilogy(rs, [final_bound(k, r, T, M, C) for r in rs], marker="o", label=f"k={k}")
    ax.set_xlabel("r")
    ax.set_ylabel("trace-norm bound")
    ax.set_title(f"2CM^4T = {2 * C * M**4 * T:.2f}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def convergence_figure(path: str, studies: Dict[str, Dict[str, List[float]]]) -> str:
    """``studies[label] = {"dts": [...], "errors": [...]}``."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, s in studies.items():
        errs = [max(e, 1e-17) for e in s["errors"]]
        ax.loglog(s["dts"], errs, marker="o", label=label)
    dts = next(iter(studies.values()))["dts"]
    ref = [1e-3 * (d / dts[0]) ** 2 for d in dts]
    ax.loglog(dts, ref, "k--", label="slope 2")
    ax.set_xlabel("dt")
    ax.set_ylabel("max error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def residual_figure(path: str, report: Report) -> str:
    recs = [r for r in report.records if isinstance(r.residual, float) and r.residual >= 0 and r.residual < 1]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    groups = sorted({r.id.split(":")[0] for r in recs})
    for i, g in enumerate(groups):
        vals = [max(r.residual, 1e-17) for r in recs if r.id.startswith(g + ":")]
        ax.scatter([i] * len(vals), vals, s=12)
    ax.set_yscale("log")
    ax.set_xticks(range(len(groups)))
    ax.set_xticklabels(groups, rotation=30, ha="right")
    ax.set_ylabel("relative residual")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_all(outdir: str, report: Report, T: float, M: float, C: float) -> List[str]:
    os.makedirs(outdir, exist_ok=True)
    paths = [ledger_figure(os.path.join(outdir, "ledger_bound.png"), T, M, C)]
    studies = {}
    for r in report.records:
        if r.id.startswith(("nls-order:", "nls-dn:")) and "dts" in r.params:
            studies[r.id] = {"dts": r.params["dts"], "errors": r.params["errors"]}
    if studies:
        paths.append(convergence_figure(os.path.join(outdir, "nls_convergence.png"), studies))
    if any(isinstance(r.residual, float) for r in report.records):
        paths.append(residual_figure(os.path.join(outdir, "residuals.png"), report))
    return paths
