"""Render diagnostic figures to files alongside the delimited output.

All figures are written headlessly (Agg backend); nothing is displayed.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .monitor import DiagnosticsRecord, gronwall_report

__all__ = ["save_report_figures"]

_DPI = 150


def _energy_figure(t, recs: Sequence[DiagnosticsRecord], path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    kinetic = [r.kinetic for r in recs]
    dirichlet = [r.dirichlet for r in recs]
    ax1.plot(t, kinetic, label=r"$\|u\|_{L^2}^2$")
    ax1.plot(t, dirichlet, label=r"$\|\nabla d\|_{L^2}^2$")
    ax1.plot(t, np.add(kinetic, dirichlet), "k--", label="total")
    ax1.set_xlabel("t")
    ax1.set_ylabel("energy")
    ax1.legend(fontsize=8)
    ax2.plot(t, [r.visc_dissip for r in recs], label=r"$\|\nabla u\|_{L^2}^2$")
    ax2.plot(t, [r.tension_dissip for r in recs],
             label=r"$\|\Delta d+|\nabla d|^2 d\|_{L^2}^2$")
    ax2.set_xlabel("t")
    ax2.set_ylabel("dissipation")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _criterion_figure(t, recs: Sequence[DiagnosticsRecord], path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(t, [r.vort_bmo for r in recs], label=r"$\|\nabla\times u\|_{BMO}$")
    ax1.plot(t, [r.grad_d_l4**8 for r in recs], label=r"$\|\nabla d\|_{L^4}^8$")
    ax1.set_xlabel("t")
    ax1.set_ylabel("integrand")
    ax1.legend(fontsize=8)
    ax2.plot(t, [r.criterion_value for r in recs], color="crimson")
    ax2.set_xlabel("t")
    ax2.set_ylabel("accumulated criterion integral")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _constraints_figure(t, recs: Sequence[DiagnosticsRecord], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    floor = 1e-18
    ax.semilogy(t, np.maximum([r.div_max for r in recs], floor), label=r"$\max|\nabla\cdot u|$")
    ax.semilogy(t, np.maximum([r.unit_max_dev for r in recs], floor), label=r"$\max||d|-1|$")
    ax.set_xlabel("t")
    ax.set_ylabel("constraint violation")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _gronwall_figure(recs: Sequence[DiagnosticsRecord], t_star, path: Path) -> None:
    rep = gronwall_report(recs, t_star)
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    A = np.array(rep.A)
    y = np.log(rep.L) - np.log(rep.L_star)
    ax.plot(A, y, "o-", ms=3, label=r"$\ln L(t) - \ln L(t_*)$")
    ax.plot(A, rep.c_hat * A, "k--", label=fr"fit slope $\hat C$ = {rep.c_hat:.4g}")
    ax.set_xlabel("accumulated criterion integral A(t)")
    ax.set_ylabel("log energy growth")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_report_figures(
    records: Sequence[DiagnosticsRecord],
    out_dir,
    stem: str = "report",
    t_star: float | None = None,
) -> list[Path]:
    """Write the four standard figures; returns the paths written.

    The Gronwall panel is skipped when the window is too short or L is not
    positive (e.g. an all-zero run).
    """
    if not records:
        raise ValueError("no records to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t = [r.t for r in records]
    written = []
    for name, fn in (
        ("energy", lambda p: _energy_figure(t, records, p)),
        ("criterion", lambda p: _criterion_figure(t, records, p)),
        ("constraints", lambda p: _constraints_figure(t, records, p)),
    ):
        path = out_dir / f"{stem}_{name}.png"
        fn(path)
        written.append(path)
    try:
        path = out_dir / f"{stem}_gronwall.png"
        _gronwall_figure(records, t_star, path)
        written.append(path)
    except ValueError:
        pass
    return written
