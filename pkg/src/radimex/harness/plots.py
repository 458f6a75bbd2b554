"""Figure data: profile and convergence CSVs, a plotting script and PNGs."""

from __future__ import annotations

import csv
import math
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .convergence import ConvergenceTable  # noqa: E402
from .driver import RunReport  # noqa: E402

PROFILE_VARIABLES = ("rho", "e_i", "T", "Er", "u")
LABELS = {
    "rho": r"$\rho$ [g/cm$^3$]",
    "e_i": r"$e_i$ [erg/g]",
    "T": r"$T$ [eV]",
    "Er": r"$E_r$ [erg/cm$^3$]",
    "u": r"$u$ [cm/s]",
}


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-." else "_" for c in text).strip("_")


def profile_columns(report: RunReport, t: float) -> dict[str, np.ndarray]:
    st = report.snapshots[t]
    sl = report.grid.interior
    rho = st.rho[sl]
    u = st.mom[sl] / rho
    return {
        "rho": rho,
        "e_i": st.rho_et[sl] / rho - 0.5 * u * u,
        "T": st.T[sl],
        "Er": st.Er[sl],
        "u": u,
    }


def write_profile_csv(report: RunReport, var: str, path: Path) -> Path:
    """Columns: x, then one column per output time (header ``t=<seconds>``)."""
    times = report.times
    cols = [report.grid.centers] + [profile_columns(report, t)[var] for t in times]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + [f"t={t:.6e}" for t in times])
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])
    return path


def write_convergence_csv(tables: list[ConvergenceTable], norm: str, path: Path) -> Path:
    """Columns: dt, then one ``scheme:variable`` column per table and variable.

    Rows are the union of all ladders; missing or unstable entries are empty.
    """
    dts = sorted({dt for tab in tables for dt in tab.dts}, reverse=True)
    header = ["dt"]
    lookup = []
    for tab in tables:
        for var in tab.variables:
            header.append(f"{tab.scheme}:{var}")
            lookup.append(dict(zip(tab.dts, tab.errors(var, norm))))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for dt in dts:
            vals = [col.get(dt, math.nan) for col in lookup]
            w.writerow([f"{dt:.17g}"] + ["" if math.isnan(v) else f"{v:.17g}" for v in vals])
    return path


_SCRIPT_DOC = '"""Redraw the figures from the CSV files in this directory."""\n'
_SCRIPT = '''
import csv
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = [[float(v) if v else float("nan") for v in c] for c in zip(*body)]
    return header, cols


for name in PROFILES:
    header, cols = read(here / name)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, col in zip(header[1:], cols[1:]):
        ax.plot(cols[0], col, label=label)
    ax.set_xlabel("x [cm]")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(here / name.replace(".csv", ".png"), dpi=120)
    plt.close(fig)

for name in CONVERGENCE:
    header, cols = read(here / name)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, col in zip(header[1:], cols[1:]):
        ax.loglog(cols[0], col, "o-", label=label)
    ax.set_xlabel("dt [s]")
    ax.set_ylabel("relative error")
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(here / name.replace(".csv", ".png"), dpi=120)
    plt.close(fig)
'''


def _plot_profiles(report: RunReport, var: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    x = report.grid.centers
    for t in report.times:
        ax.plot(x, profile_columns(report, t)[var], label=f"t = {t * 1e9:g} ns")
    ax.set_xlabel("x [cm]")
    ax.set_ylabel(LABELS[var])
    ax.set_title(f"{report.problem}, {report.scheme}", fontsize=9)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _plot_convergence(tables: list[ConvergenceTable], norm: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for tab in tables:
        for var in tab.variables:
            err = np.array(tab.errors(var, norm))
            ok = np.isfinite(err)
            if ok.any():
                ax.loglog(np.array(tab.dts)[ok], err[ok], "o-", label=f"{tab.scheme}: {var}")
    ax.set_xlabel("dt [s]")
    ax.set_ylabel(f"relative {norm} error")
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def emit_plots(
    reports: list[RunReport] = (),
    tables: list[ConvergenceTable] = (),
    out_dir: str | Path = "figures",
    norms=("L2",),
    render: bool = True,
) -> list[Path]:
    """Write figure CSVs, a plotting script that reads only them, and PNGs.

    Returns the written paths; an empty input writes nothing and warns.
    """
    reports, tables = list(reports), list(tables)
    if not reports and not tables:
        warnings.warn("emit_plots: nothing to plot", stacklevel=2)
        return []
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written, profiles, convergence = [], [], []
    for rep in reports:
        for var in PROFILE_VARIABLES:
            path = out / f"profile_{_slug(rep.problem)}_{_slug(rep.scheme)}_{var}.csv"
            written.append(write_profile_csv(rep, var, path))
            profiles.append(path.name)
            if render:
                written.append(_plot_profiles(rep, var, path.with_suffix(".png")))
    by_problem: dict[str, list[ConvergenceTable]] = {}
    for tab in tables:
        by_problem.setdefault(tab.problem, []).append(tab)
    for problem, tabs in by_problem.items():
        for norm in norms:
            path = out / f"convergence_{_slug(problem)}_{norm}.csv"
            written.append(write_convergence_csv(tabs, norm, path))
            convergence.append(path.name)
            if render:
                written.append(_plot_convergence(tabs, norm, path.with_suffix(".png")))
    script = out / "plot_figures.py"
    script.write_text(_SCRIPT_DOC + f"PROFILES = {profiles!r}\nCONVERGENCE = {convergence!r}\n" + _SCRIPT)
    written.append(script)
    return written
