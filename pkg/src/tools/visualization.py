"""SVG figures for convergence, stability (exponent and moment path) and trajectory results.

Plots are illustrative; the CSV tables are the authoritative output, so
emission failures are logged as warnings and never raised.
"""
from logging import Logger
from pathlib import Path
from typing import List, Optional, Tuple, Union
import argparse
import csv

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from src.experiments.convergence import fit_positive_errors
from src.types.reports import (
    CONVERGENCE_COLUMNS,
    STABILITY_COLUMNS,
    StabilityReport,
    StrongErrorReport,
)
from src.types.trajectory import Trajectory
from src.utils.errors import InputError

PLOT_KINDS = ("convergence", "stability", "moment", "trajectory")
LOG_TINY = float(np.log(np.finfo(np.float64).tiny))
LOG_HUGE = float(np.log(np.finfo(np.float64).max))
Report = Union[StrongErrorReport, StabilityReport, Trajectory]


def build_convergence_figure(report: StrongErrorReport) -> plt.Figure:
    """log2-log2 scatter of the errors, fitted line and a dashed slope-1 reference"""
    if not report.deltas:
        raise InputError("Convergence report has no step sizes to plot")
    deltas = np.asarray(report.deltas, dtype=np.float64)
    errors = np.asarray(report.errors, dtype=np.float64)
    positive = np.isfinite(errors) & (errors > 0)
    if not np.any(positive):
        raise InputError("Convergence report has no positive error to plot")
    x = np.log2(deltas[positive])
    y = np.log2(errors[positive])

    fig, ax = plt.subplots(figsize=(8, 6))
    ax.scatter(x, y, s=40, color='#4472C4', zorder=3, label='strong error')
    if report.slope is not None and report.intercept is not None:
        ax.plot(x, report.slope * x + report.intercept, color='#4472C4', linewidth=1.5,
                label=f'fit, slope {report.slope:.3f}')
    ax.plot(x, x - x[-1] + y[-1], 'r--', linewidth=1.5, label='slope 1')
    ax.set_xlabel(r'$\log_2 \Delta$')
    ax.set_ylabel(r'$\log_2$ strong error')
    ax.set_title(f'Strong convergence at T, {report.system_label} ({report.scheme})')
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def build_stability_figure(report: StabilityReport) -> plt.Figure:
    """Exponent curve log E|Y_k|^p / (k delta) against k delta"""
    if not report.ks:
        raise InputError("Stability report has no sampled steps to plot")
    fig, ax = plt.subplots(figsize=(8, 6))
    ax.plot(report.times, report.exponents, color='#4472C4', linewidth=1.2)
    if report.reference_level is not None:
        ax.axhline(report.reference_level, color='red', linestyle='--', linewidth=1.5,
                   label=f'-p(lambda - eps) = {report.reference_level:g}')
        ax.legend()
    target = "|Y_k|" if report.component is None else f"|Y_k^{{({report.component + 1})}}|"
    ax.set_xlabel(r'$k\Delta$')
    ax.set_ylabel(rf'$\log E{target}^{{{report.p:g}}} / (k\Delta)$')
    ax.set_title(f'Moment exponent, {report.system_label}, delta={report.delta:g}')
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def representable_moments(report: StabilityReport) -> Tuple[np.ndarray, np.ndarray]:
    """(k delta, E|Y_k|^p) at the samples whose log-moment exponentiates to a normal float"""
    log_moments = np.asarray(report.log_moments, dtype=np.float64)
    keep = np.isfinite(log_moments) & (log_moments > LOG_TINY) & (log_moments < LOG_HUGE)
    return np.asarray(report.times)[keep], np.exp(log_moments[keep])


def build_moment_figure(report: StabilityReport) -> plt.Figure:
    """Moment path E|Y_k|^p against k delta"""
    times, moments = representable_moments(report)
    if times.size == 0:
        raise InputError("Stability report has no representable moment values to plot")
    fig, ax = plt.subplots(figsize=(8, 6))
    ax.plot(times, moments, color='#4472C4', linewidth=1.2)
    target = "|Y_k|" if report.component is None else f"|Y_k^{{({report.component + 1})}}|"
    ax.set_xlabel(r'$k\Delta$')
    ax.set_ylabel(rf'$E{target}^{{{report.p:g}}}$')
    ax.set_title(f'Moment path, {report.system_label}, delta={report.delta:g}')
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def build_trajectory_figure(trajectory: Trajectory) -> plt.Figure:
    if trajectory.states.size == 0:
        raise InputError("Trajectory is empty")
    fig, ax = plt.subplots(figsize=(10, 5))
    for i in range(trajectory.states.shape[1]):
        ax.plot(trajectory.times, trajectory.states[:, i], linewidth=1.0, label=f'$Y^{{({i + 1})}}$')
    ax.set_xlabel('t')
    ax.set_ylabel('state')
    ax.set_title(f'{trajectory.scheme_label} path, delta={trajectory.delta:g}')
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def emit_plot(report: Report, kind: str, output_path: Path,
              logger: Optional[Logger] = None) -> Optional[Path]:
    """Write the figure for ``report`` as SVG; returns None if writing failed"""
    builders = {
        "convergence": build_convergence_figure,
        "stability": build_stability_figure,
        "moment": build_moment_figure,
        "trajectory": build_trajectory_figure,
    }
    if kind not in builders:
        raise InputError(f"Unknown plot kind '{kind}', expected one of {PLOT_KINDS}")
    fig = builders[kind](report)
    output_path = Path(output_path)
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(output_path, format='svg', bbox_inches='tight')
    except Exception as e:
        if logger:
            logger.warning(f"Could not write {kind} plot to {output_path}: {e}")
        return None
    finally:
        plt.close(fig)
    if logger:
        logger.info(f"Saved plot: {output_path}")
    return output_path


def _csv_kind(path: Path) -> Optional[str]:
    with open(path, newline='') as f:
        header = next(csv.reader(f), [])
    if header == CONVERGENCE_COLUMNS:
        return "convergence"
    if header == STABILITY_COLUMNS:
        return "stability"
    return None


def replot(csv_files: List[Path], output_dir: Optional[Path] = None) -> List[Path]:
    """Re-render SVGs from existing convergence.csv / stability.csv tables"""
    written = []
    for csv_file in csv_files:
        kind = _csv_kind(csv_file)
        if kind is None:
            print(f"Warning: {csv_file} is not a convergence or stability table")
            continue
        if kind == "convergence":
            report = StrongErrorReport.read_csv(csv_file)
            report.slope, report.intercept = fit_positive_errors(report)
            kinds = ["convergence"]
        else:
            report = StabilityReport.read_csv(csv_file)
            kinds = ["stability"]
            if representable_moments(report)[0].size:
                kinds.append("moment")
        for kind in kinds:
            target = (output_dir or csv_file.parent) / f"{kind}.svg"
            if emit_plot(report, kind, target):
                print(f"Saved plot: {target}")
                written.append(target)
    return written


def main():
    parser = argparse.ArgumentParser(description='Re-render SVG plots from result tables')
    parser.add_argument('csv_files', nargs='+', type=Path,
                        help='Paths to convergence.csv or stability.csv files')
    parser.add_argument('-o', '--output-dir', type=Path, default=None,
                        help='Output directory for plots (default: next to each table)')
    args = parser.parse_args()

    valid_files = []
    for file_path in args.csv_files:
        if not file_path.exists():
            print(f"Warning: File not found: {file_path}")
        elif file_path.suffix != '.csv':
            print(f"Warning: Not a CSV file: {file_path}")
        else:
            valid_files.append(file_path)
    if not valid_files:
        print("No valid result tables found. Exiting.")
        return
    replot(valid_files, args.output_dir)


if __name__ == '__main__':
    main()
