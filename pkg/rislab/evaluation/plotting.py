import json
import logging
from pathlib import Path
from typing import Dict, Sequence, Union

from matplotlib.figure import Figure

from rislab.evaluation.cdf import nmse_cdf

logger = logging.getLogger(__name__)

FIGURE_NAMES = ('cdf.png', 'cdf.svg')


def plot_cdf_curves(errors_by_label: Dict[str, Sequence[float]], output_dir: Union[str, Path]):
    """
    One overlay of the NMSE CDFs, one curve per label, saved as PNG and SVG.
    """
    output_dir = Path(output_dir)
    figure = Figure(figsize=(6.4, 4.8))
    axes = figure.add_subplot()
    positive = True
    for label, errors in errors_by_label.items():
        curve = nmse_cdf(errors)
        positive = positive and curve.values[0] > 0
        axes.step(curve.values, curve.probabilities, where='post', label=label)
    if positive and errors_by_label:
        axes.set_xscale('log')
    axes.set_xlabel('NMSE')
    axes.set_ylabel('CDF')
    axes.set_ylim(0, 1.02)
    axes.grid(True, which='both', alpha=0.3)
    axes.legend(loc='lower right')
    figure.tight_layout()
    paths = []
    for name in FIGURE_NAMES:
        figure.savefig(output_dir / name)
        paths.append(output_dir / name)
    logger.info(f"figures written to {output_dir}")
    return paths


def render_cdf_figure(summary_path: Union[str, Path], output_dir: Union[str, Path] = None):
    """
    Regenerates the CDF figures from a ``summary.json`` alone.
    """
    summary_path = Path(summary_path)
    with open(summary_path) as file:
        summary = json.load(file)
    errors = {entry['label']: entry['nmse'] for entry in summary['specs'] if entry['status'] == 'ok'}
    return plot_cdf_curves(errors, output_dir or summary_path.parent)
