from rislab.evaluation.cdf import CdfCurve, nmse_cdf, percentile
from rislab.evaluation.experiment import ExperimentSpec, SpecResult, ExperimentReport, evaluate_spec, run_experiment, \
    phase_gaps, Comparison, comparison_ratios, filter_specs, METRICS_FILE, SUMMARY_FILE
from rislab.evaluation.plotting import plot_cdf_curves, render_cdf_figure
