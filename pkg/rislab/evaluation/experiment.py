import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from rislab.dataset.reader import DatasetReader, load_fingerprints, split_indices
from rislab.evaluation.cdf import CdfCurve, nmse_cdf, percentile
from rislab.evaluation.exceptions import DuplicateLabelError
from rislab.evaluation.plotting import render_cdf_figure
from rislab.exceptions import ConfigError, RISLabException
from rislab.localizer.model import load_localizer
from rislab.localizer.train import localization_errors, select_inputs
from rislab.reconstructor.model import load_reconstructor
from rislab.util.core import require_key, check_enum
from rislab.util.helpervariables import phase_modes

logger = logging.getLogger(__name__)

METRICS_FILE = 'metrics.csv'
SUMMARY_FILE = 'summary.json'
METRICS_COLUMNS = ['label', 'n', 'nmse_p50', 'nmse_p90', 'mean_pos_err_m']
DEFAULT_TEST_LIMIT = 2000
OPTIMIZED_SUFFIX = ' opt.'


@dataclass
class ExperimentSpec:
    """
    One curve of the comparison: a dataset, the trained localizer evaluated on its test split and, for
    ``reconstructed`` inputs, the reconstructor feeding it.
    """
    label: str
    dataset: Path
    localizer_checkpoint: Path
    phase_mode: str
    reconstructor_checkpoint: Optional[Path] = None
    split_fractions: Tuple[float, ...] = (0.8, 0.1, 0.1)
    split_seed: int = 0
    test_limit: int = DEFAULT_TEST_LIMIT

    def __post_init__(self):
        if not self.label:
            raise ConfigError("experiment label must not be empty")
        check_enum(self.phase_mode, phase_modes, 'phase_mode')
        if self.test_limit < 1:
            raise ConfigError(f"test_limit '{self.test_limit}' must be positive")
        self.dataset = Path(self.dataset)
        self.localizer_checkpoint = Path(self.localizer_checkpoint)
        if self.reconstructor_checkpoint is not None:
            self.reconstructor_checkpoint = Path(self.reconstructor_checkpoint)
        self.split_fractions = tuple(float(f) for f in self.split_fractions)

    @classmethod
    def from_dict(cls, dict_: Dict[str, Any], root: Union[str, Path] = None) -> 'ExperimentSpec':
        """
        Relative paths are resolved against ``root``.
        """
        allowed = {'label', 'dataset', 'localizer_checkpoint', 'reconstructor_checkpoint', 'phase_mode',
                   'split_fractions', 'split_seed', 'test_limit'}
        unknown = set(dict_) - allowed
        if unknown:
            raise ConfigError(f"unknown experiment keys {sorted(unknown)}")
        context = f"experiment '{dict_.get('label', '?')}'"
        root = Path(root) if root is not None else Path('.')

        def resolve(value):
            return None if value is None else root / value

        return cls(label=require_key(dict_, 'label', 'experiment'),
                   dataset=resolve(require_key(dict_, 'dataset', context)),
                   localizer_checkpoint=resolve(require_key(dict_, 'localizer_checkpoint', context)),
                   phase_mode=require_key(dict_, 'phase_mode', context),
                   reconstructor_checkpoint=resolve(dict_.get('reconstructor_checkpoint')),
                   split_fractions=tuple(dict_.get('split_fractions', (0.8, 0.1, 0.1))),
                   split_seed=int(dict_.get('split_seed', 0)),
                   test_limit=int(dict_.get('test_limit', DEFAULT_TEST_LIMIT)))

    def to_dict(self) -> Dict[str, Any]:
        output = asdict(self)
        for key in ('dataset', 'localizer_checkpoint', 'reconstructor_checkpoint'):
            if output[key] is not None:
                output[key] = str(output[key])
        output['split_fractions'] = list(self.split_fractions)
        return output


@dataclass(eq=False)
class SpecResult:
    label: str
    nmse: List[float]
    distances: List[float]
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def curve(self) -> CdfCurve:
        return nmse_cdf(self.nmse)

    @property
    def n(self) -> int:
        return len(self.nmse)

    def metrics(self) -> Dict[str, Any]:
        curve = self.curve
        return {'label': self.label, 'n': self.n, 'nmse_p50': percentile(curve, 0.5),
                'nmse_p90': percentile(curve, 0.9), 'mean_pos_err_m': float(np.mean(self.distances))}


def evaluate_spec(spec: ExperimentSpec) -> SpecResult:
    """
    Runs the localizer of ``spec`` on the test split of its dataset.

    :return: per-sample localization NMSE and Euclidean errors with provenance
    """
    header = DatasetReader(spec.dataset).header
    if header.phase_mode != spec.phase_mode:
        raise ConfigError(f"experiment '{spec.label}' expects phase_mode '{spec.phase_mode}', dataset {spec.dataset} "
                          f"was generated with '{header.phase_mode}'")
    test_indices = split_indices(header.sample_count, spec.split_fractions, spec.split_seed)[-1][:spec.test_limit]
    fingerprints = load_fingerprints(spec.dataset, test_indices)
    localizer = load_localizer(spec.localizer_checkpoint)
    reconstructor = None
    if localizer.config.input_source == 'reconstructed':
        if spec.reconstructor_checkpoint is None:
            raise ConfigError(f"experiment '{spec.label}' uses reconstructed inputs but names no reconstructor")
        reconstructor = load_reconstructor(spec.reconstructor_checkpoint)
    signals, _ = select_inputs(fingerprints, localizer.config.input_source, reconstructor)
    nmse, distances = localization_errors(localizer.locate(signals), fingerprints.positions)
    provenance = {
        'dataset': {'path': str(spec.dataset), 'master_seed': header.master_seed,
                    'scenario_digest': header.scenario_digest, 'phase_mode': header.phase_mode,
                    'sample_count': header.sample_count},
        'split': {'fractions': list(spec.split_fractions), 'seed': spec.split_seed, 'test_count': len(test_indices)},
        'localizer': {'checkpoint': str(spec.localizer_checkpoint), 'config': localizer.config.to_dict(),
                      'pretrained_mode': localizer.pretrained_mode},
        'reconstructor': None if reconstructor is None else {
            'checkpoint': str(spec.reconstructor_checkpoint), 'config': reconstructor.config.to_dict(),
            'pretrained_mode': reconstructor.pretrained_mode}
    }
    logger.info(f"evaluated '{spec.label}' on {len(nmse)} test samples")
    return SpecResult(spec.label, nmse, distances, provenance)


def _evaluate_recording_failure(spec: ExperimentSpec) -> Tuple[Optional[SpecResult], Optional[str]]:
    try:
        return evaluate_spec(spec), None
    except (RISLabException, OSError, KeyError, ValueError) as err:
        return None, f"{type(err).__name__}: {err}"


def phase_gaps(metrics: pd.DataFrame) -> Dict[str, float]:
    """
    For every label ``L`` with a sibling ``L opt.``: p90(L opt.) - p90(L).
    """
    p90 = dict(zip(metrics['label'], metrics['nmse_p90']))
    return {label: float(p90[label + OPTIMIZED_SUFFIX] - value) for label, value in p90.items()
            if label + OPTIMIZED_SUFFIX in p90}


@dataclass(frozen=True)
class Comparison:
    """
    Labels of the RIS-information and BS-information curves. Their ``opt.`` siblings give the optimized-phase
    counterparts.
    """
    ris: str = 'RIS'
    bs: str = 'BS'

    @classmethod
    def from_dict(cls, dict_: Optional[Dict[str, str]]) -> 'Comparison':
        if not dict_:
            return cls()
        unknown = set(dict_) - {'ris', 'bs'}
        if unknown:
            raise ConfigError(f"unknown comparison keys {sorted(unknown)}")
        return cls(**dict_)


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    if denominator == 0 or not np.isfinite(numerator) or not np.isfinite(denominator):
        return None
    return float(numerator / denominator)


def comparison_ratios(metrics: pd.DataFrame, comparison: Comparison = Comparison()) -> Dict[str, Optional[float]]:
    """
    ``ordering_ratio`` = p90(RIS) / p90(BS); ``robustness_ratio`` = |p90(RIS opt.) - p90(RIS)| over
    |p90(BS opt.) - p90(BS)|. A ratio whose curves were not all evaluated is None.
    """
    p90 = dict(zip(metrics['label'], metrics['nmse_p90']))
    ris, bs = comparison.ris, comparison.bs
    ratios = {'ordering_ratio': None, 'robustness_ratio': None}
    if ris in p90 and bs in p90:
        ratios['ordering_ratio'] = _ratio(p90[ris], p90[bs])
    if all(label in p90 for label in (ris, bs, ris + OPTIMIZED_SUFFIX, bs + OPTIMIZED_SUFFIX)):
        ratios['robustness_ratio'] = _ratio(abs(p90[ris + OPTIMIZED_SUFFIX] - p90[ris]),
                                            abs(p90[bs + OPTIMIZED_SUFFIX] - p90[bs]))
    return ratios


def check_unique_labels(specs: Sequence[ExperimentSpec]):
    seen = set()
    for spec in specs:
        if spec.label in seen:
            raise DuplicateLabelError(f"experiment label '{spec.label}' is used more than once")
        seen.add(spec.label)


@dataclass(eq=False)
class ExperimentReport:
    metrics: pd.DataFrame
    summary: Dict[str, Any]
    failures: Dict[str, str]
    output_dir: Path

    @property
    def succeeded(self) -> bool:
        return not self.failures


def run_experiment(specs: Sequence[ExperimentSpec], output_dir: Union[str, Path], workers: int = 1,
                   comparison: Comparison = Comparison()) -> ExperimentReport:
    """
    Evaluates every spec, writes ``metrics.csv``, ``summary.json`` and the CDF overlay (``cdf.png``, ``cdf.svg``) into
    ``output_dir``. A spec that cannot be evaluated is recorded as failed and the run continues.
    """
    check_unique_labels(specs)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_evaluate_recording_failure, specs))
    else:
        outcomes = [_evaluate_recording_failure(spec) for spec in specs]

    rows, entries, failures = [], [], {}
    for spec, (result, error) in zip(specs, outcomes):
        entry = {'label': spec.label, 'spec': spec.to_dict()}
        if result is None:
            logger.warning(f"experiment '{spec.label}' failed: {error}")
            failures[spec.label] = error
            entry.update(status='failed', error=error)
        else:
            metrics = result.metrics()
            rows.append(metrics)
            entry.update(status='ok', **{key: metrics[key] for key in METRICS_COLUMNS[1:]}, nmse=result.nmse,
                         provenance=result.provenance)
        entries.append(entry)

    metrics = pd.DataFrame(rows, columns=METRICS_COLUMNS)
    metrics.to_csv(output_dir / METRICS_FILE, index=False)
    summary = {'specs': entries, 'phase_gaps': phase_gaps(metrics), **comparison_ratios(metrics, comparison),
               'comparison': asdict(comparison), 'failures': failures}
    with open(output_dir / SUMMARY_FILE, 'w') as file:
        json.dump(summary, file, indent=2)
    render_cdf_figure(output_dir / SUMMARY_FILE, output_dir)
    return ExperimentReport(metrics, summary, failures, output_dir)


def filter_specs(specs: Sequence[ExperimentSpec], labels: Sequence[str]) -> List[ExperimentSpec]:
    """
    Keeps the specs whose label is listed, in the order of ``specs``.
    """
    wanted = [label.strip() for label in labels if label.strip()]
    known = {spec.label for spec in specs}
    unknown = [label for label in wanted if label not in known]
    if unknown:
        raise ConfigError(f"unknown experiment labels {unknown}")
    return [spec for spec in specs if spec.label in wanted]
