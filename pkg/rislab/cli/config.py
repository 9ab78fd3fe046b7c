"""
Pipeline configuration document::

    {
      "output_root": "runs/desk",
      "scenario": "scenario_default.json",
      "dataset": {"path": "datasets/train.risd", "count": 22000, "seed": 7, "phase_mode": "random_per_sample",
                  "region": {"low": [5, -10, 0.5], "high": [25, 10, 2.5], "exclusion_radius_m": 0.5},
                  "split_fractions": [0.8, 0.1, 0.1], "split_seed": 0, "workers": 4},
      "reconstructors": {"resnet18": {"backbone_family": "resnet18_like", "epochs": 40}},
      "localizers": {"densenet": {"backbone": "densenet121_like_pretrained", "reconstructor": "resnet18"}},
      "experiments": [{"label": "RIS", "localizer": "densenet", "reconstructor": "resnet18",
                       "phase_mode": "random_per_sample"}]
    }

``scenario`` is a path relative to the config file or an inline scenario document. A document without a
``scenario`` key is read as a bare scenario document. Dataset, checkpoint and evaluation paths are relative to the
output root. Reconstructor and localizer entries accept an extra ``dataset`` key naming another dataset file;
localizer entries accept ``reconstructor`` naming the reconstructor that feeds them. The optional ``comparison``
(default ``{"ris": "RIS", "bs": "BS"}``) names the experiment labels the summary ratios are computed from.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from rislab.channel.scenario import Scenario
from rislab.dataset.generator import SamplingRegion
from rislab.evaluation.experiment import ExperimentSpec, Comparison, DEFAULT_TEST_LIMIT
from rislab.exceptions import ConfigError
from rislab.localizer.config import LocalizerConfig
from rislab.reconstructor.config import ReconstructorConfig
from rislab.util.core import require_key, check_enum
from rislab.util.helpervariables import phase_modes

_PIPELINE_KEYS = {'output_root', 'scenario', 'dataset', 'reconstructors', 'localizers', 'experiments', 'comparison'}
_DATASET_KEYS = {'path', 'count', 'seed', 'phase_mode', 'region', 'split_fractions', 'split_seed', 'workers'}

RECONSTRUCTOR_DIR = 'reconstructors'
LOCALIZER_DIR = 'localizers'
EVALUATION_DIR = 'evaluation'
DEFAULT_DATASET_PATH = 'dataset.risd'


@dataclass
class DatasetSettings:
    path: Path
    count: int
    seed: int
    phase_mode: str
    region: SamplingRegion
    split_fractions: Tuple[float, ...] = (0.8, 0.1, 0.1)
    split_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        check_enum(self.phase_mode, phase_modes, 'phase_mode')
        if self.workers < 1:
            raise ConfigError(f"workers '{self.workers}' must be at least 1")


@dataclass
class ModelEntry:
    name: str
    config: Union[ReconstructorConfig, LocalizerConfig]
    dataset: Optional[str] = None
    reconstructor: Optional[str] = None


@dataclass
class PipelineConfig:
    scenario: Dict[str, Any]
    dataset: Dict[str, Any] = field(default_factory=dict)
    reconstructors: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    localizers: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    experiments: List[Dict[str, Any]] = field(default_factory=list)
    comparison: Comparison = field(default_factory=Comparison)
    output_root: Optional[str] = None
    source: Optional[Path] = None

    def __post_init__(self):
        unknown = set(self.dataset) - _DATASET_KEYS
        if unknown:
            raise ConfigError(f"unknown dataset keys {sorted(unknown)}")
        for kind, entries in (('reconstructors', self.reconstructors), ('localizers', self.localizers)):
            if not isinstance(entries, dict):
                raise ConfigError(f"'{kind}' must map names to model configs")
        if not isinstance(self.experiments, list):
            raise ConfigError("'experiments' must be a list")

    # ------------------
    # public methods

    @classmethod
    def from_dict(cls, document: Dict[str, Any], base_dir: Union[str, Path] = '.') -> 'PipelineConfig':
        if not isinstance(document, dict):
            raise ConfigError("config document must be a JSON object")
        if 'scenario' not in document:
            return cls(scenario=document)
        unknown = set(document) - _PIPELINE_KEYS
        if unknown:
            raise ConfigError(f"unknown pipeline keys {sorted(unknown)}; allowed keys are {sorted(_PIPELINE_KEYS)}")
        scenario = document['scenario']
        if isinstance(scenario, str):
            scenario_path = Path(base_dir) / scenario
            if not scenario_path.is_file():
                raise ConfigError(f"scenario file {scenario_path} does not exist")
            scenario = _read_json(scenario_path)
        return cls(scenario=scenario, dataset=dict(document.get('dataset', {})),
                   reconstructors=document.get('reconstructors', {}), localizers=document.get('localizers', {}),
                   experiments=document.get('experiments', []), output_root=document.get('output_root'),
                   comparison=Comparison.from_dict(document.get('comparison')))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'PipelineConfig':
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        config = cls.from_dict(_read_json(path), path.parent)
        config.source = path
        return config

    def build_scenario(self) -> Scenario:
        return Scenario.from_dict(self.scenario)

    def dataset_settings(self, output_root: Path, count: int = None, seed: int = None, phase_mode: str = None,
                         out: str = None, workers: int = None) -> DatasetSettings:
        """
        Flags passed here take precedence over the ``dataset`` section, which takes precedence over the defaults.
        """
        dataset = self.dataset
        if count is None:
            count = require_key(dataset, 'count', 'dataset config (or --count)')
        if seed is None:
            seed = dataset.get('seed', self.build_scenario().master_seed)
        return DatasetSettings(path=output_root / (out or dataset.get('path', DEFAULT_DATASET_PATH)),
                               count=int(count), seed=int(seed),
                               phase_mode=phase_mode or dataset.get('phase_mode', 'random_per_sample'),
                               region=SamplingRegion.from_dict(dataset.get('region')),
                               split_fractions=tuple(dataset.get('split_fractions', (0.8, 0.1, 0.1))),
                               split_seed=int(dataset.get('split_seed', 0)),
                               workers=int(workers or dataset.get('workers', 1)))

    def dataset_path(self, output_root: Path, entry: 'ModelEntry' = None) -> Path:
        if entry is not None and entry.dataset:
            return output_root / entry.dataset
        return output_root / self.dataset.get('path', DEFAULT_DATASET_PATH)

    def reconstructor_entry(self, name: str = None, overrides: Dict[str, Any] = None) -> ModelEntry:
        name, document = _select(self.reconstructors, name, 'reconstructors')
        dataset = document.pop('dataset', None)
        document.update(overrides or {})
        return ModelEntry(name, ReconstructorConfig.from_dict(document), dataset=dataset)

    def localizer_entry(self, name: str = None, overrides: Dict[str, Any] = None) -> ModelEntry:
        name, document = _select(self.localizers, name, 'localizers')
        dataset = document.pop('dataset', None)
        reconstructor = document.pop('reconstructor', None)
        document.update(overrides or {})
        config = LocalizerConfig.from_dict(document)
        if config.input_source == 'reconstructed' and reconstructor is None:
            if not self.reconstructors:
                raise ConfigError(f"localizer '{name}' uses reconstructed inputs but no reconstructor is configured")
            reconstructor = next(iter(self.reconstructors))
        return ModelEntry(name, config, dataset=dataset, reconstructor=reconstructor)

    def experiment_specs(self, output_root: Path) -> List[ExperimentSpec]:
        """
        Experiment entries may name trained models (``localizer``, ``reconstructor``) instead of checkpoint paths;
        ``dataset`` defaults to the pipeline dataset.
        """
        if not self.experiments:
            raise MissingExperimentsError("config has no 'experiments' to evaluate")
        specs = []
        for entry in self.experiments:
            entry = dict(entry)
            localizer = entry.pop('localizer', None)
            reconstructor = entry.pop('reconstructor', None)
            if localizer is not None:
                entry.setdefault('localizer_checkpoint', f"{LOCALIZER_DIR}/{localizer}")
            if reconstructor is not None:
                entry.setdefault('reconstructor_checkpoint', f"{RECONSTRUCTOR_DIR}/{reconstructor}")
            entry.setdefault('dataset', self.dataset.get('path', DEFAULT_DATASET_PATH))
            entry.setdefault('split_fractions', list(self.dataset.get('split_fractions', (0.8, 0.1, 0.1))))
            entry.setdefault('split_seed', self.dataset.get('split_seed', 0))
            entry.setdefault('test_limit', DEFAULT_TEST_LIMIT)
            specs.append(ExperimentSpec.from_dict(entry, output_root))
        return specs


class MissingExperimentsError(ConfigError):
    pass


def _read_json(path: Path) -> Any:
    with open(path) as file:
        try:
            return json.load(file)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path} is not valid JSON: {err}")


def _select(entries: Dict[str, Dict[str, Any]], name: Optional[str], kind: str) -> Tuple[str, Dict[str, Any]]:
    if not entries:
        raise ConfigError(f"config has no '{kind}' section")
    if name is None:
        name = next(iter(entries))
    if name not in entries:
        raise ConfigError(f"'{name}' is not one of the configured {kind} {sorted(entries)}")
    return name, dict(entries[name])
