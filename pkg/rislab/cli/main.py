"""
``rislab`` command line: ``simulate``, ``train-recon``, ``train-loc`` and ``evaluate``.

Exit codes: 0 success, 2 configuration error, 3 I/O, dataset or checkpoint error, 4 diverged training or phase
optimization, 5 failed experiment spec, 1 any other error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from rislab.cli.config import PipelineConfig, RECONSTRUCTOR_DIR, LOCALIZER_DIR, EVALUATION_DIR
from rislab.dataset.exceptions import DatasetException
from rislab.dataset.format import describe_header
from rislab.dataset.generator import generate_dataset
from rislab.dataset.reader import load_fingerprints, split_dataset
from rislab.evaluation.experiment import run_experiment, filter_specs, METRICS_FILE
from rislab.exceptions import ConfigError, PhaseOptimizationError, RISLabException
from rislab.localizer.model import save_localizer
from rislab.localizer.train import train_localizer
from rislab.nets.checkpoint import CONFIG_FILE
from rislab.nets.exceptions import CheckpointError, TrainingDivergedError
from rislab.reconstructor.model import save_reconstructor, load_reconstructor
from rislab.reconstructor.train import train_reconstructor

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4
EXIT_EXPERIMENT = 5


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True, help='pipeline or scenario JSON document')
    common.add_argument('--output-root', default=None, help='directory all artifact paths are relative to')
    common.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    common.add_argument('--workers', type=int, default=None, help='processes for generation and evaluation')
    common.add_argument('--deterministic', action='store_true', help='single-threaded deterministic numerics')
    common.add_argument('--force', action='store_true', help='overwrite existing artifacts')
    common.add_argument('--seed', type=int, default=None, help='overrides the dataset or training seed')

    parser = argparse.ArgumentParser(prog='rislab', description='RIS-aided fingerprint localization lab')
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', parents=[common], help='generate a fingerprint dataset')
    simulate.add_argument('--count', type=int, default=None)
    simulate.add_argument('--phase-mode', default=None,
                          choices=['random_per_sample', 'optimized_per_sample', 'fixed'])
    simulate.add_argument('--out', default=None, help='dataset file relative to the output root')
    simulate.set_defaults(handler=cmd_simulate)

    for name, handler, help_ in (('train-recon', cmd_train_recon, 'train a BS-to-RIS signal reconstructor'),
                                 ('train-loc', cmd_train_loc, 'train a fingerprint localizer')):
        command = commands.add_parser(name, parents=[common], help=help_)
        command.add_argument('--name', default=None, help='model entry of the config (default: the first)')
        command.add_argument('--epochs', type=int, default=None)
        command.set_defaults(handler=handler)

    evaluate = commands.add_parser('evaluate', parents=[common], help='evaluate the experiment specs')
    evaluate.add_argument('--labels', default=None, help='comma separated labels to evaluate')
    evaluate.set_defaults(handler=cmd_evaluate)
    return parser


def _output_root(args, config: PipelineConfig) -> Path:
    return Path(args.output_root or config.output_root or '.')


def _training_overrides(args) -> dict:
    overrides = {}
    if args.epochs is not None:
        overrides['epochs'] = args.epochs
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.deterministic:
        overrides['deterministic'] = True
    return overrides


def _check_checkpoint_target(directory: Path, force: bool):
    if (directory / CONFIG_FILE).exists() and not force:
        raise CheckpointError(f"checkpoint {directory} already exists; pass --force to overwrite")


def _training_splits(config: PipelineConfig, dataset_path: Path):
    settings = config.dataset
    splits = split_dataset(dataset_path, settings.get('split_fractions', (0.8, 0.1, 0.1)),
                           settings.get('split_seed', 0))
    train = load_fingerprints(dataset_path, splits[0])
    val = load_fingerprints(dataset_path, splits[1]) if len(splits) > 2 else None
    return train, val


def cmd_simulate(args, config: PipelineConfig) -> int:
    root = _output_root(args, config)
    settings = config.dataset_settings(root, count=args.count, seed=args.seed, phase_mode=args.phase_mode,
                                       out=args.out, workers=args.workers)
    if settings.path.exists() and not args.force:
        raise FileExistsError(f"dataset {settings.path} already exists; pass --force to overwrite")
    settings.path.parent.mkdir(parents=True, exist_ok=True)
    header = generate_dataset(config.build_scenario(), settings.region, settings.count, settings.phase_mode,
                              settings.seed, settings.path, workers=settings.workers)
    print(f"dataset        {settings.path}")
    print(describe_header(header))
    return EXIT_OK


def cmd_train_recon(args, config: PipelineConfig) -> int:
    root = _output_root(args, config)
    entry = config.reconstructor_entry(args.name, _training_overrides(args))
    directory = root / RECONSTRUCTOR_DIR / entry.name
    _check_checkpoint_target(directory, args.force)
    train, val = _training_splits(config, config.dataset_path(root, entry))
    model, history = train_reconstructor(train, val, entry.config)
    save_reconstructor(model, history, directory, force=args.force)
    print(f"reconstructor '{entry.name}' written to {directory}")
    return EXIT_OK


def cmd_train_loc(args, config: PipelineConfig) -> int:
    root = _output_root(args, config)
    entry = config.localizer_entry(args.name, _training_overrides(args))
    directory = root / LOCALIZER_DIR / entry.name
    _check_checkpoint_target(directory, args.force)
    reconstructor = None
    if entry.config.input_source == 'reconstructed':
        reconstructor = load_reconstructor(root / RECONSTRUCTOR_DIR / entry.reconstructor)
    train, val = _training_splits(config, config.dataset_path(root, entry))
    model, history = train_localizer(train, val, reconstructor, entry.config)
    save_localizer(model, history, directory, force=args.force)
    print(f"localizer '{entry.name}' written to {directory}")
    return EXIT_OK


def cmd_evaluate(args, config: PipelineConfig) -> int:
    root = _output_root(args, config)
    specs = config.experiment_specs(root)
    if args.labels:
        specs = filter_specs(specs, args.labels.split(','))
    output_dir = root / EVALUATION_DIR
    if (output_dir / METRICS_FILE).exists() and not args.force:
        raise FileExistsError(f"evaluation results in {output_dir} already exist; pass --force to overwrite")
    report = run_experiment(specs, output_dir, workers=args.workers or 1, comparison=config.comparison)
    print(report.metrics.to_string(index=False))
    for key in ('ordering_ratio', 'robustness_ratio'):
        value = report.summary[key]
        print(f"{key:<17} {'n/a' if value is None else f'{value:.4f}'}")
    for label, error in report.failures.items():
        print(f"FAILED {label}: {error}")
    return EXIT_EXPERIMENT if report.failures else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        config = PipelineConfig.from_file(args.config)
        return args.handler(args, config)
    except ConfigError as err:
        logger.error(f"configuration error: {err}")
        return EXIT_CONFIG
    except (TrainingDivergedError, PhaseOptimizationError) as err:
        logger.error(f"diverged: {err}")
        return EXIT_DIVERGED
    except (OSError, DatasetException, CheckpointError) as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_IO
    except RISLabException as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_FAILURE
    except (ValueError, ArithmeticError) as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
