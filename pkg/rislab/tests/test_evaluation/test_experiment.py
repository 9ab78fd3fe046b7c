import json

import numpy as np
import pandas as pd

from rislab.dataset.reader import split_indices
from rislab.evaluation.cdf import nmse_cdf, percentile
from rislab.evaluation.exceptions import DuplicateLabelError
from rislab.evaluation.experiment import ExperimentSpec, Comparison, evaluate_spec, run_experiment, phase_gaps, \
    comparison_ratios, filter_specs, METRICS_FILE, SUMMARY_FILE, METRICS_COLUMNS
from rislab.evaluation.plotting import FIGURE_NAMES, render_cdf_figure
from rislab.exceptions import ConfigError, MissingConfigKeyError
from rislab.localizer.config import LocalizerConfig
from rislab.localizer.model import save_localizer
from rislab.localizer.train import train_localizer
from rislab.reconstructor.config import ReconstructorConfig
from rislab.reconstructor.model import save_reconstructor
from rislab.reconstructor.train import train_reconstructor
from rislab.tests.util import RISLabTestCase

SAMPLES = 200


def tiny_localizer_config(input_source):
    return LocalizerConfig(backbone='tiny', input_source=input_source, upsample_hw=(32, 32), unfreeze_schedule=(),
                           epochs=1, batch_size=16)


class ExperimentTestCase(RISLabTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.dataset = self.tmp_path / 'random.risd'
        fingerprints = self.make_fingerprints(SAMPLES, 3, name='random.risd')
        train = fingerprints.subset(split_indices(SAMPLES, (0.8, 0.1, 0.1), 0)[0])
        for name, source in (('ris', 'ground_truth_ris'), ('bs', 'bs_baseline')):
            model, history = train_localizer(train, None, None, tiny_localizer_config(source))
            save_localizer(model, history, self.tmp_path / name)

    def spec(self, label, localizer, **kwargs):
        return ExperimentSpec(**{'label': label, 'dataset': self.dataset, 'phase_mode': 'random_per_sample',
                                 'localizer_checkpoint': self.tmp_path / localizer, **kwargs})


class TestExperimentSpec(RISLabTestCase):
    def test_from_dict(self):
        spec = ExperimentSpec.from_dict({'label': 'RIS', 'dataset': 'd.risd', 'localizer_checkpoint': 'loc',
                                         'phase_mode': 'optimized_per_sample', 'test_limit': 10}, root=self.tmp_path)
        assert spec.dataset == self.tmp_path / 'd.risd'
        assert spec.reconstructor_checkpoint is None
        assert spec.test_limit == 10
        assert spec.to_dict()['localizer_checkpoint'] == str(self.tmp_path / 'loc')

    def test_invalid(self):
        document = {'label': 'RIS', 'dataset': 'd.risd', 'localizer_checkpoint': 'loc',
                    'phase_mode': 'optimized_per_sample'}
        with self.assertRaises(ConfigError):
            ExperimentSpec.from_dict({**document, 'color': 'red'})
        with self.assertRaises(MissingConfigKeyError) as context:
            ExperimentSpec.from_dict({key: value for key, value in document.items() if key != 'dataset'})
        assert 'dataset' in str(context.exception)
        with self.assertRaises(ConfigError):
            ExperimentSpec.from_dict({**document, 'phase_mode': 'best'})
        with self.assertRaises(ConfigError):
            ExperimentSpec.from_dict({**document, 'label': ''})


class TestPhaseGaps(RISLabTestCase):
    def test_pairs_labels(self):
        metrics = pd.DataFrame({'label': ['RIS', 'RIS opt.', 'BS', 'BS opt.', 'other'],
                                'nmse_p90': [0.1, 0.04, 0.2, 0.25, 0.3]})
        gaps = phase_gaps(metrics)
        assert set(gaps) == {'RIS', 'BS'}
        self.assertAlmostEqual(gaps['RIS'], -0.06)
        self.assertAlmostEqual(gaps['BS'], 0.05)

    def test_comparison_ratios(self):
        metrics = pd.DataFrame({'label': ['RIS', 'RIS opt.', 'BS', 'BS opt.'], 'nmse_p90': [0.01, 0.012, 0.04, 0.06]})
        ratios = comparison_ratios(metrics)
        self.assertAlmostEqual(ratios['ordering_ratio'], 0.25)
        self.assertAlmostEqual(ratios['robustness_ratio'], 0.1)

    def test_comparison_ratios_with_missing_curves(self):
        metrics = pd.DataFrame({'label': ['RIS', 'BS'], 'nmse_p90': [0.02, 0.04]})
        assert comparison_ratios(metrics) == {'ordering_ratio': 0.5, 'robustness_ratio': None}
        assert comparison_ratios(metrics, Comparison(ris='Dense', bs='BS')) == {'ordering_ratio': None,
                                                                               'robustness_ratio': None}
        metrics = pd.DataFrame({'label': ['A', 'A opt.', 'B', 'B opt.'], 'nmse_p90': [0.02, 0.03, 0.04, 0.04]})
        ratios = comparison_ratios(metrics, Comparison(ris='A', bs='B'))
        assert ratios['robustness_ratio'] is None
        self.assertAlmostEqual(ratios['ordering_ratio'], 0.5)

    def test_comparison_from_dict(self):
        assert Comparison.from_dict(None) == Comparison('RIS', 'BS')
        assert Comparison.from_dict({'ris': 'Dense'}) == Comparison('Dense', 'BS')
        with self.assertRaises(ConfigError):
            Comparison.from_dict({'rls': 'Dense'})


class TestEvaluateSpec(ExperimentTestCase):
    def test_test_split_and_provenance(self):
        result = evaluate_spec(self.spec('RIS', 'ris'))
        assert result.n == 20
        assert len(result.distances) == 20
        assert result.provenance['dataset']['master_seed'] == 3
        assert result.provenance['localizer']['pretrained_mode'] == 'random'
        assert result.provenance['reconstructor'] is None
        assert evaluate_spec(self.spec('RIS', 'ris', test_limit=5)).n == 5

    def test_phase_mode_mismatch(self):
        with self.assertRaises(ConfigError):
            evaluate_spec(self.spec('RIS opt.', 'ris', phase_mode='optimized_per_sample'))

    def test_reconstructed_inputs(self):
        train = self.make_fingerprints(SAMPLES, 3, name='random.risd')
        reconstructor, history = train_reconstructor(train, None, ReconstructorConfig(
            backbone_family='tiny', upsample_hw=(32, 32), pooled_hw=(2, 2), epochs=1, batch_size=16))
        save_reconstructor(reconstructor, history, self.tmp_path / 'recon')
        model, history = train_localizer(train, None, reconstructor, tiny_localizer_config('reconstructed'))
        save_localizer(model, history, self.tmp_path / 'loc')
        result = evaluate_spec(self.spec('RIS', 'loc', reconstructor_checkpoint=self.tmp_path / 'recon'))
        assert result.n == 20
        assert result.provenance['reconstructor']['config']['backbone_family'] == 'tiny'
        with self.assertRaises(ConfigError):
            evaluate_spec(self.spec('RIS', 'loc'))


class TestRunExperiment(ExperimentTestCase):
    def test_outputs(self):
        output = self.tmp_path / 'evaluation'
        report = run_experiment([self.spec('RIS', 'ris'), self.spec('BS', 'bs')], output)
        assert report.succeeded
        assert report.metrics['label'].tolist() == ['RIS', 'BS']
        metrics = pd.read_csv(output / METRICS_FILE)
        assert list(metrics.columns) == METRICS_COLUMNS
        assert metrics['n'].tolist() == [20, 20]
        with open(output / SUMMARY_FILE) as file:
            summary = json.load(file)
        for entry, row in zip(summary['specs'], metrics.itertuples()):
            assert entry['status'] == 'ok'
            assert entry['nmse_p90'] == percentile(nmse_cdf(entry['nmse']), 0.9)
            self.assertAlmostEqual(row.nmse_p90, entry['nmse_p90'], places=12)
            self.assertAlmostEqual(row.mean_pos_err_m, entry['mean_pos_err_m'], places=12)
        assert summary['phase_gaps'] == {}
        assert summary['robustness_ratio'] is None
        self.assertAlmostEqual(summary['ordering_ratio'], metrics['nmse_p90'][0] / metrics['nmse_p90'][1], places=9)
        for name in FIGURE_NAMES:
            assert (output / name).stat().st_size > 0

    def test_failed_spec_does_not_stop_the_run(self):
        output = self.tmp_path / 'evaluation'
        specs = [self.spec('RIS', 'ris'), self.spec('RIS opt.', 'ris', phase_mode='optimized_per_sample'),
                 self.spec('missing', 'nowhere')]
        report = run_experiment(specs, output)
        assert not report.succeeded
        assert set(report.failures) == {'RIS opt.', 'missing'}
        assert report.metrics['label'].tolist() == ['RIS']
        statuses = [entry['status'] for entry in report.summary['specs']]
        assert statuses == ['ok', 'failed', 'failed']
        assert 'ConfigError' in report.summary['specs'][1]['error']

    def test_duplicate_labels(self):
        with self.assertRaises(DuplicateLabelError):
            run_experiment([self.spec('RIS', 'ris'), self.spec('RIS', 'bs')], self.tmp_path / 'evaluation')
        with self.assertRaises(ConfigError):
            run_experiment([self.spec('RIS', 'ris'), self.spec('RIS', 'bs')], self.tmp_path / 'evaluation')

    def test_figures_from_summary(self):
        output = self.tmp_path / 'evaluation'
        run_experiment([self.spec('RIS', 'ris')], output)
        redrawn = self.tmp_path / 'redrawn'
        redrawn.mkdir()
        paths = render_cdf_figure(output / SUMMARY_FILE, redrawn)
        assert [path.name for path in paths] == list(FIGURE_NAMES)
        assert all(path.stat().st_size > 0 for path in paths)

    def test_filter_specs(self):
        specs = [self.spec('RIS', 'ris'), self.spec('BS', 'bs')]
        assert [spec.label for spec in filter_specs(specs, ['BS', ' RIS'])] == ['RIS', 'BS']
        with self.assertRaises(ConfigError):
            filter_specs(specs, ['RIS opt.'])
