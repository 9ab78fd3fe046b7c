"""
Desk-scale comparison run on ``configs/pipeline_desk.json``. It trains every configured model, which takes hours on
a CPU, so it only runs with ``RISLAB_ACCEPTANCE=1``.
"""
import json
import os
import unittest
from pathlib import Path

from rislab.cli.main import main, EXIT_OK
from rislab.evaluation.experiment import SUMMARY_FILE
from rislab.tests.util import RISLabTestCase

DESK_CONFIG = Path(__file__).resolve().parents[3] / 'configs' / 'pipeline_desk.json'


@unittest.skipUnless(os.environ.get('RISLAB_ACCEPTANCE') == '1', 'set RISLAB_ACCEPTANCE=1 for the desk-scale run')
class TestDeskScaleComparison(RISLabTestCase):
    def run_step(self, *argv):
        code = main([*argv, '--config', str(DESK_CONFIG), '--output-root', str(self.tmp_path), '--log-level',
                     'WARNING'])
        assert code == EXIT_OK, f"{argv} exited with {code}"

    def test_ris_information_beats_bs_and_is_robust_to_phases(self):
        self.run_step('simulate')
        self.run_step('simulate', '--phase-mode', 'optimized_per_sample', '--out', 'datasets/optimized.risd')
        for name in ('tiny', 'tiny_opt'):
            self.run_step('train-recon', '--name', name)
        for name in ('ris', 'ris_opt', 'bs', 'bs_opt'):
            self.run_step('train-loc', '--name', name)
        self.run_step('evaluate')
        with open(self.tmp_path / 'evaluation' / SUMMARY_FILE) as file:
            summary = json.load(file)
        assert summary['ordering_ratio'] <= 0.7
        assert summary['robustness_ratio'] < 0.5
