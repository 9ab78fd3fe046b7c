import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np
import torch

from rislab.channel.scenario import Scenario
from rislab.dataset.generator import SamplingRegion, generate_dataset
from rislab.dataset.reader import Fingerprints, load_fingerprints

small_scenario_dict = {
    'bs_geometry': {'n_elev': 2, 'n_azim': 2},
    'ris_geometry': {'n_elev': 4, 'n_azim': 4},
    'mu_paths': 3,
    'bs_paths': 3,
    'noise_power_dbm': -170.0,
    'master_seed': 11,
}

# keeps every user 5 to 11 m from the RIS so per-sample signal levels stay comparable
compact_region = SamplingRegion(low=(5.0, -5.0, 1.0), high=(10.0, 5.0, 2.0))


def complex_normal(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class RISLabTestCase(TestCase):
    """
    Small 2x2 BS / 4x4 RIS deployment with three paths per link and a temporary directory per test.
    """

    def setUp(self) -> None:
        self.scenario_dict = dict(small_scenario_dict)
        self.scenario = Scenario.from_dict(self.scenario_dict)
        self.region = SamplingRegion()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp_path = Path(self._tmp.name)
        self.addCleanup(self._tmp.cleanup)
        threads = torch.get_num_threads()
        self.addCleanup(torch.set_num_threads, threads)
        self.addCleanup(torch.use_deterministic_algorithms, False)
        super().setUp()

    def make_fingerprints(self, count: int, seed: int = 0, region: SamplingRegion = compact_region,
                          phase_mode: str = 'random_per_sample', name: str = None) -> Fingerprints:
        path = self.tmp_path / (name or f'fingerprints_{count}_{seed}_{phase_mode}.risd')
        if not path.exists():
            generate_dataset(self.scenario, region, count, phase_mode, seed, path)
        return load_fingerprints(path)
