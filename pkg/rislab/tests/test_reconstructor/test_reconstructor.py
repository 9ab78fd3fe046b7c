import json

import numpy as np
import torch
from torch.autograd import gradcheck

from rislab.exceptions import ConfigError, ZeroReferenceError
from rislab.nets.checkpoint import CONFIG_FILE
from rislab.nets.exceptions import TensorShapeError, CheckpointError
from rislab.nets.image import ChannelStats
from rislab.reconstructor.config import ReconstructorConfig
from rislab.reconstructor.model import ReconstructionHead, ReconstructorModel, save_reconstructor, \
    load_reconstructor
from rislab.reconstructor.train import reconstruction_nmse, evaluate_reconstruction, train_reconstructor
from rislab.tests.util import RISLabTestCase, complex_normal


def tiny_config(**kwargs):
    return ReconstructorConfig(**{'backbone_family': 'tiny', 'upsample_hw': (32, 32), 'pooled_hw': (2, 2),
                                  'epochs': 2, 'batch_size': 8, **kwargs})


class TestReconstructionNmse(RISLabTestCase):
    def test_reference_values(self):
        y_r = complex_normal(np.random.default_rng(0), 100)
        assert reconstruction_nmse(y_r, y_r) == 0
        assert reconstruction_nmse(np.zeros(100), y_r) == 1
        assert abs(reconstruction_nmse(2 * y_r, y_r) - 1) < 1e-15

    def test_invalid(self):
        with self.assertRaises(ZeroReferenceError):
            reconstruction_nmse(np.ones(3), np.zeros(3))
        with self.assertRaises(ValueError):
            reconstruction_nmse(np.ones(3), np.ones(4))
        with self.assertRaises(TensorShapeError):
            reconstruction_nmse(np.ones((2, 3)), np.ones(6))


class TestReconstructorConfig(RISLabTestCase):
    def test_defaults(self):
        config = ReconstructorConfig()
        assert config.upsample_hw == (256, 256)
        assert ReconstructorConfig.from_dict(config.to_dict()) == config

    def test_invalid(self):
        with self.assertRaises(ConfigError):
            ReconstructorConfig(backbone_family='vgg')
        with self.assertRaises(ConfigError):
            ReconstructorConfig.from_dict({'unknown': 1})
        with self.assertRaises(ConfigError):
            ReconstructorConfig(learning_rate=0)
        with self.assertRaises(ConfigError):
            tiny_config(upsample_hw=(2, 2)).check_input_shape(3, 3)


class TestReconstructionHead(RISLabTestCase):
    def test_output_length(self):
        head = ReconstructionHead(16, 100)
        assert head(torch.randn(4, 16)).shape == (4, 200)
        with self.assertRaises(TensorShapeError):
            head(torch.randn(4, 15))

    def test_negative_features_give_bias(self):
        head = ReconstructionHead(16, 10)
        with torch.no_grad():
            assert torch.equal(head(-torch.rand(1, 16) - 0.1)[0], head.linear.bias)

    def test_linear_above_zero(self):
        head = ReconstructionHead(16, 10)
        features = torch.rand(1, 16, dtype=torch.float64) + 0.1
        head = head.double()
        with torch.no_grad():
            single = head(features) - head.linear.bias
            double = head(2 * features) - head.linear.bias
        assert torch.allclose(double, 2 * single, atol=1e-12)

    def test_to_signal(self):
        head = ReconstructionHead(4, 2)
        stats = ChannelStats((1.0, -1.0), (2.0, 3.0), axis=2)
        features = torch.rand(1, 4)
        with torch.no_grad():
            values = head(features).double().numpy()[0]
        signal = head.to_signal(features, stats)[0]
        assert abs(signal[1] - complex(values[2] * 2 + 1, values[3] * 3 - 1)) < 1e-12

    def test_gradients(self):
        head = ReconstructionHead(6, 3).double()
        features = torch.randn(2, 6, dtype=torch.float64, generator=torch.Generator().manual_seed(1),
                               requires_grad=True)
        assert gradcheck(head, (features,), eps=1e-6, atol=1e-8, rtol=1e-4)


class TestReconstructorModel(RISLabTestCase):
    def test_default_geometry_shape_pipeline(self):
        stats = ChannelStats((0.0, 0.0), (1.0, 1.0))
        target_stats = ChannelStats((0.0, 0.0), (1.0, 1.0), axis=2)
        model = ReconstructorModel(tiny_config(), (3, 3), (10, 10), stats, target_stats)
        assert (model.m, model.n) == (9, 100)
        assert model(torch.randn(5, 2, 3, 3)).shape == (5, 200)
        assert model.reconstruct(complex_normal(np.random.default_rng(0), 9)).shape == (100,)

    def test_training_history(self):
        train, val = self.make_fingerprints(24, 1), self.make_fingerprints(8, 2)
        model, history = train_reconstructor(train, val, tiny_config(epochs=3))
        assert list(history.columns) == ['epoch', 'train_loss', 'val_loss']
        assert list(history['epoch']) == [0, 1, 2]
        assert np.all(np.isfinite(history[['train_loss', 'val_loss']].to_numpy()))
        assert not model.training

    def test_without_validation_set(self):
        _, history = train_reconstructor(self.make_fingerprints(8, 1), None, tiny_config(epochs=1))
        assert np.isnan(history['val_loss'][0])

    def test_overfits_small_set(self):
        train = self.make_fingerprints(32, 3)
        model, history = train_reconstructor(train, None, tiny_config(epochs=500))
        assert float(np.mean(evaluate_reconstruction(model, train))) <= 1e-2
        assert history['train_loss'].iloc[-1] <= 1e-2 * history['train_loss'].iloc[0]
        window_means = history['train_loss'].to_numpy().reshape(-1, 50).mean(axis=1)
        assert np.all(np.diff(window_means) <= 0)

    def test_seed_determinism(self):
        train = self.make_fingerprints(16, 4)
        first, first_history = train_reconstructor(train, None, tiny_config(epochs=3, deterministic=True, seed=9))
        second, second_history = train_reconstructor(train, None, tiny_config(epochs=3, deterministic=True, seed=9))
        assert first_history['train_loss'].tolist() == second_history['train_loss'].tolist()
        for a, b in zip(first.state_dict().values(), second.state_dict().values()):
            assert torch.equal(a, b)

    def test_checkpoint_round_trip(self):
        train = self.make_fingerprints(16, 5)
        model, history = train_reconstructor(train, None, tiny_config(epochs=1))
        directory = self.tmp_path / 'recon'
        save_reconstructor(model, history, directory)
        with open(directory / CONFIG_FILE) as file:
            document = json.load(file)
        assert document['kind'] == 'reconstructor'
        assert document['config']['backbone_family'] == 'tiny'
        assert document['config']['upsample_hw'] == [32, 32]
        assert document['pretrained_mode'] == 'random'
        restored = load_reconstructor(directory)
        assert np.allclose(restored.reconstruct(train.y), model.reconstruct(train.y), rtol=0, atol=0)
        with self.assertRaises(CheckpointError):
            save_reconstructor(model, history, directory)
