import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
import torch
import torch.nn as nn

from rislab.nets.backbones import build_backbone
from rislab.nets.checkpoint import save_checkpoint, read_checkpoint_config, load_weights_into
from rislab.nets.exceptions import CheckpointError, TensorShapeError
from rislab.nets.image import ChannelStats, InputModule, complex_to_image, interleave, deinterleave
from rislab.nets.training import predict, resolve_device
from rislab.reconstructor.config import ReconstructorConfig

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = 'reconstructor'


class ReconstructionHead(nn.Module):
    """
    ReLU followed by a fully-connected layer emitting the 2N reals (re_0, im_0, re_1, ...) of the RIS signal.
    """

    def __init__(self, in_features: int, n: int):
        super().__init__()
        self.n = n
        self.relu = nn.ReLU()
        self.linear = nn.Linear(in_features, 2 * n)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        if features.shape[-1] != self.linear.in_features:
            raise TensorShapeError(f"head expects {self.linear.in_features} features, got {features.shape[-1]}")
        return self.linear(self.relu(features))

    @torch.no_grad()
    def to_signal(self, features: torch.Tensor, target_stats: ChannelStats) -> np.ndarray:
        """
        :return: complex (K, N) signal after de-normalization with ``target_stats``
        """
        values = self(torch.atleast_2d(features)).double().cpu().numpy()
        return deinterleave(target_stats.denormalize(values.reshape(values.shape[0], self.n, 2)).reshape(values.shape))


class ReconstructorModel(nn.Module):
    """
    Maps the BS signal y (M complex) to the RIS signal (N complex): (re, im) image of the BS array, upsampling,
    1x1 channel expansion, CNN backbone, average pooling to ``pooled_hw`` and :obj:`ReconstructionHead`.
    """

    def __init__(self, config: ReconstructorConfig, bs_shape: Tuple[int, int], ris_shape: Tuple[int, int],
                 input_stats: ChannelStats, target_stats: ChannelStats, pretrained_mode: str = None):
        super().__init__()
        config.check_input_shape(*bs_shape)
        self.config = config
        self.bs_shape = tuple(bs_shape)
        self.ris_shape = tuple(ris_shape)
        self.input_stats = input_stats
        self.target_stats = target_stats
        self.input_module = InputModule(config.upsample_hw)
        self.backbone = build_backbone(config.backbone_family)
        self.pool = nn.AdaptiveAvgPool2d(config.pooled_hw)
        features = self.backbone.out_channels * config.pooled_hw[0] * config.pooled_hw[1]
        self.head = ReconstructionHead(features, self.n)
        self.pretrained_mode = pretrained_mode or self.backbone.pretrained_mode

    # ------------------
    # public properties

    @property
    def m(self) -> int:
        return self.bs_shape[0] * self.bs_shape[1]

    @property
    def n(self) -> int:
        return self.ris_shape[0] * self.ris_shape[1]

    # ------------------
    # public methods

    def features(self, image: torch.Tensor) -> torch.Tensor:
        return torch.flatten(self.pool(self.backbone(self.input_module(image))), start_dim=1)

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(image))

    def prepare_inputs(self, y: np.ndarray) -> np.ndarray:
        return self.input_stats.normalize(complex_to_image(np.atleast_2d(y), *self.bs_shape))

    def prepare_targets(self, y_r: np.ndarray) -> np.ndarray:
        pairs = interleave(y_r).reshape(-1, self.n, 2)
        return self.target_stats.normalize(pairs).reshape(pairs.shape[0], -1)

    def reconstruct(self, y: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """
        :param y: complex BS signals of shape (K, M) or (M,)
        :return: reconstructed complex RIS signals of shape (K, N) or (N,)
        """
        single = np.asarray(y).ndim == 1
        device = next(self.parameters()).device
        values = predict(self, self.prepare_inputs(y), batch_size, device)
        output = deinterleave(self.target_stats.denormalize(values.reshape(-1, self.n, 2)).reshape(values.shape))
        return output[0] if single else output

    def checkpoint_config(self):
        return {'kind': CHECKPOINT_KIND, 'config': self.config.to_dict(), 'bs_shape': list(self.bs_shape),
                'ris_shape': list(self.ris_shape), 'input_stats': self.input_stats.to_dict(),
                'target_stats': self.target_stats.to_dict(), 'pretrained_mode': self.pretrained_mode}


def save_reconstructor(model: ReconstructorModel, history: pd.DataFrame, directory: Union[str, Path],
                       force: bool = False) -> Path:
    return save_checkpoint(model, model.checkpoint_config(), history, directory, force=force)


def load_reconstructor(directory: Union[str, Path]) -> ReconstructorModel:
    document = read_checkpoint_config(directory)
    if document.get('kind') != CHECKPOINT_KIND:
        raise CheckpointError(f"{directory} holds a '{document.get('kind')}' checkpoint, not a reconstructor")
    config = ReconstructorConfig.from_dict(document['config'])
    model = ReconstructorModel(config, document['bs_shape'], document['ris_shape'],
                               ChannelStats.from_dict(document['input_stats']),
                               ChannelStats.from_dict(document['target_stats']), document.get('pretrained_mode'))
    load_weights_into(model, directory)
    return model.to(resolve_device(config.device)).eval()
