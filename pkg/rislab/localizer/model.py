import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd
import torch
import torch.nn as nn

from rislab.exceptions import ConfigValueError
from rislab.nets.backbones import build_backbone, N_BLOCKS
from rislab.nets.checkpoint import save_checkpoint, read_checkpoint_config, load_weights_into
from rislab.nets.exceptions import CheckpointError, NonFiniteEstimateError, TensorShapeError
from rislab.nets.image import ChannelStats, InputModule, complex_to_image
from rislab.nets.training import predict, resolve_device
from rislab.localizer.config import LocalizerConfig

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = 'localizer'


def unfreeze_state(epoch: int, schedule: Sequence[Tuple[int, int]], n_blocks: int = N_BLOCKS) -> Tuple[bool, ...]:
    """
    Per-block trainability (shallow to deep) at ``epoch``. Entry (e, k) makes the deepest k blocks trainable from
    epoch e on; past the last entry every block is trainable.

    >>> unfreeze_state(12, ((5, 1), (10, 2), (15, 3), (20, 4)))
    (False, False, True, True)
    """
    if epoch < 0:
        raise ConfigValueError(f"epoch '{epoch}' must not be negative")
    if not schedule or epoch > schedule[-1][0]:
        return (True,) * n_blocks
    count = 0
    for start, blocks in schedule:
        if epoch >= start:
            count = max(count, blocks)
    count = min(count, n_blocks)
    return tuple(index >= n_blocks - count for index in range(n_blocks))


@dataclass(frozen=True)
class LocalizationEstimate:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise NonFiniteEstimateError(f"localization estimate {self} is not finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


class PositionHead(nn.Module):
    """
    Global average pooling over the backbone feature map followed by a three-neuron linear layer.
    """

    def __init__(self, in_channels: int):
        super().__init__()
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.linear = nn.Linear(in_channels, 3)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return self.linear(torch.flatten(self.pool(features), start_dim=1))

    @torch.no_grad()
    def estimate(self, features: torch.Tensor, label_stats: ChannelStats) -> LocalizationEstimate:
        if features.dim() == 3:
            features = features.unsqueeze(0)
        values = label_stats.denormalize(self(features).double().cpu().numpy())[0]
        return LocalizationEstimate(*(float(v) for v in values))


def preprocess_ris(y_r_hat: np.ndarray, n1: int, n2: int, input_module: InputModule,
                   stats: ChannelStats = None) -> torch.Tensor:
    """
    (re, im) image of the RIS signal as an (n1, n2) grid, normalized by ``stats`` if given, upsampled and
    expanded to three channels by ``input_module``.
    """
    y_r_hat = np.asarray(y_r_hat)
    if y_r_hat.ndim != 1 or y_r_hat.shape[0] != n1 * n2:
        raise TensorShapeError(f"RIS signal of shape {y_r_hat.shape} cannot be arranged as {n1}x{n2}")
    image = complex_to_image(y_r_hat, n1, n2)[np.newaxis]
    if stats is not None:
        image = stats.normalize(image)
    return input_module(torch.as_tensor(image, dtype=torch.float32))[0]


class LocalizerModel(nn.Module):
    """
    Transfer-learning fingerprint network: input module, backbone with per-block freezing and :obj:`PositionHead`.
    ``signal_shape`` is the array grid of the input signal (RIS grid, or BS grid for the BS baseline); it only
    affects the input image, not the parameter count.
    """

    def __init__(self, config: LocalizerConfig, signal_shape: Tuple[int, int], input_stats: ChannelStats,
                 label_stats: ChannelStats, pretrained: bool = None):
        super().__init__()
        self.config = config
        self.signal_shape = tuple(signal_shape)
        self.input_stats = input_stats
        self.label_stats = label_stats
        self.input_module = InputModule(config.upsample_hw)
        self.backbone = build_backbone(config.backbone_family, config.pretrained if pretrained is None else pretrained)
        self.head = PositionHead(self.backbone.out_channels)

    @property
    def pretrained_mode(self) -> str:
        return self.backbone.pretrained_mode

    def apply_unfreeze_state(self, epoch: int) -> Tuple[bool, ...]:
        flags = unfreeze_state(epoch, self.config.unfreeze_schedule, len(self.backbone.blocks))
        self.backbone.set_trainable(flags)
        return flags

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return self.head(self.backbone(self.input_module(image)))

    def prepare_inputs(self, signals: np.ndarray) -> np.ndarray:
        return self.input_stats.normalize(complex_to_image(np.atleast_2d(signals), *self.signal_shape))

    def locate(self, signals: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """
        :param signals: complex input signals of shape (K, rows * cols)
        :return: estimated positions in meters, shape (K, 3)
        """
        device = next(self.parameters()).device
        return self.label_stats.denormalize(predict(self, self.prepare_inputs(signals), batch_size, device))

    def checkpoint_config(self):
        return {'kind': CHECKPOINT_KIND, 'config': self.config.to_dict(), 'signal_shape': list(self.signal_shape),
                'input_stats': self.input_stats.to_dict(), 'label_stats': self.label_stats.to_dict(),
                'pretrained_mode': self.pretrained_mode}


def save_localizer(model: LocalizerModel, history: pd.DataFrame, directory: Union[str, Path],
                   force: bool = False) -> Path:
    return save_checkpoint(model, model.checkpoint_config(), history, directory, force=force)


def load_localizer(directory: Union[str, Path]) -> LocalizerModel:
    document = read_checkpoint_config(directory)
    if document.get('kind') != CHECKPOINT_KIND:
        raise CheckpointError(f"{directory} holds a '{document.get('kind')}' checkpoint, not a localizer")
    config = LocalizerConfig.from_dict(document['config'])
    # weights come from the checkpoint, never from the network
    model = LocalizerModel(config, document['signal_shape'], ChannelStats.from_dict(document['input_stats']),
                           ChannelStats.from_dict(document['label_stats']), pretrained=False)
    model.backbone.pretrained_mode = document.get('pretrained_mode', model.backbone.pretrained_mode)
    load_weights_into(model, directory)
    return model.to(resolve_device(config.device)).eval()
