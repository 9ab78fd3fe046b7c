"""
CNN feature extractors with their classification heads removed. Every family is split into a ``stem`` followed by
four ``blocks`` (shallow to deep) so that blocks can be frozen and unfrozen individually.
"""
import logging
import os
from typing import Sequence, Tuple

import torch
import torch.nn as nn
from torchvision import models

from rislab.exceptions import ConfigError

logger = logging.getLogger(__name__)

BACKBONE_FAMILIES = ('alexnet_like', 'resnet18_like', 'densenet121_like', 'tiny')
N_BLOCKS = 4


class Backbone(nn.Module):
    def __init__(self, family: str, stem: nn.Module, blocks: Sequence[nn.Module], out_channels: int,
                 pretrained_mode: str = 'random'):
        super().__init__()
        self.family = family
        self.stem = stem
        self.blocks = nn.ModuleList(blocks)
        self.out_channels = out_channels
        self.pretrained_mode = pretrained_mode
        self._trainable = [True] * len(self.blocks)

    # ------------------
    # public properties

    @property
    def trainable_blocks(self) -> Tuple[bool, ...]:
        return tuple(self._trainable)

    @property
    def stem_trainable(self) -> bool:
        return all(self._trainable)

    # ------------------
    # public methods

    def set_trainable(self, flags: Sequence[bool]):
        """
        :param flags: one flag per block, shallow to deep. The stem follows the shallowest block. Frozen blocks are kept in
            eval mode so normalization statistics stay fixed too.
        """
        if len(flags) != len(self.blocks):
            raise ConfigError(f"expected {len(self.blocks)} block flags, got {len(flags)}")
        self._trainable = [bool(flag) for flag in flags]
        for parameter in self.stem.parameters():
            parameter.requires_grad_(self.stem_trainable)
        for block, flag in zip(self.blocks, self._trainable):
            for parameter in block.parameters():
                parameter.requires_grad_(flag)
        self.train(self.training)

    def train(self, mode: bool = True):
        super().train(mode)
        if mode:
            self.stem.train(self.stem_trainable)
            for block, flag in zip(self.blocks, self._trainable):
                block.train(flag)
        return self

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        t = self.stem(t)
        for block in self.blocks:
            t = block(t)
        return t


def _tiny() -> Backbone:
    channels = [3, 16, 32, 64, 128]
    blocks = [nn.Sequential(nn.Conv2d(c_in, c_out, kernel_size=3, stride=2, padding=1), nn.ReLU(inplace=True))
              for c_in, c_out in zip(channels, channels[1:])]
    return Backbone('tiny', nn.Identity(), blocks, channels[-1])


def _alexnet() -> Backbone:
    features = models.alexnet(weights=None).features
    return Backbone('alexnet_like', features[0:3], [features[3:6], features[6:8], features[8:10], features[10:13]],
                    256)


def _resnet18() -> Backbone:
    model = models.resnet18(weights=None)
    return Backbone('resnet18_like', nn.Sequential(model.conv1, model.bn1, model.relu, model.maxpool),
                    [model.layer1, model.layer2, model.layer3, model.layer4], 512)


def _load_densenet121(pretrained: bool):
    if not pretrained:
        return models.densenet121(weights=None), 'random'
    cache = os.environ.get('RISLAB_CACHE')
    if cache:
        torch.hub.set_dir(cache)
    try:
        return models.densenet121(weights=models.DenseNet121_Weights.IMAGENET1K_V1), 'pretrained'
    except (OSError, RuntimeError, ValueError) as err:
        logger.warning(f"pretrained DenseNet-121 weights unavailable ({err}); falling back to random initialization")
        return models.densenet121(weights=None), 'random_fallback'


def _densenet121(pretrained: bool) -> Backbone:
    model, mode = _load_densenet121(pretrained)
    f = model.features
    stem = nn.Sequential(f.conv0, f.norm0, f.relu0, f.pool0)
    blocks = [nn.Sequential(f.denseblock1, f.transition1), nn.Sequential(f.denseblock2, f.transition2),
              nn.Sequential(f.denseblock3, f.transition3), nn.Sequential(f.denseblock4, f.norm5, nn.ReLU())]
    return Backbone('densenet121_like', stem, blocks, 1024, pretrained_mode=mode)


def build_backbone(family: str, pretrained: bool = False) -> Backbone:
    """
    :param family: one of ``alexnet_like``, ``resnet18_like``, ``densenet121_like``, ``tiny``
    :param pretrained: load ImageNet weights (DenseNet-121 only); falls back to random weights when they cannot be
        fetched, which is recorded in :obj:`Backbone.pretrained_mode`.
    """
    if pretrained and family != 'densenet121_like':
        raise ConfigError(f"pretrained weights are only provided for densenet121_like, not {family}")
    if family == 'tiny':
        return _tiny()
    if family == 'alexnet_like':
        return _alexnet()
    if family == 'resnet18_like':
        return _resnet18()
    if family == 'densenet121_like':
        return _densenet121(pretrained)
    raise ConfigError(f"backbone family '{family}' must be in {list(BACKBONE_FAMILIES)}")

